// Command-line front end: simulate runs, analyze them, and plot reports.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pulsechain/corrstats.hpp"
#include "pulsechain/ingest.hpp"
#include "pulsechain/pipeline.hpp"
#include "pulsechain/svgplot.hpp"

namespace fs = std::filesystem;
using namespace pulsechain;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 1;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    double rep_rate = 0.0;     // 0: keep config value
    std::uint64_t seed = 0;    // 0: keep config value
    std::size_t n_traces = 0;  // 0: keep config value
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_config = true) {
    auto* c = cmd->add_option("--config", opts.config_path,
                              "run configuration (JSON)")
                  ->envname("PULSECHAIN_CONFIG");
    if (need_config) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory")
        ->envname("PULSECHAIN_OUT");
    cmd->add_option("--override", opts.overrides,
                    "config override key=value (dotted path)");
    cmd->add_option("--rep-rate", opts.rep_rate, "repetition rate [Hz]")
        ->envname("PULSECHAIN_REP_RATE");
    cmd->add_option("--seed", opts.seed, "base seed")
        ->envname("PULSECHAIN_SEED");
    cmd->add_option("--n-traces", opts.n_traces, "number of traces")
        ->envname("PULSECHAIN_N_TRACES");
}

pipeline::RunConfig resolve_config(const CommonOpts& opts) {
    std::vector<std::string> overrides = opts.overrides;
    if (opts.rep_rate > 0.0)
        overrides.push_back("rep_rate_hz=" + std::to_string(opts.rep_rate));
    if (opts.seed != 0)
        overrides.push_back("base_seed=" + std::to_string(opts.seed));
    if (opts.n_traces != 0)
        overrides.push_back("n_traces=" + std::to_string(opts.n_traces));
    return pipeline::load_config(opts.config_path, overrides);
}

fs::path config_dir(const CommonOpts& opts) {
    return fs::path(opts.config_path).parent_path();
}

enum class ReportKind { correlation, visibility, drift, spacing, unknown };

ReportKind sniff_report(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line)) return ReportKind::unknown;
    if (line.rfind("# per-case", 0) == 0) return ReportKind::correlation;
    if (line.rfind("# visibility", 0) == 0) return ReportKind::visibility;
    if (line.rfind("timestamp_s", 0) == 0) return ReportKind::drift;
    if (line.rfind("l_ns", 0) == 0) return ReportKind::spacing;
    return ReportKind::unknown;
}

svgplot::Series read_two_column_series(const fs::path& path,
                                       const std::string& header_prefix) {
    std::ifstream in(path);
    std::string line;
    svgplot::Series s;
    s.label = path.stem().string();
    bool in_data = false;
    while (std::getline(in, line)) {
        if (line.rfind(header_prefix, 0) == 0) {
            in_data = true;
            continue;
        }
        if (!in_data || line.empty()) continue;
        if (line[0] == '#') break;
        std::stringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        s.x.push_back(std::stod(a));
        s.y.push_back(std::stod(b));
    }
    return s;
}

int cmd_plot(const std::vector<std::string>& reports,
             const std::string& out_file) {
    if (reports.empty())
        throw std::invalid_argument("plot: no report files given");
    const ReportKind kind = sniff_report(reports.front());
    svgplot::ChartSpec spec;
    switch (kind) {
        case ReportKind::correlation:
            spec.title = "Max phase deviation vs lag";
            spec.x_label = "lag n (pulses)";
            spec.y_label = "max deviation (rad)";
            for (const auto& r : reports)
                spec.series.push_back(
                    read_two_column_series(r, "n,max_deviation_rad"));
            break;
        case ReportKind::visibility:
            spec.title = "Interference fringe scan";
            spec.x_label = "delta phi (rad)";
            spec.y_label = "intensity";
            for (const auto& r : reports) {
                auto s = read_two_column_series(r, "delta_phi_rad,intensity");
                s.line = false;
                spec.series.push_back(std::move(s));
            }
            break;
        case ReportKind::drift:
            spec.title = "Polarization drift";
            spec.x_label = "time (s)";
            spec.y_label = "angular distance (rad)";
            for (const auto& r : reports)
                spec.series.push_back(
                    read_two_column_series(r, "timestamp_s"));
            break;
        case ReportKind::spacing:
            spec.title = "Normalized intensity vs spacing";
            spec.x_label = "spacing l (ns)";
            spec.y_label = "normalized mean intensity";
            for (const auto& r : reports) {
                std::ifstream in(r);
                std::string line;
                svgplot::Series s;
                s.label = fs::path(r).stem().string();
                std::getline(in, line); // header
                while (std::getline(in, line)) {
                    std::stringstream ss(line);
                    std::string f[5];
                    for (auto& v : f) std::getline(ss, v, ',');
                    s.x.push_back(std::stod(f[0]));
                    s.y.push_back(std::stod(f[3]));
                    s.yerr.push_back(0.0);
                }
                spec.series.push_back(std::move(s));
            }
            break;
        case ReportKind::unknown:
            throw std::invalid_argument("plot: unrecognized report schema: " +
                                        reports.front());
    }
    bool any = false;
    for (const auto& s : spec.series) any = any || !s.x.empty();
    if (!any) throw std::invalid_argument("plot: reports contain no data");
    svgplot::write_chart(spec, out_file);
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bandwidth-limited modulation chain simulator and "
                 "characterization toolkit"};
    app.require_subcommand(1);

    CommonOpts sim_opts, phase_opts, intensity_opts, vis_opts;
    std::string trace_dir, log_path, out_file = "chart.svg";
    std::vector<std::string> inputs;

    auto* sim = app.add_subcommand("simulate",
                                   "generate simulated trace files");
    add_common(sim, sim_opts);

    auto* ap = app.add_subcommand("analyze-phase",
                                  "phase correlation statistics");
    add_common(ap, phase_opts);
    ap->add_option("--traces", trace_dir, "directory written by simulate")
        ->required();

    auto* ai = app.add_subcommand("analyze-intensity",
                                  "intensity-by-spacing statistics");
    add_common(ai, intensity_opts);
    ai->add_option("--traces", trace_dir, "directory written by simulate")
        ->required();

    auto* dist = app.add_subcommand(
        "distinguishability", "epsilon between averaged pulse traces");
    dist->add_option("traces", inputs, "two or more trace CSV files")
        ->required();

    auto* vis = app.add_subcommand("visibility",
                                   "gain-switched source fringe scan");
    add_common(vis, vis_opts);

    auto* drift = app.add_subcommand("drift",
                                     "polarization drift from a log");
    drift->add_option("--log", log_path, "polarimeter log CSV")->required();
    drift->add_option("--out", out_file, "output report path");

    auto* plot = app.add_subcommand("plot", "render a report as SVG");
    plot->add_option("reports", inputs, "report files (one series each)")
        ->required();
    plot->add_option("--out", out_file, "output SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitValidation;
    }

    try {
        if (*sim) {
            auto cfg = resolve_config(sim_opts);
            auto chain = pipeline::build_chain(cfg, config_dir(sim_opts));
            auto run = pipeline::simulate_run(cfg, chain);
            pipeline::write_run(run, cfg, sim_opts.out_dir);
            std::cout << "wrote " << run.traces.size() << " traces to "
                      << sim_opts.out_dir << "\n";
        } else if (*ap) {
            auto cfg = resolve_config(phase_opts);
            auto run = pipeline::read_run(trace_dir);
            auto report = pipeline::analyze_phase(run, cfg);
            fs::create_directories(phase_opts.out_dir);
            const auto path =
                fs::path(phase_opts.out_dir) / "phase_report.csv";
            ingest::write_correlation_report(report, path);
            std::cout << "wrote " << path.string() << "\n";
        } else if (*ai) {
            auto cfg = resolve_config(intensity_opts);
            auto run = pipeline::read_run(trace_dir);
            auto rows = pipeline::analyze_intensity(run, cfg);
            fs::create_directories(intensity_opts.out_dir);
            const auto path =
                fs::path(intensity_opts.out_dir) / "spacing_report.csv";
            ingest::write_spacing_report(rows, path);
            std::cout << "wrote " << path.string() << "\n";
        } else if (*dist) {
            if (inputs.size() < 2)
                throw std::invalid_argument(
                    "distinguishability: need at least two traces");
            std::vector<wave::Waveform> traces;
            for (const auto& p : inputs)
                traces.push_back(ingest::read_trace_csv(p));
            for (std::size_t i = 0; i < traces.size(); ++i)
                for (std::size_t j = i + 1; j < traces.size(); ++j)
                    std::cout << fs::path(inputs[i]).stem().string() << ","
                              << fs::path(inputs[j]).stem().string() << ","
                              << ingest::format_g9(corrstats::distinguishability(
                                     traces[i], traces[j]))
                              << "\n";
        } else if (*vis) {
            auto cfg = resolve_config(vis_opts);
            auto result = pipeline::visibility_run(cfg);
            fs::create_directories(vis_opts.out_dir);
            const auto path =
                fs::path(vis_opts.out_dir) / "visibility_report.csv";
            ingest::write_visibility_report(result, path);
            std::cout << "visibility " << ingest::format_g9(result.visibility)
                      << "; wrote " << path.string() << "\n";
        } else if (*drift) {
            auto log = ingest::read_polarimeter_log(log_path);
            auto series = sourcesim::drift_series(log.entries);
            const fs::path path =
                out_file == "chart.svg" ? fs::path("drift_report.csv")
                                        : fs::path(out_file);
            ingest::write_drift_report(series, path);
            double max_theta = 0.0;
            for (const auto& p : series)
                max_theta = std::max(max_theta, p.theta_rad);
            std::cout << "max drift " << ingest::format_g9(max_theta)
                      << " rad (" << ingest::format_g9(max_theta / M_PI)
                      << " pi); wrote " << path.string() << "\n";
        } else if (*plot) {
            return cmd_plot(inputs, out_file);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
