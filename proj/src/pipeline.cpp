#include "pulsechain/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pulsechain/ingest.hpp"

namespace pulsechain::pipeline {

using nlohmann::json;

namespace {

std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::phase_characterization: return "phase_characterization";
        case RunMode::selection_characterization:
            return "selection_characterization";
        case RunMode::source_model: return "source_model";
    }
    throw std::logic_error("unknown mode");
}

RunMode mode_from_name(const std::string& s) {
    if (s == "phase_characterization") return RunMode::phase_characterization;
    if (s == "selection_characterization")
        return RunMode::selection_characterization;
    if (s == "source_model") return RunMode::source_model;
    throw std::invalid_argument("config: unknown mode '" + s + "'");
}

} // namespace

std::uint64_t RunConfig::seed_for_trace(std::size_t i) const {
    if (!seeds.empty()) {
        if (i >= seeds.size())
            throw std::invalid_argument("config: not enough seeds for run");
        return seeds[i];
    }
    return base_seed + static_cast<std::uint64_t>(i);
}

void RunConfig::validate() const {
    if (n_traces < 1)
        throw std::invalid_argument("config: n_traces must be >= 1");
    if (pattern_length < 2)
        throw std::invalid_argument("config: pattern_length must be >= 2");
    if (rep_rate_hz <= 0.0)
        throw std::invalid_argument("config: rep_rate_hz must be > 0");
    if (pulse_width_s <= 0.0 || pulse_width_s >= 1.0 / rep_rate_hz)
        throw std::invalid_argument(
            "config: pulse_width_s must lie in (0, 1/rep_rate)");
    if (mode != RunMode::source_model && stages.empty())
        throw std::invalid_argument("config: chain stage list is empty");
    if (!seeds.empty() && seeds.size() < n_traces)
        throw std::invalid_argument(
            "config: seeds list shorter than n_traces");
    if (window != "center_mean_50pct" && window != "center_sample")
        throw std::invalid_argument("config: unknown window rule " + window);
    if (n_max < 1 || l_max < 1)
        throw std::invalid_argument("config: n_max and l_max must be >= 1");
}

RunConfig config_from_json(const json& j) {
    RunConfig cfg;
    cfg.rep_rate_hz = j.value("rep_rate_hz", cfg.rep_rate_hz);
    cfg.mode = mode_from_name(j.value("mode", "phase_characterization"));
    cfg.n_traces = j.value("n_traces", cfg.n_traces);
    cfg.pattern_length = j.value("pattern_length", cfg.pattern_length);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    if (j.contains("seeds"))
        cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.pulse_width_s = j.value("pulse_width_s", cfg.pulse_width_s);
    cfg.sim_sample_rate = j.value("sim_sample_rate", cfg.sim_sample_rate);
    cfg.output_sample_rate =
        j.value("output_sample_rate", cfg.output_sample_rate);
    cfg.voltage_scale = j.value("voltage_scale", cfg.voltage_scale);
    cfg.dc_offset = j.value("dc_offset", cfg.dc_offset);

    if (j.contains("chain")) {
        const json& chain = j.at("chain");
        for (const json& js : chain.at("stages")) {
            StageSpec st;
            st.type = js.at("type").get<std::string>();
            st.order = js.value("order", st.order);
            st.cutoff_hz = js.value("cutoff_hz", st.cutoff_hz);
            st.table_path = js.value("path", st.table_path);
            st.phase_mode = js.value("phase_mode", st.phase_mode);
            st.extrapolation = js.value("extrapolation", st.extrapolation);
            st.rolloff_db_per_octave =
                js.value("rolloff_db_per_octave", st.rolloff_db_per_octave);
            st.group_delay_s = js.value("group_delay_s", st.group_delay_s);
            st.delay_s = js.value("delay_s", st.delay_s);
            cfg.stages.push_back(st);
        }
        cfg.output_sample_rate =
            chain.value("output_sample_rate", cfg.output_sample_rate);
    }

    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        cfg.n_max = a.value("n_max", cfg.n_max);
        cfg.l_max = a.value("l_max", cfg.l_max);
        cfg.dc_offset = a.value("dc_offset", cfg.dc_offset);
        cfg.window = a.value("window", cfg.window);
    }

    if (j.contains("selection")) {
        const json& s = j.at("selection");
        cfg.min_gap_ns = s.value("min_gap_ns", cfg.min_gap_ns);
        cfg.max_gap_ns = s.value("max_gap_ns", cfg.max_gap_ns);
    }

    if (j.contains("source")) {
        const json& s = j.at("source");
        cfg.gain_switch.i_min_ma =
            s.value("i_min_ma", cfg.gain_switch.i_min_ma);
        cfg.gain_switch.i_max_ma =
            s.value("i_max_ma", cfg.gain_switch.i_max_ma);
        cfg.gain_switch.i_threshold_ma =
            s.value("i_threshold_ma", cfg.gain_switch.i_threshold_ma);
        cfg.gain_switch.i_scale_ma =
            s.value("i_scale_ma", cfg.gain_switch.i_scale_ma);
        cfg.gain_switch.jitter_sigma =
            s.value("jitter_sigma", cfg.gain_switch.jitter_sigma);
        cfg.gain_switch.seed = s.value("seed", cfg.gain_switch.seed);
        cfg.n_pulses = s.value("n_pulses", cfg.n_pulses);
        cfg.imbalance_slots = s.value("imbalance_slots", cfg.imbalance_slots);
        cfg.fringe_points = s.value("fringe_points", cfg.fringe_points);
    }

    cfg.validate();
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json j;
    j["rep_rate_hz"] = cfg.rep_rate_hz;
    j["mode"] = mode_name(cfg.mode);
    j["n_traces"] = cfg.n_traces;
    j["pattern_length"] = cfg.pattern_length;
    j["base_seed"] = cfg.base_seed;
    if (!cfg.seeds.empty()) j["seeds"] = cfg.seeds;
    j["pulse_width_s"] = cfg.pulse_width_s;
    j["sim_sample_rate"] = cfg.sim_sample_rate;
    j["output_sample_rate"] = cfg.output_sample_rate;
    j["voltage_scale"] = cfg.voltage_scale;
    j["dc_offset"] = cfg.dc_offset;
    json stages = json::array();
    for (const auto& st : cfg.stages) {
        json js;
        js["type"] = st.type;
        if (st.type == "bessel") {
            js["order"] = st.order;
            js["cutoff_hz"] = st.cutoff_hz;
        } else if (st.type == "table") {
            js["path"] = st.table_path;
            js["phase_mode"] = st.phase_mode;
            js["extrapolation"] = st.extrapolation;
            js["rolloff_db_per_octave"] = st.rolloff_db_per_octave;
            js["group_delay_s"] = st.group_delay_s;
        } else if (st.type == "delay") {
            js["delay_s"] = st.delay_s;
        }
        stages.push_back(js);
    }
    j["chain"] = {{"stages", stages},
                  {"output_sample_rate", cfg.output_sample_rate}};
    j["analysis"] = {{"n_max", cfg.n_max},
                     {"l_max", cfg.l_max},
                     {"dc_offset", cfg.dc_offset},
                     {"window", cfg.window}};
    j["selection"] = {{"min_gap_ns", cfg.min_gap_ns},
                      {"max_gap_ns", cfg.max_gap_ns}};
    j["source"] = {{"i_min_ma", cfg.gain_switch.i_min_ma},
                   {"i_max_ma", cfg.gain_switch.i_max_ma},
                   {"i_threshold_ma", cfg.gain_switch.i_threshold_ma},
                   {"i_scale_ma", cfg.gain_switch.i_scale_ma},
                   {"jitter_sigma", cfg.gain_switch.jitter_sigma},
                   {"seed", cfg.gain_switch.seed},
                   {"n_pulses", cfg.n_pulses},
                   {"imbalance_slots", cfg.imbalance_slots},
                   {"fringe_points", cfg.fringe_points}};
    return j;
}

RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    json j = json::parse(in);
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override must be key=value: " + ov);
        std::string key = ov.substr(0, eq);
        const std::string value = ov.substr(eq + 1);
        std::replace(key.begin(), key.end(), '.', '/');
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value; // plain string
        }
        j[json::json_pointer("/" + key)] = parsed;
    }
    return config_from_json(j);
}

linsys::ChainConfig build_chain(const RunConfig& cfg,
                                const std::filesystem::path& base_dir) {
    linsys::ChainConfig chain;
    chain.output_sample_rate = cfg.output_sample_rate;
    for (const auto& st : cfg.stages) {
        if (st.type == "bessel") {
            chain.stages.push_back(
                linsys::FrequencyResponse::bessel(st.order, st.cutoff_hz));
        } else if (st.type == "table") {
            std::filesystem::path p = st.table_path;
            if (p.is_relative()) p = base_dir / p;
            auto table = ingest::read_response_table(p);
            const auto mode = st.phase_mode == "measured"
                                  ? linsys::PhaseMode::measured
                                  : linsys::PhaseMode::ideal_linear;
            const auto extrap =
                st.extrapolation == "hold"
                    ? linsys::Extrapolation::hold
                    : linsys::Extrapolation::rolloff_db_per_octave;
            chain.stages.push_back(linsys::FrequencyResponse::tabulated(
                std::move(table), mode, extrap, st.rolloff_db_per_octave,
                st.group_delay_s));
        } else if (st.type == "delay") {
            chain.stages.push_back(
                linsys::FrequencyResponse::ideal_delay(st.delay_s));
        } else if (st.type == "identity") {
            chain.stages.push_back(linsys::FrequencyResponse::identity());
        } else {
            throw std::invalid_argument("config: unknown stage type '" +
                                        st.type + "'");
        }
    }
    return chain;
}

SimulatedRun simulate_run(const RunConfig& cfg,
                          const linsys::ChainConfig& chain) {
    cfg.validate();

    wave::PulseTrainSpec spec;
    spec.rep_rate = cfg.rep_rate_hz;
    spec.pulse_width = cfg.pulse_width_s;
    spec.pattern_length = cfg.pattern_length;
    spec.sample_rate = cfg.sim_sample_rate;
    spec.amplitude_levels = {{wave::Symbol::S0, 0.0},
                             {wave::Symbol::S_half, 0.5},
                             {wave::Symbol::S_pi, 1.0},
                             {wave::Symbol::Off, 0.0},
                             {wave::Symbol::On, 1.0}};

    SimulatedRun run;
    run.patterns.resize(cfg.n_traces);
    run.traces.resize(cfg.n_traces);

    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0;
         i < static_cast<std::ptrdiff_t>(cfg.n_traces); ++i) {
        try {
            const std::uint64_t seed = cfg.seed_for_trace(i);
            wave::NominalPattern pattern;
            if (cfg.mode == RunMode::selection_characterization) {
                pattern = wave::random_spacing_pattern(
                    seed, cfg.pattern_length, cfg.min_gap_ns, cfg.max_gap_ns);
            } else {
                pattern = wave::random_pattern(
                    seed,
                    {wave::Symbol::S0, wave::Symbol::S_half,
                     wave::Symbol::S_pi},
                    cfg.pattern_length);
            }
            wave::Waveform drive = wave::make_pulse_train(spec, pattern);
            wave::Waveform out = linsys::simulate_chain(drive, chain);
            // The normalized chain output is proportional to applied phase
            // (1 -> pi); the photodiode sees the IM's sinusoidal transfer.
            for (double& v : out.samples) {
                const double s = std::sin(v * M_PI / 2.0);
                v = cfg.voltage_scale * s * s + cfg.dc_offset;
            }
            run.patterns[i] = std::move(pattern);
            run.traces[i] = std::move(out);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return run;
}

std::string tool_version() { return "0.1.0"; }

void write_run(const SimulatedRun& run, const RunConfig& cfg,
               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    char name[64];
    for (std::size_t i = 0; i < run.traces.size(); ++i) {
        std::snprintf(name, sizeof(name), "trace_%04zu.csv", i);
        ingest::write_trace_csv(run.traces[i], out_dir / name, "voltage_mv");
        std::snprintf(name, sizeof(name), "pattern_%04zu.txt", i);
        ingest::write_pattern(run.patterns[i], out_dir / name);
    }
    json manifest;
    manifest["tool_version"] = tool_version();
    manifest["config"] = config_to_json(cfg);
    manifest["n_traces"] = run.traces.size();
    json seeds = json::array();
    for (std::size_t i = 0; i < run.traces.size(); ++i)
        seeds.push_back(cfg.seed_for_trace(i));
    manifest["seeds"] = seeds;
    std::ofstream out(out_dir / "manifest.json");
    if (!out)
        throw std::runtime_error("cannot write manifest in " +
                                 out_dir.string());
    out << manifest.dump(2) << "\n";
}

SimulatedRun read_run(const std::filesystem::path& dir) {
    SimulatedRun run;
    char name[64];
    for (std::size_t i = 0;; ++i) {
        std::snprintf(name, sizeof(name), "trace_%04zu.csv", i);
        const auto trace_path = dir / name;
        if (!std::filesystem::exists(trace_path)) break;
        std::snprintf(name, sizeof(name), "pattern_%04zu.txt", i);
        const auto pattern_path = dir / name;
        if (!std::filesystem::exists(pattern_path))
            throw std::runtime_error("missing pattern metadata for trace " +
                                     std::to_string(i));
        run.traces.push_back(ingest::read_trace_csv(trace_path));
        run.patterns.push_back(ingest::read_pattern(pattern_path));
    }
    if (run.traces.empty())
        throw std::runtime_error("no traces found in " + dir.string());
    return run;
}

corrstats::CorrelationReport analyze_phase(const SimulatedRun& run,
                                           const RunConfig& cfg) {
    auto ctx = phasemap::make_normalization_context(run.traces, cfg.dc_offset);
    auto normalized = phasemap::normalize_traces(run.traces, ctx);

    const auto window = cfg.window == "center_sample"
                            ? phasemap::PhaseWindow::center_sample
                            : phasemap::PhaseWindow::center_mean_50pct;
    corrstats::RecordBatch batch(normalized.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0;
         i < static_cast<std::ptrdiff_t>(normalized.size()); ++i) {
        try {
            wave::Waveform phase_trace =
                phasemap::intensity_trace_to_phase(normalized[i]);
            phasemap::SlotGrid grid;
            grid.rep_rate = cfg.rep_rate_hz;
            grid.pulse_width = cfg.pulse_width_s;
            batch[i] = phasemap::extract_pulse_phases(
                phase_trace, run.patterns[i], grid, window);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    corrstats::CorrelationReport report;
    report.per_case = corrstats::phase_case_stats(batch, cfg.n_max);
    corrstats::phase_deviation(report.per_case, report.deviation,
                               report.max_deviation_per_n);
    return report;
}

std::vector<corrstats::SpacingRow> analyze_intensity(const SimulatedRun& run,
                                                     const RunConfig& cfg) {
    corrstats::RecordBatch batch(run.traces.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0;
         i < static_cast<std::ptrdiff_t>(run.traces.size()); ++i) {
        try {
            phasemap::SlotGrid grid;
            grid.rep_rate = cfg.rep_rate_hz;
            grid.pulse_width = cfg.pulse_width_s;
            batch[i] = phasemap::extract_pulse_peaks(run.traces[i],
                                                     run.patterns[i], grid);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return corrstats::intensity_by_spacing(batch, cfg.l_max);
}

sourcesim::VisibilityResult visibility_run(const RunConfig& cfg) {
    auto phases =
        sourcesim::gain_switched_phases(cfg.gain_switch, cfg.n_pulses);
    std::vector<double> intensities(cfg.n_pulses, 1.0);
    std::vector<double> grid(cfg.fringe_points);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = 2.0 * M_PI * static_cast<double>(i) /
                  static_cast<double>(grid.size() - 1);
    return sourcesim::fringe_scan(phases, intensities, grid,
                                  cfg.imbalance_slots);
}

} // namespace pulsechain::pipeline
