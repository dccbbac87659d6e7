#include "pulsechain/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pulsechain::ingest {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path,
                             std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                             ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path,
                    std::size_t line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        parse_fail(path, line_no, "cannot parse number '" + s + "'");
    }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

std::ofstream create_or_throw(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

} // namespace

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

wave::Waveform read_trace_csv(const std::filesystem::path& path,
                              const TraceSchema& schema) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> times, values;
    const int max_col = std::max(schema.time_col, schema.value_col);
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) continue; // header
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) <= max_col)
            parse_fail(path, line_no, "too few columns");
        times.push_back(parse_double(fields[schema.time_col], path, line_no));
        values.push_back(
            parse_double(fields[schema.value_col], path, line_no));
    }
    if (times.size() < 2)
        throw std::runtime_error(path.string() +
                                 ": need at least 2 data rows");

    std::vector<double> steps(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i)
        steps[i - 1] = times[i] - times[i - 1];
    std::vector<double> sorted = steps;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    if (median <= 0.0)
        throw std::runtime_error(path.string() +
                                 ": time column not increasing");
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (std::abs(steps[i] - median) > 1e-3 * median)
            parse_fail(path, i + 3, "non-uniform sampling beyond 0.1%");

    wave::Waveform wf;
    wf.samples = std::move(values);
    wf.sample_rate = 1.0 / median;
    wf.t0 = times.front();
    wave::validate(wf);
    return wf;
}

void write_trace_csv(const wave::Waveform& wf,
                     const std::filesystem::path& path,
                     const std::string& value_name) {
    wave::validate(wf);
    std::ofstream out = create_or_throw(path);
    out << "time_s," << value_name << "\n";
    for (std::size_t i = 0; i < wf.samples.size(); ++i)
        out << format_g9(wf.time_at(i)) << ',' << format_g9(wf.samples[i])
            << "\n";
}

std::vector<linsys::TablePoint> read_response_table(
    const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<linsys::TablePoint> table;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty() || line[0] == '#') continue;
        auto fields = split_csv(line);
        if (fields.size() < 2 || fields.size() > 3)
            parse_fail(path, line_no, "expected f_hz,mag_db[,phase_deg]");
        linsys::TablePoint pt;
        pt.f_hz = parse_double(fields[0], path, line_no);
        pt.mag_db = parse_double(fields[1], path, line_no);
        if (fields.size() == 3)
            pt.phase_deg = parse_double(fields[2], path, line_no);
        if (!table.empty() && pt.f_hz <= table.back().f_hz)
            parse_fail(path, line_no,
                       "frequencies must be strictly ascending");
        table.push_back(pt);
    }
    if (table.size() < 2)
        throw std::runtime_error(path.string() +
                                 ": need at least 2 table rows");
    return table;
}

PolarimeterLog read_polarimeter_log(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    PolarimeterLog log;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty() || line[0] == '#') continue;
        auto fields = split_csv(line);
        if (fields.size() != 4)
            parse_fail(path, line_no, "expected timestamp_s,s1,s2,s3");
        sourcesim::TimedStokes entry;
        entry.timestamp_s = parse_double(fields[0], path, line_no);
        entry.s.s1 = parse_double(fields[1], path, line_no);
        entry.s.s2 = parse_double(fields[2], path, line_no);
        entry.s.s3 = parse_double(fields[3], path, line_no);
        const double norm = std::sqrt(entry.s.s1 * entry.s.s1 +
                                      entry.s.s2 * entry.s.s2 +
                                      entry.s.s3 * entry.s.s3);
        if (std::abs(norm - 1.0) > 1e-3)
            parse_fail(path, line_no, "Stokes norm deviates beyond 1e-3");
        if (norm != 1.0) {
            entry.s.s1 /= norm;
            entry.s.s2 /= norm;
            entry.s.s3 /= norm;
            if (std::abs(norm - 1.0) > 1e-12) ++log.renormalized_count;
        }
        log.entries.push_back(entry);
    }
    if (log.entries.empty())
        throw std::runtime_error(path.string() + ": empty polarimeter log");
    return log;
}

void write_pattern(const wave::NominalPattern& pattern,
                   const std::filesystem::path& path) {
    std::ofstream out = create_or_throw(path);
    out << "# seed " << pattern.seed << "\n";
    for (wave::Symbol s : pattern.symbols) out << wave::symbol_name(s) << "\n";
}

wave::NominalPattern read_pattern(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    wave::NominalPattern pat;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::stringstream ss(line.substr(1));
            std::string word;
            ss >> word;
            if (word == "seed") ss >> pat.seed;
            continue;
        }
        try {
            pat.symbols.push_back(wave::symbol_from_name(line));
        } catch (const std::exception& e) {
            parse_fail(path, line_no, e.what());
        }
    }
    if (pat.symbols.empty())
        throw std::runtime_error(path.string() + ": empty pattern file");
    return pat;
}

void write_correlation_report(const corrstats::CorrelationReport& report,
                              const std::filesystem::path& path) {
    std::ofstream out = create_or_throw(path);
    out << "# per-case phase statistics\n";
    out << "n,prev,cur,mean_phi_rad,std_phi_rad,count,deviation_rad\n";
    std::vector<corrstats::CaseStats> cases = report.per_case;
    std::sort(cases.begin(), cases.end(),
              [](const auto& a, const auto& b) { return a.key < b.key; });
    for (const auto& st : cases) {
        out << st.key.lag_n << ','
            << wave::symbol_name(st.key.prev_nominal) << ','
            << wave::symbol_name(st.key.cur_nominal) << ','
            << format_g9(st.mean_phi) << ',' << format_g9(st.std_phi) << ','
            << st.count << ',';
        auto it = report.deviation.find(st.key);
        out << (it != report.deviation.end() ? format_g9(it->second) : "nan")
            << "\n";
    }
    out << "# max deviation per lag\n";
    out << "n,max_deviation_rad\n";
    for (const auto& [n, v] : report.max_deviation_per_n)
        out << n << ',' << format_g9(v) << "\n";
    if (!report.intensity_by_spacing.empty()) {
        out << "# intensity by spacing\n";
        out << "l_ns,mean,std,normalized_mean,count\n";
        for (const auto& row : report.intensity_by_spacing)
            out << row.l_ns << ',' << format_g9(row.mean) << ','
                << format_g9(row.std) << ',' << format_g9(row.normalized_mean)
                << ',' << row.count << "\n";
    }
    if (!report.epsilon_pairs.empty()) {
        out << "# pairwise distinguishability\n";
        out << "group_a,group_b,epsilon\n";
        for (const auto& [pair, eps] : report.epsilon_pairs)
            out << pair.first << ',' << pair.second << ','
                << format_g9(eps) << "\n";
    }
}

void write_spacing_report(const std::vector<corrstats::SpacingRow>& rows,
                          const std::filesystem::path& path) {
    std::ofstream out = create_or_throw(path);
    out << "l_ns,mean,std,normalized_mean,count\n";
    for (const auto& row : rows)
        out << row.l_ns << ',' << format_g9(row.mean) << ','
            << format_g9(row.std) << ',' << format_g9(row.normalized_mean)
            << ',' << row.count << "\n";
}

void write_visibility_report(const sourcesim::VisibilityResult& result,
                             const std::filesystem::path& path) {
    std::ofstream out = create_or_throw(path);
    out << "# visibility " << format_g9(result.visibility) << " i_max "
        << format_g9(result.i_max_obs) << " i_min "
        << format_g9(result.i_min_obs) << "\n";
    out << "delta_phi_rad,intensity\n";
    for (std::size_t i = 0; i < result.delta_phi_grid.size(); ++i)
        out << format_g9(result.delta_phi_grid[i]) << ','
            << format_g9(result.intensity[i]) << "\n";
}

void write_drift_report(const std::vector<sourcesim::DriftPoint>& series,
                        const std::filesystem::path& path) {
    std::ofstream out = create_or_throw(path);
    out << "timestamp_s,theta_rad\n";
    for (const auto& p : series)
        out << format_g9(p.timestamp_s) << ',' << format_g9(p.theta_rad)
            << "\n";
}

} // namespace pulsechain::ingest
