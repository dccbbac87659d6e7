#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "pulsechain/ingest.hpp"
#include "pulsechain/rng.hpp"

using namespace pulsechain;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "pulsechain_ingest_tests";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("read_trace_csv") {
    auto dir = temp_dir();

    SUBCASE("two-row file gives 40 GSa/s") {
        const auto p = dir / "two_row.csv";
        write_file(p, "time_s,voltage\n0,0\n2.5e-11,1\n");
        auto wf = ingest::read_trace_csv(p);
        CHECK(wf.sample_rate == doctest::Approx(40e9));
        CHECK(wf.samples == std::vector<double>{0.0, 1.0});
    }

    SUBCASE("header-only file is a parse error") {
        const auto p = dir / "header_only.csv";
        write_file(p, "time_s,voltage\n");
        CHECK_THROWS(ingest::read_trace_csv(p));
    }

    SUBCASE("non-uniform sampling rejected with line info") {
        const auto p = dir / "jitter.csv";
        write_file(p, "t,v\n0,0\n1e-9,1\n2.5e-9,2\n");
        CHECK_THROWS_WITH_AS(ingest::read_trace_csv(p),
                             doctest::Contains("non-uniform"),
                             std::runtime_error);
    }

    SUBCASE("garbage field names the line") {
        const auto p = dir / "garbage.csv";
        write_file(p, "t,v\n0,0\n1e-9,oops\n");
        CHECK_THROWS_WITH_AS(ingest::read_trace_csv(p),
                             doctest::Contains(":3"), std::runtime_error);
    }
}

TEST_CASE("trace write/read round trip") {
    auto dir = temp_dir();
    wave::Waveform wf;
    wf.sample_rate = 40e9;
    wf.t0 = 0.0;
    SplitMix64 rng(123);
    wf.samples.resize(500);
    for (double& v : wf.samples) v = rng.next_double() * 2.66;

    const auto p = dir / "round_trip.csv";
    ingest::write_trace_csv(wf, p);
    auto back = ingest::read_trace_csv(p);
    CHECK(back.sample_rate == doctest::Approx(wf.sample_rate).epsilon(1e-6));
    REQUIRE(back.samples.size() == wf.samples.size());
    for (std::size_t i = 0; i < wf.samples.size(); ++i)
        CHECK(back.samples[i] ==
              doctest::Approx(wf.samples[i]).epsilon(1e-8));

    // a second read of a re-written file is a fixed point
    const auto p2 = dir / "round_trip2.csv";
    ingest::write_trace_csv(back, p2);
    auto again = ingest::read_trace_csv(p2);
    CHECK(again.samples == back.samples);
}

TEST_CASE("read_response_table") {
    auto dir = temp_dir();

    SUBCASE("flat table loads") {
        const auto p = dir / "flat.csv";
        write_file(p, "f_hz,mag_db\n1e6,0\n50e9,0\n");
        auto table = ingest::read_response_table(p);
        REQUIRE(table.size() == 2);
        CHECK(table[0].mag_db == 0.0);
        CHECK(table[1].f_hz == doctest::Approx(50e9));
    }

    SUBCASE("out-of-order rows error names the line") {
        const auto p = dir / "unsorted.csv";
        write_file(p, "f_hz,mag_db\n1e9,0\n5e8,-1\n");
        CHECK_THROWS_WITH_AS(ingest::read_response_table(p),
                             doctest::Contains(":3"), std::runtime_error);
    }

    SUBCASE("duplicate frequency rejected") {
        const auto p = dir / "dup.csv";
        write_file(p, "f_hz,mag_db\n1e9,0\n1e9,-1\n");
        CHECK_THROWS(ingest::read_response_table(p));
    }

    SUBCASE("phase column parsed when present") {
        const auto p = dir / "phased.csv";
        write_file(p, "f_hz,mag_db,phase_deg\n1e9,0,-5\n2e9,-1,-11\n");
        auto table = ingest::read_response_table(p);
        CHECK(table[1].phase_deg == doctest::Approx(-11.0));
    }
}

TEST_CASE("shipped amplifier fixture hits -3 dB at 12 GHz") {
    const fs::path fixture =
        fs::path(PULSECHAIN_SOURCE_DIR) / "fixtures" / "rf_amp_12ghz.csv";
    auto table = ingest::read_response_table(fixture);
    auto resp = linsys::FrequencyResponse::tabulated(
        table, linsys::PhaseMode::measured);
    const double mag_db = 20.0 * std::log10(std::abs(resp.eval(12e9)));
    CHECK(mag_db == doctest::Approx(-3.0).epsilon(0.05));
    // low-frequency gain droop (the amp's pattern-effect memory) stays
    // within 3 dB; the GHz-range passband is flat to 0.5 dB
    for (double f : {1e6, 1e8}) {
        const double lf_db = 20.0 * std::log10(std::abs(resp.eval(f)));
        CHECK(lf_db < 0.0);
        CHECK(lf_db > -3.0);
    }
    for (double f : {1e9, 2e9})
        CHECK(std::abs(20.0 * std::log10(std::abs(resp.eval(f)))) < 0.5);
}

TEST_CASE("shipped IM fixture hits -3 dB at 15 GHz") {
    const fs::path fixture =
        fs::path(PULSECHAIN_SOURCE_DIR) / "fixtures" / "im_15ghz.csv";
    auto table = ingest::read_response_table(fixture);
    auto resp = linsys::FrequencyResponse::tabulated(
        table, linsys::PhaseMode::ideal_linear);
    const double mag_db = 20.0 * std::log10(std::abs(resp.eval(15e9)));
    CHECK(mag_db == doctest::Approx(-3.0).epsilon(0.05));
}

TEST_CASE("read_polarimeter_log") {
    auto dir = temp_dir();

    SUBCASE("121-row minute log loads") {
        const auto p = dir / "drift.csv";
        std::ofstream out(p);
        out << "timestamp_s,s1,s2,s3\n";
        for (int i = 0; i <= 120; ++i)
            out << 60 * i << ",1,0,0\n";
        out.close();
        auto log = ingest::read_polarimeter_log(p);
        CHECK(log.entries.size() == 121);
        CHECK(log.renormalized_count == 0);
    }

    SUBCASE("norm 0.5 rejected") {
        const auto p = dir / "bad_norm.csv";
        write_file(p, "timestamp_s,s1,s2,s3\n0,0.5,0,0\n");
        CHECK_THROWS(ingest::read_polarimeter_log(p));
    }

    SUBCASE("norm 1.0005 renormalized and counted") {
        const auto p = dir / "near_norm.csv";
        write_file(p, "timestamp_s,s1,s2,s3\n0,1.0005,0,0\n");
        auto log = ingest::read_polarimeter_log(p);
        CHECK(log.renormalized_count == 1);
        CHECK(log.entries[0].s.s1 == doctest::Approx(1.0));
    }
}

TEST_CASE("pattern file round trip") {
    auto dir = temp_dir();
    auto pat = wave::random_pattern(
        9, {wave::Symbol::S0, wave::Symbol::S_half, wave::Symbol::S_pi}, 50);
    const auto p = dir / "pattern.txt";
    ingest::write_pattern(pat, p);
    auto back = ingest::read_pattern(p);
    CHECK(back.symbols == pat.symbols);
    CHECK(back.seed == pat.seed);
}

TEST_CASE("report writers are deterministic") {
    auto dir = temp_dir();
    corrstats::CorrelationReport report;
    corrstats::CaseStats st;
    st.key = {1, wave::Symbol::S_pi, wave::Symbol::S_pi};
    st.mean_phi = 3.14;
    st.std_phi = 0.01;
    st.count = 42;
    report.per_case = {st};
    report.deviation[st.key] = 0.007;
    report.max_deviation_per_n[1] = 0.007;
    corrstats::SpacingRow row;
    row.l_ns = 1;
    row.mean = 2.65;
    row.std = 0.04;
    row.normalized_mean = 0.996;
    row.count = 354;
    report.intensity_by_spacing = {row};

    const auto p1 = dir / "report1.csv";
    const auto p2 = dir / "report2.csv";
    ingest::write_correlation_report(report, p1);
    ingest::write_correlation_report(report, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(slurp(p1).find("0.996") != std::string::npos);

    std::vector<corrstats::SpacingRow> rows(7);
    for (int l = 1; l <= 7; ++l) {
        rows[l - 1].l_ns = l;
        rows[l - 1].mean = 2.66;
        rows[l - 1].normalized_mean = 1.0;
        rows[l - 1].count = 300;
    }
    const auto sp = dir / "spacing.csv";
    ingest::write_spacing_report(rows, sp);
    // 7 data rows + header
    const std::string text = slurp(sp);
    CHECK(std::count(text.begin(), text.end(), '\n') == 8);
}
