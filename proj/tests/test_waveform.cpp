#include <doctest.h>

#include <cmath>
#include <set>

#include "pulsechain/waveform.hpp"

using namespace pulsechain;
using wave::Symbol;

TEST_CASE("random_pattern is deterministic for a fixed seed") {
    const std::vector<Symbol> abc{Symbol::S0, Symbol::S_half, Symbol::S_pi};
    auto a = wave::random_pattern(7, abc, 100);
    auto b = wave::random_pattern(7, abc, 100);
    REQUIRE(a.symbols.size() == 100);
    CHECK(a.symbols == b.symbols);
    CHECK(a.seed == 7);

    auto c = wave::random_pattern(8, abc, 100);
    CHECK(a.symbols != c.symbols);
}

TEST_CASE("random_pattern respects weights") {
    auto pat = wave::random_pattern(7, {Symbol::On, Symbol::Off}, 100000,
                                    {1.0 / 3.0, 2.0 / 3.0});
    std::size_t on = 0;
    for (auto s : pat.symbols)
        if (s == Symbol::On) ++on;
    const double p = 1.0 / 3.0;
    const double sigma = std::sqrt(p * (1 - p) / 100000.0);
    CHECK(std::abs(static_cast<double>(on) / 100000.0 - p) < 5.0 * sigma);
}

TEST_CASE("random_pattern degenerate alphabet") {
    auto pat = wave::random_pattern(42, {Symbol::S_pi}, 10);
    REQUIRE(pat.symbols.size() == 10);
    for (auto s : pat.symbols) CHECK(s == Symbol::S_pi);
}

TEST_CASE("random_pattern rejects bad input") {
    CHECK_THROWS_AS(wave::random_pattern(1, {}, 5), std::invalid_argument);
    CHECK_THROWS_AS(
        wave::random_pattern(1, {Symbol::On, Symbol::Off}, 5, {-0.5, 1.5}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        wave::random_pattern(1, {Symbol::On, Symbol::Off}, 5, {0.3, 0.3}),
        std::invalid_argument);
}

TEST_CASE("make_pulse_train basics") {
    wave::PulseTrainSpec spec;
    spec.rep_rate = 1e9;
    spec.pulse_width = 200e-12;
    spec.pattern_length = 4;
    spec.sample_rate = 100e9;
    spec.amplitude_levels = {{Symbol::S0, 0.0}, {Symbol::S_pi, 1.0}};

    SUBCASE("all-zero level gives the zero waveform") {
        wave::NominalPattern pat;
        pat.symbols.assign(4, Symbol::S0);
        auto wf = wave::make_pulse_train(spec, pat);
        REQUIRE(wf.samples.size() == 400);
        for (double v : wf.samples) CHECK(v == 0.0);
    }

    SUBCASE("200 ps at 100 GSa/s occupies exactly 20 samples") {
        wave::NominalPattern pat;
        pat.symbols = {Symbol::S0, Symbol::S_pi, Symbol::S0, Symbol::S0};
        auto wf = wave::make_pulse_train(spec, pat);
        std::size_t ones = 0;
        for (double v : wf.samples) {
            CHECK((v == 0.0 || v == 1.0));
            if (v == 1.0) ++ones;
        }
        CHECK(ones == 20);
        // contiguous and centered within slot 1
        std::size_t first = 0;
        while (wf.samples[first] == 0.0) ++first;
        CHECK(first >= 100);
        CHECK(first + 20 <= 200);
        for (std::size_t i = first; i < first + 20; ++i)
            CHECK(wf.samples[i] == 1.0);
    }

    SUBCASE("missing symbol level throws") {
        wave::NominalPattern pat;
        pat.symbols = {Symbol::S0, Symbol::S_half, Symbol::S0, Symbol::S0};
        CHECK_THROWS_AS(wave::make_pulse_train(spec, pat),
                        std::invalid_argument);
    }

    SUBCASE("linearity in amplitude levels") {
        wave::NominalPattern pat;
        pat.symbols = {Symbol::S_pi, Symbol::S0, Symbol::S_pi, Symbol::S_pi};
        auto wf1 = wave::make_pulse_train(spec, pat);
        auto spec2 = spec;
        for (auto& [k, v] : spec2.amplitude_levels) v *= 2.5;
        auto wf2 = wave::make_pulse_train(spec2, pat);
        REQUIRE(wf1.samples.size() == wf2.samples.size());
        for (std::size_t i = 0; i < wf1.samples.size(); ++i)
            CHECK(wf2.samples[i] == doctest::Approx(2.5 * wf1.samples[i]));
    }
}

TEST_CASE("pulse train spec validation") {
    wave::PulseTrainSpec spec;
    spec.rep_rate = 1e9;
    spec.pulse_width = 1.5e-9; // wider than the slot
    spec.pattern_length = 4;
    spec.sample_rate = 100e9;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.pulse_width = 200e-12;
    spec.sample_rate = 5e9; // under-resolved
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("random_spacing_pattern draws gaps in range") {
    auto pat = wave::random_spacing_pattern(3, 10000, 1, 7);
    REQUIRE(pat.symbols.size() == 10000);
    CHECK(pat.symbols[0] == Symbol::On);
    std::size_t prev = 0;
    std::set<std::size_t> gaps;
    for (std::size_t i = 1; i < pat.symbols.size(); ++i) {
        if (pat.symbols[i] != Symbol::On) continue;
        gaps.insert(i - prev);
        prev = i;
    }
    for (std::size_t g : gaps) {
        CHECK(g >= 1);
        CHECK(g <= 7);
    }
    CHECK(gaps.size() == 7); // all spacings occur in a 10k-slot run
}

TEST_CASE("resample decimation") {
    wave::Waveform wf;
    wf.sample_rate = 80e9;
    wf.samples = {1, 2, 3, 4};

    SUBCASE("factor 2") {
        auto out = wave::resample(wf, 40e9);
        CHECK(out.samples == std::vector<double>{1, 3});
        CHECK(out.sample_rate == doctest::Approx(40e9));
    }
    SUBCASE("identity") {
        auto out = wave::resample(wf, 80e9);
        CHECK(out.samples == wf.samples);
    }
    SUBCASE("idempotent at the same rate") {
        auto once = wave::resample(wf, 40e9);
        auto twice = wave::resample(once, 40e9);
        CHECK(once.samples == twice.samples);
    }
    SUBCASE("non-integer ratio rejected") {
        CHECK_THROWS_AS(wave::resample(wf, 30e9), std::invalid_argument);
    }
    SUBCASE("factor 3 divides the length") {
        wave::Waveform w3;
        w3.sample_rate = 120e9;
        w3.samples.assign(1200, 1.0);
        auto out = wave::resample(w3, 40e9);
        CHECK(out.samples.size() == 400);
    }
}

TEST_CASE("waveform validation") {
    wave::Waveform wf;
    wf.sample_rate = 1e9;
    CHECK_THROWS_AS(wave::validate(wf), std::invalid_argument);
    wf.samples = {0.0, std::nan("")};
    CHECK_THROWS_AS(wave::validate(wf), std::invalid_argument);
}
