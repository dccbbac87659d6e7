#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "pulsechain/linsys.hpp"
#include "pulsechain/rng.hpp"

using namespace pulsechain;
using linsys::FrequencyResponse;

namespace {

// Independent Bessel oracle: published reverse Bessel polynomial
// coefficients (ascending powers), renormalized to -3 dB at the cutoff
// by bisection. Checks the library's recurrence-built prototype.
const std::vector<std::vector<double>> kPublishedBessel = {
    {1, 1},
    {3, 3, 1},
    {15, 15, 6, 1},
    {105, 105, 45, 10, 1},
    {945, 945, 420, 105, 15, 1},
    {10395, 10395, 4725, 1260, 210, 21, 1},
};

std::complex<double> oracle_eval(int order, double f, double cutoff) {
    const auto& c = kPublishedBessel[order - 1];
    auto mag = [&](double w) {
        std::complex<double> s(0.0, w);
        std::complex<double> acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * s + c[k];
        return c[0] / acc;
    };
    double lo = 0.0, hi = 1.0;
    while (std::abs(mag(hi)) > M_SQRT1_2) hi *= 2.0;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (std::abs(mag(mid)) > M_SQRT1_2 ? lo : hi) = mid;
    }
    return mag(0.5 * (lo + hi) * f / cutoff);
}

wave::Waveform random_waveform(std::size_t n, double fs, std::uint64_t seed) {
    wave::Waveform wf;
    wf.sample_rate = fs;
    wf.samples.resize(n);
    SplitMix64 rng(seed);
    for (double& v : wf.samples) v = rng.next_double() - 0.5;
    return wf;
}

// Impulse response sampled by exciting the filter with a unit impulse.
std::vector<double> sampled_impulse_response(const FrequencyResponse& resp,
                                             std::size_t n, double fs) {
    wave::Waveform delta;
    delta.sample_rate = fs;
    delta.samples.assign(n, 0.0);
    delta.samples[0] = 1.0;
    return linsys::apply_response(delta, resp).samples;
}

// Sampling H(f) leaves a small negative-time tail in the impulse
// response; the exact oracle needs both sides. Taps k in [-(n-1), n-1]:
// causal side from a delta at 0, acausal side from a delta at n-1.
struct TwoSidedIr {
    std::vector<double> pos; // pos[k] = h(k), k >= 0
    std::vector<double> neg; // neg[k] = h(k - (n-1)), so neg.back() = h(0)
};

TwoSidedIr two_sided_impulse_response(const FrequencyResponse& resp,
                                      std::size_t n, double fs) {
    TwoSidedIr ir;
    ir.pos = sampled_impulse_response(resp, n, fs);
    wave::Waveform late;
    late.sample_rate = fs;
    late.samples.assign(n, 0.0);
    late.samples[n - 1] = 1.0;
    ir.neg = linsys::apply_response(late, resp).samples;
    return ir;
}

std::vector<double> convolve_two_sided(const std::vector<double>& x,
                                       const TwoSidedIr& ir) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    std::vector<double> y(x.size(), 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            const std::ptrdiff_t k = i - j;
            if (k >= 0)
                acc += ir.pos[static_cast<std::size_t>(k)] * x[j];
            else
                acc += ir.neg[static_cast<std::size_t>(n - 1 + k)] * x[j];
        }
        y[i] = acc;
    }
    return y;
}

} // namespace

TEST_CASE("bessel DC gain is unity for all supported orders") {
    for (int order = 1; order <= 10; ++order) {
        auto h = FrequencyResponse::bessel(order, 10e9);
        CHECK(std::abs(h.eval(0.0)) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("bessel magnitude matches the published-coefficient oracle") {
    for (int order = 1; order <= 6; ++order) {
        auto h = FrequencyResponse::bessel(order, 25e9);
        CHECK(std::abs(h.eval(25e9)) ==
              doctest::Approx(0.70711).epsilon(1e-4));
        for (double f : {1e9, 5e9, 12.5e9, 25e9, 60e9}) {
            const auto expected = oracle_eval(order, f, 25e9);
            const auto got = h.eval(f);
            CHECK(std::abs(got - expected) < 1e-9);
        }
    }
}

TEST_CASE("bessel magnitude is monotone non-increasing up to 100 GHz") {
    for (int order : {1, 2, 4, 6}) {
        auto h = FrequencyResponse::bessel(order, 25e9);
        double prev = std::abs(h.eval(0.0));
        for (double f = 0.5e9; f <= 100e9; f += 0.5e9) {
            const double mag = std::abs(h.eval(f));
            CHECK(mag <= prev + 1e-12);
            prev = mag;
        }
    }
}

TEST_CASE("bessel rejects unsupported orders") {
    CHECK_THROWS_AS(FrequencyResponse::bessel(0, 1e9), std::invalid_argument);
    CHECK_THROWS_AS(FrequencyResponse::bessel(11, 1e9),
                    std::invalid_argument);
    CHECK_THROWS_AS(FrequencyResponse::bessel(4, -1.0),
                    std::invalid_argument);
}

TEST_CASE("tabulated response interpolation") {
    std::vector<linsys::TablePoint> table = {
        {1e9, 0.0, 0.0}, {4e9, -1.0, -10.0}, {16e9, -6.0, -45.0}};

    SUBCASE("query at a knot returns the tabled value") {
        auto h = FrequencyResponse::tabulated(table,
                                              linsys::PhaseMode::measured);
        CHECK(std::abs(h.eval(4e9)) ==
              doctest::Approx(std::pow(10.0, -1.0 / 20.0)).epsilon(1e-12));
        CHECK(std::arg(h.eval(4e9)) ==
              doctest::Approx(-10.0 * M_PI / 180.0).epsilon(1e-12));
    }

    SUBCASE("log-frequency midpoint interpolates dB linearly") {
        auto h = FrequencyResponse::tabulated(table,
                                              linsys::PhaseMode::measured);
        // geometric mean of 4 and 16 GHz lies halfway in log-f
        CHECK(20.0 * std::log10(std::abs(h.eval(8e9))) ==
              doctest::Approx(-3.5).epsilon(1e-9));
    }

    SUBCASE("flat two-point table is identity magnitude") {
        auto h = FrequencyResponse::tabulated(
            {{1e3, 0.0, 0.0}, {100e9, 0.0, 0.0}},
            linsys::PhaseMode::ideal_linear, linsys::Extrapolation::hold);
        for (double f : {0.0, 1e6, 5e9, 50e9, 200e9})
            CHECK(std::abs(h.eval(f)) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("bad tables rejected") {
        CHECK_THROWS_AS(FrequencyResponse::tabulated(
                            {{1e9, 0.0, 0.0}}, linsys::PhaseMode::measured),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            FrequencyResponse::tabulated({{4e9, 0.0, 0.0}, {1e9, -3.0, 0.0}},
                                         linsys::PhaseMode::measured),
            std::invalid_argument);
    }

    SUBCASE("rolloff extrapolation above the last knot") {
        auto h = FrequencyResponse::tabulated(
            table, linsys::PhaseMode::measured,
            linsys::Extrapolation::rolloff_db_per_octave, -6.0);
        CHECK(20.0 * std::log10(std::abs(h.eval(32e9))) ==
              doctest::Approx(-12.0).epsilon(1e-9));
    }
}

TEST_CASE("flat magnitude with ideal linear phase is a pure delay") {
    const double fs = 120e9;
    const double tau = 10.0 / fs; // 10 samples
    auto h = FrequencyResponse::tabulated(
        {{1e3, 0.0, 0.0}, {100e9, 0.0, 0.0}},
        linsys::PhaseMode::ideal_linear, linsys::Extrapolation::hold, -6.0,
        tau);
    auto wf = random_waveform(2048, fs, 99);
    auto out = linsys::apply_response(wf, h);
    for (std::size_t i = 10; i < wf.samples.size(); ++i)
        CHECK(out.samples[i] ==
              doctest::Approx(wf.samples[i - 10]).epsilon(1e-6));
}

TEST_CASE("apply_response identity") {
    auto wf = random_waveform(1000, 40e9, 1);
    auto out = linsys::apply_response(wf, FrequencyResponse::identity());
    for (std::size_t i = 0; i < wf.samples.size(); ++i)
        CHECK(std::abs(out.samples[i] - wf.samples[i]) < 1e-9);
}

TEST_CASE("apply_response ideal delay shifts by whole samples") {
    const double fs = 40e9;
    auto wf = random_waveform(512, fs, 2);
    auto out =
        linsys::apply_response(wf, FrequencyResponse::ideal_delay(5.0 / fs));
    for (std::size_t i = 5; i < wf.samples.size(); ++i)
        CHECK(out.samples[i] ==
              doctest::Approx(wf.samples[i - 5]).epsilon(1e-9));
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(std::abs(out.samples[i]) < 1e-9);
}

TEST_CASE("apply_response matches direct convolution") {
    const double fs = 120e9;
    auto wf = random_waveform(4096, fs, 3);
    for (int order : {2, 4}) {
        auto resp = FrequencyResponse::bessel(order, 15e9);
        auto ir = two_sided_impulse_response(resp, 4096, fs);
        auto direct = convolve_two_sided(wf.samples, ir);
        auto fast = linsys::apply_response(wf, resp);
        double peak = 0.0;
        for (double v : fast.samples) peak = std::max(peak, std::abs(v));
        for (std::size_t i = 0; i < wf.samples.size(); ++i)
            CHECK(std::abs(fast.samples[i] - direct[i]) < 1e-6 * peak);
    }
}

TEST_CASE("apply_response is linear") {
    auto x = random_waveform(1024, 40e9, 4);
    auto y = random_waveform(1024, 40e9, 5);
    const double a = 1.7, b = -0.4;
    wave::Waveform mix = x;
    for (std::size_t i = 0; i < mix.samples.size(); ++i)
        mix.samples[i] = a * x.samples[i] + b * y.samples[i];
    auto resp = FrequencyResponse::bessel(3, 8e9);
    auto fx = linsys::apply_response(x, resp);
    auto fy = linsys::apply_response(y, resp);
    auto fmix = linsys::apply_response(mix, resp);
    for (std::size_t i = 0; i < mix.samples.size(); ++i)
        CHECK(std::abs(fmix.samples[i] -
                       (a * fx.samples[i] + b * fy.samples[i])) < 1e-9);
}

TEST_CASE("passive stages do not increase energy") {
    auto wf = random_waveform(2048, 80e9, 6);
    double ein = 0.0;
    for (double v : wf.samples) ein += v * v;
    for (int order : {2, 4, 6}) {
        auto out = linsys::apply_response(
            wf, FrequencyResponse::bessel(order, 10e9));
        double eout = 0.0;
        for (double v : out.samples) eout += v * v;
        CHECK(eout <= ein * (1.0 + 1e-9));
    }
}

TEST_CASE("chain composition") {
    auto a = FrequencyResponse::bessel(4, 25e9);
    auto b = FrequencyResponse::bessel(2, 12e9);

    SUBCASE("identity element") {
        auto c = FrequencyResponse::chain({FrequencyResponse::identity(), a});
        for (double f : {0.0, 1e9, 20e9, 50e9})
            CHECK(std::abs(c.eval(f) - a.eval(f)) < 1e-12);
    }

    SUBCASE("commutative pointwise") {
        auto ab = FrequencyResponse::chain({a, b});
        auto ba = FrequencyResponse::chain({b, a});
        for (double f : {0.0, 3e9, 17e9, 44e9})
            CHECK(std::abs(ab.eval(f) - ba.eval(f)) < 1e-12);
    }

    SUBCASE("DC gain is the product of stage gains") {
        auto flat = FrequencyResponse::tabulated(
            {{1e3, -6.0, 0.0}, {100e9, -6.0, 0.0}},
            linsys::PhaseMode::ideal_linear, linsys::Extrapolation::hold);
        auto c = FrequencyResponse::chain({a, b, flat});
        CHECK(std::abs(c.eval(0.0)) ==
              doctest::Approx(std::pow(10.0, -6.0 / 20.0)).epsilon(1e-9));
    }

    SUBCASE("applying a chain equals applying stages in sequence") {
        auto wf = random_waveform(1024, 120e9, 7);
        auto combined =
            linsys::apply_response(wf, FrequencyResponse::chain({a, b}));
        auto stepwise =
            linsys::apply_response(linsys::apply_response(wf, a), b);
        // truncating the intermediate waveform drops a small sampling
        // tail, so the two routes agree only approximately
        for (std::size_t i = 0; i < wf.samples.size(); ++i)
            CHECK(std::abs(combined.samples[i] - stepwise.samples[i]) < 5e-3);
    }

    SUBCASE("empty chain rejected") {
        CHECK_THROWS_AS(FrequencyResponse::chain({}), std::invalid_argument);
    }
}

TEST_CASE("simulate_chain") {
    linsys::ChainConfig cfg;
    cfg.stages = {FrequencyResponse::bessel(4, 25e9),
                  FrequencyResponse::bessel(4, 12e9)};
    cfg.output_sample_rate = 40e9;

    SUBCASE("zero in, zero out") {
        wave::Waveform drive;
        drive.sample_rate = 120e9;
        drive.samples.assign(1200, 0.0);
        drive.samples[0] = 0.0;
        auto out = linsys::simulate_chain(drive, cfg);
        for (double v : out.samples) CHECK(v == doctest::Approx(0.0));
    }

    SUBCASE("isolated 200 ps unit pulse: peak and settling") {
        // 10 ns window, pulse in the middle
        wave::Waveform drive;
        drive.sample_rate = 120e9;
        drive.samples.assign(1200, 0.0);
        for (std::size_t i = 600; i < 624; ++i) drive.samples[i] = 1.0;
        auto out = linsys::simulate_chain(drive, cfg);
        double peak = 0.0;
        std::size_t ipeak = 0;
        for (std::size_t i = 0; i < out.samples.size(); ++i)
            if (out.samples[i] > peak) {
                peak = out.samples[i];
                ipeak = i;
            }
        CHECK(peak > 0.8);
        // cascaded Bessel stages overshoot a hair (~0.7%)
        CHECK(peak <= 1.02);
        // settled to < 1% of peak within 3 ns of the peak
        const std::size_t settle =
            ipeak + static_cast<std::size_t>(3e-9 * out.sample_rate);
        for (std::size_t i = settle; i < out.samples.size(); ++i)
            CHECK(std::abs(out.samples[i]) < 0.01 * peak);
    }

    SUBCASE("output rate honored") {
        wave::Waveform drive;
        drive.sample_rate = 120e9;
        drive.samples.assign(1200, 0.5);
        auto out = linsys::simulate_chain(drive, cfg);
        CHECK(out.sample_rate == doctest::Approx(40e9));
        CHECK(out.samples.size() == 400);
    }
}

TEST_CASE("apply_response_batch matches the serial path") {
    auto resp = FrequencyResponse::bessel(4, 12e9);
    std::vector<wave::Waveform> batch;
    for (std::uint64_t s = 0; s < 8; ++s)
        batch.push_back(random_waveform(1024, 120e9, 100 + s));
    auto parallel = linsys::apply_response_batch(batch, resp);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto serial = linsys::apply_response(batch[i], resp);
        CHECK(serial.samples == parallel[i].samples);
    }
}
