#include "pulsechain/sourcesim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pulsechain/rng.hpp"

namespace pulsechain::sourcesim {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_2pi(double phi) {
    phi = std::fmod(phi, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    return phi;
}

} // namespace

void GainSwitchConfig::validate() const {
    if (!(i_min_ma < i_threshold_ma && i_threshold_ma < i_max_ma))
        throw std::invalid_argument(
            "gain switch: need i_min < i_threshold < i_max");
    if (i_scale_ma <= 0.0)
        throw std::invalid_argument("gain switch: i_scale must be > 0");
    if (jitter_sigma < 0.0)
        throw std::invalid_argument("gain switch: jitter_sigma must be >= 0");
}

double GainSwitchConfig::survival_probability() const {
    return std::exp(-(i_threshold_ma - i_min_ma) / i_scale_ma);
}

PulsePhaseSequence gain_switched_phases(const GainSwitchConfig& cfg,
                                        std::size_t n) {
    cfg.validate();
    if (n == 0)
        throw std::invalid_argument("gain_switched_phases: n must be >= 1");
    const double p = cfg.survival_probability();

    PulsePhaseSequence seq;
    seq.seed = cfg.seed;
    seq.phases.reserve(n);
    SplitMix64 rng(cfg.seed);
    seq.phases.push_back(rng.next_double() * kTwoPi);
    for (std::size_t k = 1; k < n; ++k) {
        if (rng.next_double() < p) {
            const double jitter =
                cfg.jitter_sigma > 0.0
                    ? rng.next_gaussian() * cfg.jitter_sigma
                    : 0.0;
            seq.phases.push_back(wrap_2pi(seq.phases.back() + jitter));
        } else {
            seq.phases.push_back(rng.next_double() * kTwoPi);
        }
    }
    return seq;
}

void StokesVector::validate() const {
    const double norm2 = s1 * s1 + s2 * s2 + s3 * s3;
    if (std::abs(norm2 - 1.0) > 2e-6)
        throw std::invalid_argument("stokes: vector not normalized");
}

double angular_distance(const StokesVector& a, const StokesVector& b) {
    a.validate();
    b.validate();
    const double dot = a.s1 * b.s1 + a.s2 * b.s2 + a.s3 * b.s3;
    return std::acos(std::clamp(dot, -1.0, 1.0));
}

std::vector<DriftPoint> drift_series(const std::vector<TimedStokes>& log) {
    if (log.empty())
        throw std::invalid_argument("drift_series: empty log");
    std::vector<DriftPoint> out;
    out.reserve(log.size());
    for (const auto& entry : log)
        out.push_back({entry.timestamp_s,
                       angular_distance(entry.s, log.front().s)});
    return out;
}

namespace {

double pair_term(double ik, double im, double phase) {
    return (ik + im) / 4.0 + std::sqrt(ik * im) / 2.0 * std::cos(phase);
}

void check_interfere_args(const PulsePhaseSequence& phases,
                          const std::vector<double>& intensities,
                          std::size_t imbalance_slots) {
    if (imbalance_slots < 1)
        throw std::invalid_argument("mzi: imbalance_slots must be >= 1");
    if (phases.phases.size() <= imbalance_slots)
        throw std::invalid_argument(
            "mzi: sequence must be longer than the imbalance");
    if (intensities.size() != phases.phases.size())
        throw std::invalid_argument("mzi: intensity/phase length mismatch");
    for (double v : intensities)
        if (v < 0.0)
            throw std::invalid_argument("mzi: negative intensity");
}

} // namespace

double mzi_interfere_serial(const PulsePhaseSequence& phases,
                            const std::vector<double>& intensities,
                            double delta_phi, std::size_t imbalance_slots) {
    check_interfere_args(phases, intensities, imbalance_slots);
    const std::size_t m = imbalance_slots;
    const std::size_t n = phases.phases.size();
    const std::size_t total = n - m;

    // Same fixed-size chunked accumulation as the parallel version so
    // the two are bit-identical.
    constexpr std::size_t kChunk = 1 << 16;
    double acc = 0.0;
    for (std::size_t lo = m; lo < n; lo += kChunk) {
        const std::size_t hi = std::min(lo + kChunk, n);
        double part = 0.0;
        for (std::size_t k = lo; k < hi; ++k)
            part += pair_term(
                intensities[k], intensities[k - m],
                phases.phases[k] - phases.phases[k - m] + delta_phi);
        acc += part;
    }
    return acc / static_cast<double>(total);
}

double mzi_interfere(const PulsePhaseSequence& phases,
                     const std::vector<double>& intensities, double delta_phi,
                     std::size_t imbalance_slots) {
    check_interfere_args(phases, intensities, imbalance_slots);
    const std::size_t m = imbalance_slots;
    const std::size_t n = phases.phases.size();
    const std::size_t total = n - m;

    // Fixed chunk size independent of the thread count; partial sums are
    // combined in chunk order so the reduction is bit-stable.
    constexpr std::size_t kChunk = 1 << 16;
    const std::size_t n_chunks = (total + kChunk - 1) / kChunk;
    std::vector<double> partial(n_chunks, 0.0);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks);
         ++c) {
        const std::size_t lo = m + static_cast<std::size_t>(c) * kChunk;
        const std::size_t hi = std::min(lo + kChunk, n);
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k)
            acc += pair_term(
                intensities[k], intensities[k - m],
                phases.phases[k] - phases.phases[k - m] + delta_phi);
        partial[c] = acc;
    }

    double acc = 0.0;
    for (double v : partial) acc += v;
    return acc / static_cast<double>(total);
}

VisibilityResult fringe_scan(const PulsePhaseSequence& phases,
                             const std::vector<double>& intensities,
                             const std::vector<double>& grid,
                             std::size_t imbalance_slots) {
    if (grid.size() < 16)
        throw std::invalid_argument("fringe_scan: need >= 16 grid points");
    const auto [mn, mx] = std::minmax_element(grid.begin(), grid.end());
    if (*mx - *mn < kTwoPi * (1.0 - 1e-9))
        throw std::invalid_argument("fringe_scan: grid must span >= 2 pi");

    VisibilityResult res;
    res.delta_phi_grid = grid;
    res.intensity.reserve(grid.size());
    for (double dphi : grid)
        res.intensity.push_back(
            mzi_interfere(phases, intensities, dphi, imbalance_slots));
    const auto [imin, imax] =
        std::minmax_element(res.intensity.begin(), res.intensity.end());
    res.i_min_obs = *imin;
    res.i_max_obs = *imax;
    if (res.i_max_obs + res.i_min_obs == 0.0)
        throw std::runtime_error("fringe_scan: zero total intensity");
    res.visibility =
        (res.i_max_obs - res.i_min_obs) / (res.i_max_obs + res.i_min_obs);
    return res;
}

PathSelection select_paths(const wave::NominalPattern& pattern,
                           const std::map<wave::Symbol, double>& delay_fs,
                           const std::map<wave::Symbol, double>& gain) {
    const wave::Symbol paths[3] = {wave::Symbol::P1, wave::Symbol::P2,
                                   wave::Symbol::P3};
    PathSelection sel;
    for (int p = 0; p < 3; ++p) {
        sel.on_off[p].seed = pattern.seed;
        sel.on_off[p].symbols.reserve(pattern.symbols.size());
    }
    for (wave::Symbol s : pattern.symbols) {
        if (s != wave::Symbol::P1 && s != wave::Symbol::P2 &&
            s != wave::Symbol::P3)
            throw std::invalid_argument("select_paths: unknown path symbol " +
                                        wave::symbol_name(s));
        for (int p = 0; p < 3; ++p)
            sel.on_off[p].symbols.push_back(
                s == paths[p] ? wave::Symbol::On : wave::Symbol::Off);
    }
    sel.delay_fs = delay_fs;
    sel.gain = gain;
    return sel;
}

} // namespace pulsechain::sourcesim
