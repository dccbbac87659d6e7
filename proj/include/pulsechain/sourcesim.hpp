#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "pulsechain/waveform.hpp"

namespace pulsechain::sourcesim {

struct GainSwitchConfig {
    double i_min_ma = 2.0;
    double i_max_ma = 25.0;
    double i_threshold_ma = 12.0;
    double i_scale_ma = 2.0;   // survival decay constant
    double jitter_sigma = 0.0; // rad
    std::uint64_t seed = 0;

    void validate() const;

    /// Probability that a seed photon from the previous pulse survives:
    /// exp(-(i_threshold - i_min) / i_scale).
    double survival_probability() const;
};

struct PulsePhaseSequence {
    std::vector<double> phases; // rad, wrapped to [0, 2pi)
    std::uint64_t seed = 0;
};

/// Gain-switched phase train. Pulse 0 is uniform on [0, 2pi); each later
/// pulse either inherits the previous phase plus Gaussian jitter (with
/// the survival probability above) or redraws uniformly.
PulsePhaseSequence gain_switched_phases(const GainSwitchConfig& cfg,
                                        std::size_t n);

struct StokesVector {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;

    void validate() const; // |s| = 1 within 1e-6
};

/// Great-circle angle between two normalized Stokes vectors, in [0, pi].
double angular_distance(const StokesVector& a, const StokesVector& b);

struct TimedStokes {
    double timestamp_s = 0.0;
    StokesVector s;
};

struct DriftPoint {
    double timestamp_s = 0.0;
    double theta_rad = 0.0;
};

/// Angular distance of each entry from the first entry.
std::vector<DriftPoint> drift_series(const std::vector<TimedStokes>& log);

/// Slow-detector output of an asymmetric MZI: mean over pulse pairs
/// separated by `imbalance_slots` of the two-beam interference intensity
/// at relative phase delta_phi. OpenMP over fixed-size chunks with an
/// ordered merge, so results are run-to-run identical.
double mzi_interfere(const PulsePhaseSequence& phases,
                     const std::vector<double>& intensities, double delta_phi,
                     std::size_t imbalance_slots);

/// Serial reference for mzi_interfere; bit-identical output.
double mzi_interfere_serial(const PulsePhaseSequence& phases,
                            const std::vector<double>& intensities,
                            double delta_phi, std::size_t imbalance_slots);

struct VisibilityResult {
    double i_max_obs = 0.0;
    double i_min_obs = 0.0;
    double visibility = 0.0;
    std::vector<double> delta_phi_grid;
    std::vector<double> intensity; // one reading per grid point
};

/// Sweeps delta_phi over the grid (must span >= 2pi with >= 16 points)
/// and computes visibility = (Imax - Imin) / (Imax + Imin).
VisibilityResult fringe_scan(const PulsePhaseSequence& phases,
                             const std::vector<double>& intensities,
                             const std::vector<double>& grid,
                             std::size_t imbalance_slots);

struct PathSelection {
    std::array<wave::NominalPattern, 3> on_off; // one per path
    std::map<wave::Symbol, double> delay_fs;
    std::map<wave::Symbol, double> gain;
};

/// Splits a {P1,P2,P3} pattern into three ON/OFF patterns, one per path;
/// exactly one path is ON in every slot.
PathSelection select_paths(const wave::NominalPattern& pattern,
                           const std::map<wave::Symbol, double>& delay_fs,
                           const std::map<wave::Symbol, double>& gain);

} // namespace pulsechain::sourcesim
