#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pulsechain::wave {

/// Uniformly sampled real-valued time series. The universal signal
/// carrier for drive voltages, optical intensities and phase traces.
struct Waveform {
    std::vector<double> samples;
    double sample_rate = 0.0; // Sa/s
    double t0 = 0.0;          // s

    std::size_t size() const { return samples.size(); }
    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
    double time_at(std::size_t i) const {
        return t0 + static_cast<double>(i) / sample_rate;
    }
};

/// Throws std::invalid_argument if the waveform violates its invariants
/// (empty, non-positive rate, non-finite samples).
void validate(const Waveform& wf);

enum class Symbol : std::uint8_t {
    S0,     // nominal phase 0
    S_half, // nominal phase pi/2
    S_pi,   // nominal phase pi
    Off,    // selection mode: suppressed slot
    On,     // selection mode: transmitted slot
    P1,     // path-selection symbols
    P2,
    P3,
};

std::string symbol_name(Symbol s);
Symbol symbol_from_name(const std::string& name);

/// Nominal phase in radians for the three-state symbols.
double symbol_phase(Symbol s);

struct NominalPattern {
    std::vector<Symbol> symbols;
    std::uint64_t seed = 0;
};

struct PulseTrainSpec {
    double rep_rate = 0.0;    // Hz
    double pulse_width = 0.0; // s
    std::map<Symbol, double> amplitude_levels;
    std::size_t pattern_length = 0;
    double sample_rate = 0.0; // Sa/s

    void validate() const;
};

/// Deterministic pattern draw. Empty `weights` means uniform over the
/// alphabet; otherwise weights must match the alphabet size and sum to 1
/// within 1e-9.
NominalPattern random_pattern(std::uint64_t seed,
                              const std::vector<Symbol>& alphabet,
                              std::size_t length,
                              const std::vector<double>& weights = {});

/// ON/OFF pattern where the gap between consecutive ON slots is drawn
/// uniformly from {min_gap..max_gap} ns (one slot = 1 ns at 1 GHz).
/// Slot 0 is always ON.
NominalPattern random_spacing_pattern(std::uint64_t seed,
                                      std::size_t length,
                                      int min_gap,
                                      int max_gap);

/// Square pulses centered in their slots at the level assigned to each
/// symbol, zero elsewhere.
Waveform make_pulse_train(const PulseTrainSpec& spec,
                          const NominalPattern& pattern);

/// Integer decimation (keeps every k-th sample). new_rate == sample_rate
/// is the identity. Non-integer ratios are rejected.
Waveform resample(const Waveform& wf, double new_rate);

} // namespace pulsechain::wave
