#pragma once

#include <optional>
#include <vector>

#include "pulsechain/waveform.hpp"

namespace pulsechain::phasemap {

/// phi = 2 acos(sqrt(1 - I)), monotone on I in [0,1], range [0, pi].
/// Values within 1e-6 outside [0,1] are clamped; beyond that it throws.
double intensity_to_phase(double intensity);

/// Exact inverse: I = sin^2(phi/2).
double phase_to_intensity(double phi);

struct NormalizationContext {
    double dc_offset = 0.0;  // volts
    double global_max = 0.0; // volts, max over the whole batch
};

/// Computes the context for a batch: dc_offset supplied, global_max as
/// the maximum sample over all traces.
NormalizationContext make_normalization_context(
    const std::vector<wave::Waveform>& traces, double dc_offset);

/// (v - dc_offset) / (global_max - dc_offset), clamped to [0,1] within
/// 1e-6; the batch argmax sample maps exactly to 1.
std::vector<wave::Waveform> normalize_traces(
    const std::vector<wave::Waveform>& traces,
    const NormalizationContext& ctx);

/// Pointwise Eq.-1 conversion of a normalized intensity trace.
wave::Waveform intensity_trace_to_phase(const wave::Waveform& trace);

struct PulseRecord {
    std::size_t slot_index = 0;
    wave::Symbol nominal = wave::Symbol::S0;
    double phi = 0.0;              // rad
    double peak_intensity = 0.0;   // normalized or mV
    double peak_time_offset = 0.0; // s, from slot start
    std::optional<int> spacing_prev_ns;
};

enum class PhaseWindow { center_sample, center_mean_50pct };

struct SlotGrid {
    double rep_rate = 0.0;     // Hz
    double pulse_width = 0.0;  // s, nominal drive width
    std::optional<double> alignment_offset_s; // auto via xcorr when unset
    double min_alignment_confidence = 0.5;
};

/// One record per slot; phi read at the slot center sample or as the
/// mean over the central 50% of the nominal pulse width. When
/// grid.alignment_offset_s is unset the trace is aligned to the nominal
/// pattern by cross-correlation.
std::vector<PulseRecord> extract_pulse_phases(const wave::Waveform& trace,
                                              const wave::NominalPattern& pattern,
                                              const SlotGrid& grid,
                                              PhaseWindow window);

/// Peak features per ON slot: max intensity in the slot and the
/// sub-sample peak location (3-point quadratic interpolation) relative
/// to the slot start. spacing_prev_ns is filled from the ON/OFF pattern.
std::vector<PulseRecord> extract_pulse_peaks(const wave::Waveform& trace,
                                             const wave::NominalPattern& pattern,
                                             const SlotGrid& grid);

/// Alignment offset (seconds) maximizing the normalized correlation
/// between the trace and a template of nominal levels centered in each
/// slot. The template spans pulse_width seconds per slot (half the slot
/// when pulse_width <= 0). Returns the offset and the correlation at
/// the peak.
struct AlignmentResult {
    double offset_s = 0.0;
    double confidence = 0.0;
};
AlignmentResult align_to_pattern(const wave::Waveform& trace,
                                 const wave::NominalPattern& pattern,
                                 double rep_rate,
                                 double pulse_width = 0.0);

} // namespace pulsechain::phasemap
