#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "pulsechain/waveform.hpp"

namespace pulsechain::linsys {

enum class PhaseMode { measured, ideal_linear };
enum class Extrapolation { hold, rolloff_db_per_octave };

struct TablePoint {
    double f_hz = 0.0;
    double mag_db = 0.0;
    double phase_deg = 0.0;
};

/// Complex transfer function H(f). Evaluation obeys conjugate symmetry
/// H(-f) = conj(H(f)) so real inputs map to real outputs.
class FrequencyResponse {
public:
    /// Analog Bessel-Thomson low-pass, |H| = -3 dB at cutoff_hz.
    static FrequencyResponse bessel(int order, double cutoff_hz);

    /// Interpolated table: magnitude linear in dB vs log-frequency,
    /// phase per phase_mode. Out-of-range queries follow `extrap`
    /// (rolloff slope in dB/octave applies above the last knot).
    static FrequencyResponse tabulated(
        std::vector<TablePoint> table, PhaseMode phase_mode,
        Extrapolation extrap = Extrapolation::rolloff_db_per_octave,
        double rolloff_db_per_octave = -6.0205999132796239,
        double group_delay_s = 0.0);

    static FrequencyResponse ideal_delay(double delay_s);
    static FrequencyResponse identity();

    /// Pointwise product of stage responses.
    static FrequencyResponse chain(std::vector<FrequencyResponse> stages);

    std::complex<double> eval(double f_hz) const;
    double dc_gain() const { return eval(0.0).real(); }

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    explicit FrequencyResponse(std::shared_ptr<const Impl> impl)
        : impl_(std::move(impl)) {}
};

struct ChainConfig {
    std::vector<FrequencyResponse> stages;
    double output_sample_rate = 0.0; // Sa/s
};

/// Frequency-domain filtering: FFT with zero-padding to the next power
/// of two >= 2x signal length, pointwise multiply by H, inverse FFT.
/// Throws if the imaginary residue exceeds 1e-9 of the signal RMS.
wave::Waveform apply_response(const wave::Waveform& wf,
                              const FrequencyResponse& resp);

/// Serial O(N*M) time-domain convolution. Reference path used to check
/// the FFT route and as the core of the benchmark comparison.
std::vector<double> convolve_direct(const std::vector<double>& x,
                                    const std::vector<double>& h);

/// Applies every stage, normalizes by the chain's DC gain so a unit
/// drive maps to unit output plateau, then decimates to
/// cfg.output_sample_rate.
wave::Waveform simulate_chain(const wave::Waveform& drive,
                              const ChainConfig& cfg);

/// OpenMP batch variant of apply_response (parallel over waveforms).
std::vector<wave::Waveform> apply_response_batch(
    const std::vector<wave::Waveform>& wfs, const FrequencyResponse& resp);

} // namespace pulsechain::linsys
