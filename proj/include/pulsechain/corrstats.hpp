#pragma once

#include <map>
#include <vector>

#include "pulsechain/phasemap.hpp"
#include "pulsechain/waveform.hpp"

namespace pulsechain::corrstats {

/// One of the six (prev, cur) nominal transitions at a given lag.
struct CaseKey {
    int lag_n = 1;
    wave::Symbol prev_nominal = wave::Symbol::S0;  // {S0, S_half, S_pi}
    wave::Symbol cur_nominal = wave::Symbol::S_half; // {S_half, S_pi}

    bool operator<(const CaseKey& o) const;
    bool operator==(const CaseKey& o) const;
};

struct CaseStats {
    CaseKey key;
    double mean_phi = 0.0; // rad; meaningless when count == 0
    double std_phi = 0.0;  // sample std (N-1); 0 when count < 2
    std::size_t count = 0;
};

struct SpacingRow {
    int l_ns = 0;
    double mean = 0.0;
    double std = 0.0;
    double normalized_mean = 0.0;
    std::size_t count = 0;
};

struct CorrelationReport {
    std::vector<CaseStats> per_case;
    std::map<CaseKey, double> deviation; // rad, signed
    std::map<int, double> max_deviation_per_n; // rad, absolute
    std::vector<SpacingRow> intensity_by_spacing;
    std::map<std::pair<std::string, std::string>, double> epsilon_pairs;
};

using RecordBatch = std::vector<std::vector<phasemap::PulseRecord>>;

/// Per-lag, per-transition mean/std of phi over all occurrences in the
/// batch. Pairs never cross trace boundaries. Cases with no occurrence
/// are reported with count 0. Results are bit-identical to the serial
/// variant (fixed per-trace merge order).
std::vector<CaseStats> phase_case_stats(const RecordBatch& batch, int n_max);
std::vector<CaseStats> phase_case_stats_serial(const RecordBatch& batch,
                                               int n_max);

/// deviation(n, prev, cur) = mean(n, prev, cur) - mean(n, S0, cur);
/// max_deviation_per_n takes the absolute max over the six cases.
/// Throws if a needed baseline (prev = S0) case has count 0.
void phase_deviation(const std::vector<CaseStats>& stats,
                     std::map<CaseKey, double>& deviation,
                     std::map<int, double>& max_deviation_per_n);

/// Mean/std/count of peak_intensity bucketed by spacing_prev_ns, for
/// l in 1..l_max; normalized_mean divides by the largest bucket mean.
std::vector<SpacingRow> intensity_by_spacing(const RecordBatch& batch,
                                             int l_max);

/// Pointwise arithmetic mean of equally shaped traces.
wave::Waveform average_traces(const std::vector<wave::Waveform>& group);

/// epsilon = 1 - <a,b> / (|a| |b|).
double distinguishability(const wave::Waveform& a, const wave::Waveform& b);

/// Mean and std across trial-level max-deviation curves, per lag.
struct TrialCurve {
    std::map<int, double> mean;
    std::map<int, double> std;
};
TrialCurve aggregate_trials(
    const std::vector<std::map<int, double>>& curves);

} // namespace pulsechain::corrstats
