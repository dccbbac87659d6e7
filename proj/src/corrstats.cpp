#include "pulsechain/corrstats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace pulsechain::corrstats {

namespace {

const wave::Symbol kPrev[3] = {wave::Symbol::S0, wave::Symbol::S_half,
                               wave::Symbol::S_pi};
const wave::Symbol kCur[2] = {wave::Symbol::S_half, wave::Symbol::S_pi};

int prev_index(wave::Symbol s) {
    switch (s) {
        case wave::Symbol::S0: return 0;
        case wave::Symbol::S_half: return 1;
        case wave::Symbol::S_pi: return 2;
        default: return -1;
    }
}

int cur_index(wave::Symbol s) {
    switch (s) {
        case wave::Symbol::S_half: return 0;
        case wave::Symbol::S_pi: return 1;
        default: return -1;
    }
}

// Bucket index for (n, prev, cur): 6 cases per lag.
std::size_t bucket_of(int n, int pi, int ci) {
    return static_cast<std::size_t>(n - 1) * 6 +
           static_cast<std::size_t>(pi) * 2 + static_cast<std::size_t>(ci);
}

CaseStats finalize_bucket(const CaseKey& key,
                          const std::vector<double>& values) {
    CaseStats st;
    st.key = key;
    st.count = values.size();
    if (values.empty()) return st;
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean_phi = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - st.mean_phi;
            ss += d * d;
        }
        st.std_phi = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return st;
}

std::vector<CaseStats> stats_from_buckets(
    const std::vector<std::vector<double>>& buckets, int n_max) {
    std::vector<CaseStats> out;
    out.reserve(buckets.size());
    for (int n = 1; n <= n_max; ++n)
        for (int pi = 0; pi < 3; ++pi)
            for (int ci = 0; ci < 2; ++ci) {
                CaseKey key{n, kPrev[pi], kCur[ci]};
                out.push_back(
                    finalize_bucket(key, buckets[bucket_of(n, pi, ci)]));
            }
    return out;
}

void fill_buckets_for_trace(const std::vector<phasemap::PulseRecord>& recs,
                            int n_max,
                            std::vector<std::vector<double>>& buckets) {
    const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(recs.size());
    for (int n = 1; n <= n_max; ++n) {
        for (std::ptrdiff_t k = n; k < len; ++k) {
            const int ci = cur_index(recs[k].nominal);
            if (ci < 0) continue;
            const int pi = prev_index(recs[k - n].nominal);
            if (pi < 0) continue;
            buckets[bucket_of(n, pi, ci)].push_back(recs[k].phi);
        }
    }
}

} // namespace

bool CaseKey::operator<(const CaseKey& o) const {
    return std::tie(lag_n, prev_nominal, cur_nominal) <
           std::tie(o.lag_n, o.prev_nominal, o.cur_nominal);
}

bool CaseKey::operator==(const CaseKey& o) const {
    return lag_n == o.lag_n && prev_nominal == o.prev_nominal &&
           cur_nominal == o.cur_nominal;
}

std::vector<CaseStats> phase_case_stats_serial(const RecordBatch& batch,
                                               int n_max) {
    if (n_max < 1)
        throw std::invalid_argument("phase_case_stats: n_max must be >= 1");
    std::vector<std::vector<double>> buckets(
        static_cast<std::size_t>(n_max) * 6);
    for (const auto& recs : batch)
        fill_buckets_for_trace(recs, n_max, buckets);
    return stats_from_buckets(buckets, n_max);
}

std::vector<CaseStats> phase_case_stats(const RecordBatch& batch, int n_max) {
    if (n_max < 1)
        throw std::invalid_argument("phase_case_stats: n_max must be >= 1");
    const std::size_t n_buckets = static_cast<std::size_t>(n_max) * 6;

    // Per-trace partial buckets merged in trace order so the summation
    // order (and hence every float result) matches the serial variant.
    std::vector<std::vector<std::vector<double>>> partials(batch.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(batch.size());
         ++t) {
        partials[t].assign(n_buckets, {});
        fill_buckets_for_trace(batch[t], n_max, partials[t]);
    }

    std::vector<std::vector<double>> buckets(n_buckets);
    for (const auto& part : partials)
        for (std::size_t b = 0; b < n_buckets; ++b)
            buckets[b].insert(buckets[b].end(), part[b].begin(),
                              part[b].end());
    return stats_from_buckets(buckets, n_max);
}

void phase_deviation(const std::vector<CaseStats>& stats,
                     std::map<CaseKey, double>& deviation,
                     std::map<int, double>& max_deviation_per_n) {
    deviation.clear();
    max_deviation_per_n.clear();

    std::map<std::pair<int, wave::Symbol>, const CaseStats*> baselines;
    for (const auto& st : stats)
        if (st.key.prev_nominal == wave::Symbol::S0)
            baselines[{st.key.lag_n, st.key.cur_nominal}] = &st;

    for (const auto& st : stats) {
        if (st.count == 0) continue; // flagged upstream; deviation undefined
        auto it = baselines.find({st.key.lag_n, st.key.cur_nominal});
        if (it == baselines.end() || it->second->count == 0)
            throw std::runtime_error(
                "phase_deviation: missing baseline (prev = 0) case at lag " +
                std::to_string(st.key.lag_n));
        const double dev = st.mean_phi - it->second->mean_phi;
        deviation[st.key] = dev;
        auto& mx = max_deviation_per_n[st.key.lag_n];
        mx = std::max(mx, std::abs(dev));
    }
}

std::vector<SpacingRow> intensity_by_spacing(const RecordBatch& batch,
                                             int l_max) {
    if (l_max < 1)
        throw std::invalid_argument("intensity_by_spacing: l_max >= 1");
    std::vector<std::vector<double>> buckets(l_max);
    for (const auto& recs : batch) {
        for (const auto& r : recs) {
            if (!r.spacing_prev_ns) continue; // first pulse of the trace
            const int l = *r.spacing_prev_ns;
            if (l >= 1 && l <= l_max)
                buckets[l - 1].push_back(r.peak_intensity);
        }
    }

    std::vector<SpacingRow> rows;
    double max_mean = 0.0;
    for (int l = 1; l <= l_max; ++l) {
        SpacingRow row;
        row.l_ns = l;
        const auto& vals = buckets[l - 1];
        row.count = vals.size();
        if (!vals.empty()) {
            double sum = 0.0;
            for (double v : vals) sum += v;
            row.mean = sum / static_cast<double>(vals.size());
            if (vals.size() >= 2) {
                double ss = 0.0;
                for (double v : vals) {
                    const double d = v - row.mean;
                    ss += d * d;
                }
                row.std =
                    std::sqrt(ss / static_cast<double>(vals.size() - 1));
            }
            max_mean = std::max(max_mean, row.mean);
        }
        rows.push_back(row);
    }
    for (auto& row : rows)
        row.normalized_mean = max_mean > 0.0 ? row.mean / max_mean : 0.0;
    return rows;
}

wave::Waveform average_traces(const std::vector<wave::Waveform>& group) {
    if (group.empty())
        throw std::invalid_argument("average_traces: empty group");
    const std::size_t n = group.front().samples.size();
    for (const auto& tr : group)
        if (tr.samples.size() != n ||
            tr.sample_rate != group.front().sample_rate)
            throw std::invalid_argument(
                "average_traces: mismatched trace shapes");
    wave::Waveform out = group.front();
    for (std::size_t g = 1; g < group.size(); ++g)
        for (std::size_t i = 0; i < n; ++i)
            out.samples[i] += group[g].samples[i];
    const double inv = 1.0 / static_cast<double>(group.size());
    for (double& v : out.samples) v *= inv;
    return out;
}

double distinguishability(const wave::Waveform& a, const wave::Waveform& b) {
    if (a.samples.size() != b.samples.size())
        throw std::invalid_argument("distinguishability: length mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        dot += a.samples[i] * b.samples[i];
        na += a.samples[i] * a.samples[i];
        nb += b.samples[i] * b.samples[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("distinguishability: zero-norm input");
    // identical inputs give bitwise-equal accumulators; clamp so the
    // metric is exactly zero there instead of rounding noise
    if (dot > 0.0 && dot * dot >= na * nb) return 0.0;
    return 1.0 - dot / std::sqrt(na * nb);
}

TrialCurve aggregate_trials(
    const std::vector<std::map<int, double>>& curves) {
    if (curves.empty())
        throw std::invalid_argument("aggregate_trials: no curves");
    TrialCurve out;
    for (const auto& [n, v] : curves.front()) {
        double sum = 0.0;
        for (const auto& c : curves) sum += c.at(n);
        const double mean = sum / static_cast<double>(curves.size());
        double ss = 0.0;
        for (const auto& c : curves) {
            const double d = c.at(n) - mean;
            ss += d * d;
        }
        out.mean[n] = mean;
        out.std[n] = curves.size() >= 2
                         ? std::sqrt(ss /
                                     static_cast<double>(curves.size() - 1))
                         : 0.0;
        (void)v;
    }
    return out;
}

} // namespace pulsechain::corrstats
