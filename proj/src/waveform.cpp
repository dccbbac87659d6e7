#include "pulsechain/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pulsechain/rng.hpp"

namespace pulsechain::wave {

void validate(const Waveform& wf) {
    if (wf.sample_rate <= 0.0)
        throw std::invalid_argument("waveform: sample_rate must be > 0");
    if (wf.samples.empty())
        throw std::invalid_argument("waveform: empty sample vector");
    for (double v : wf.samples)
        if (!std::isfinite(v))
            throw std::invalid_argument("waveform: non-finite sample");
}

std::string symbol_name(Symbol s) {
    switch (s) {
        case Symbol::S0: return "S0";
        case Symbol::S_half: return "S_half";
        case Symbol::S_pi: return "S_pi";
        case Symbol::Off: return "OFF";
        case Symbol::On: return "ON";
        case Symbol::P1: return "P1";
        case Symbol::P2: return "P2";
        case Symbol::P3: return "P3";
    }
    throw std::invalid_argument("unknown symbol");
}

Symbol symbol_from_name(const std::string& name) {
    if (name == "S0") return Symbol::S0;
    if (name == "S_half") return Symbol::S_half;
    if (name == "S_pi") return Symbol::S_pi;
    if (name == "OFF") return Symbol::Off;
    if (name == "ON") return Symbol::On;
    if (name == "P1") return Symbol::P1;
    if (name == "P2") return Symbol::P2;
    if (name == "P3") return Symbol::P3;
    throw std::invalid_argument("unknown symbol name: " + name);
}

double symbol_phase(Symbol s) {
    switch (s) {
        case Symbol::S0: return 0.0;
        case Symbol::S_half: return M_PI / 2.0;
        case Symbol::S_pi: return M_PI;
        default:
            throw std::invalid_argument(
                "symbol has no nominal phase: " + symbol_name(s));
    }
}

void PulseTrainSpec::validate() const {
    if (rep_rate <= 0.0)
        throw std::invalid_argument("pulse train: rep_rate must be > 0");
    if (pulse_width <= 0.0 || pulse_width >= 1.0 / rep_rate)
        throw std::invalid_argument(
            "pulse train: pulse_width must lie in (0, 1/rep_rate)");
    if (sample_rate < 10.0 * rep_rate)
        throw std::invalid_argument(
            "pulse train: sample_rate must be >= 10 x rep_rate");
    if (pattern_length == 0)
        throw std::invalid_argument("pulse train: pattern_length must be >= 1");
}

NominalPattern random_pattern(std::uint64_t seed,
                              const std::vector<Symbol>& alphabet,
                              std::size_t length,
                              const std::vector<double>& weights) {
    if (alphabet.empty())
        throw std::invalid_argument("random_pattern: empty alphabet");
    if (length == 0)
        throw std::invalid_argument("random_pattern: length must be >= 1");

    std::vector<double> cum;
    if (!weights.empty()) {
        if (weights.size() != alphabet.size())
            throw std::invalid_argument(
                "random_pattern: weights size must match alphabet size");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0)
                throw std::invalid_argument("random_pattern: negative weight");
            total += w;
            cum.push_back(total);
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument(
                "random_pattern: weights must sum to 1");
        cum.back() = 1.0;
    }

    NominalPattern pat;
    pat.seed = seed;
    pat.symbols.reserve(length);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < length; ++i) {
        if (cum.empty()) {
            pat.symbols.push_back(alphabet[rng.next_below(alphabet.size())]);
        } else {
            double u = rng.next_double();
            std::size_t k =
                std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
            if (k >= alphabet.size()) k = alphabet.size() - 1;
            pat.symbols.push_back(alphabet[k]);
        }
    }
    return pat;
}

NominalPattern random_spacing_pattern(std::uint64_t seed,
                                      std::size_t length,
                                      int min_gap,
                                      int max_gap) {
    if (min_gap < 1 || max_gap < min_gap)
        throw std::invalid_argument(
            "random_spacing_pattern: need 1 <= min_gap <= max_gap");
    NominalPattern pat;
    pat.seed = seed;
    pat.symbols.assign(length, Symbol::Off);
    SplitMix64 rng(seed);
    std::size_t pos = 0;
    while (pos < length) {
        pat.symbols[pos] = Symbol::On;
        pos += min_gap + static_cast<std::size_t>(
                             rng.next_below(max_gap - min_gap + 1));
    }
    return pat;
}

Waveform make_pulse_train(const PulseTrainSpec& spec,
                          const NominalPattern& pattern) {
    spec.validate();
    if (pattern.symbols.size() != spec.pattern_length)
        throw std::invalid_argument(
            "make_pulse_train: pattern length does not match spec");

    const double slot = 1.0 / spec.rep_rate;
    const double dt = 1.0 / spec.sample_rate;
    const std::size_t n_samples = static_cast<std::size_t>(
        std::llround(slot * spec.sample_rate *
                     static_cast<double>(spec.pattern_length)));

    Waveform wf;
    wf.sample_rate = spec.sample_rate;
    wf.samples.assign(n_samples, 0.0);

    for (std::size_t k = 0; k < spec.pattern_length; ++k) {
        auto it = spec.amplitude_levels.find(pattern.symbols[k]);
        if (it == spec.amplitude_levels.end())
            throw std::invalid_argument(
                "make_pulse_train: no amplitude level for symbol " +
                symbol_name(pattern.symbols[k]));
        const double level = it->second;
        if (level == 0.0) continue;

        // Pulse centered in its slot; sample i belongs to the pulse when
        // its time lies in [center - w/2, center + w/2).
        const double center = (static_cast<double>(k) + 0.5) * slot;
        const double lo = center - spec.pulse_width / 2.0;
        const double hi = center + spec.pulse_width / 2.0;
        std::size_t i0 = static_cast<std::size_t>(std::ceil(lo / dt - 1e-9));
        std::size_t i1 = std::min(
            n_samples,
            static_cast<std::size_t>(std::ceil(hi / dt - 1e-9)));
        for (std::size_t i = i0; i < i1; ++i) wf.samples[i] = level;
    }
    return wf;
}

Waveform resample(const Waveform& wf, double new_rate) {
    validate(wf);
    if (new_rate <= 0.0)
        throw std::invalid_argument("resample: new_rate must be > 0");
    const double ratio = wf.sample_rate / new_rate;
    if (std::abs(ratio - 1.0) < 1e-12) return wf;
    const double k_real = ratio;
    const long long k = std::llround(k_real);
    if (k < 1 || std::abs(k_real - static_cast<double>(k)) > 1e-9)
        throw std::invalid_argument(
            "resample: sample_rate / new_rate must be a positive integer");
    Waveform out;
    out.sample_rate = wf.sample_rate / static_cast<double>(k);
    out.t0 = wf.t0;
    out.samples.reserve((wf.samples.size() + k - 1) / k);
    for (std::size_t i = 0; i < wf.samples.size();
         i += static_cast<std::size_t>(k))
        out.samples.push_back(wf.samples[i]);
    return out;
}

} // namespace pulsechain::wave
