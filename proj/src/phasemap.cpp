#include "pulsechain/phasemap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pulsechain::phasemap {

namespace {

constexpr double kClampTol = 1e-6;

double nominal_level(wave::Symbol s) {
    switch (s) {
        case wave::Symbol::Off: return 0.0;
        case wave::Symbol::On: return 1.0;
        default: return wave::symbol_phase(s);
    }
}

std::size_t slots_in_trace(const wave::Waveform& trace, double rep_rate) {
    const double slots =
        static_cast<double>(trace.samples.size()) * rep_rate /
        trace.sample_rate;
    const double rounded = std::round(slots);
    if (std::abs(slots - rounded) > 1e-6)
        throw std::invalid_argument(
            "trace does not span an integer number of slots");
    return static_cast<std::size_t>(rounded);
}

} // namespace

double intensity_to_phase(double intensity) {
    if (intensity < -kClampTol || intensity > 1.0 + kClampTol)
        throw std::invalid_argument(
            "intensity_to_phase: intensity outside [0,1] beyond tolerance");
    const double clamped = std::clamp(intensity, 0.0, 1.0);
    return 2.0 * std::acos(std::sqrt(1.0 - clamped));
}

double phase_to_intensity(double phi) {
    if (phi < 0.0 || phi > M_PI)
        throw std::invalid_argument(
            "phase_to_intensity: phi outside [0, pi]");
    const double s = std::sin(phi / 2.0);
    return s * s;
}

NormalizationContext make_normalization_context(
    const std::vector<wave::Waveform>& traces, double dc_offset) {
    if (traces.empty())
        throw std::invalid_argument("normalization: empty batch");
    double gmax = -HUGE_VAL;
    for (const auto& tr : traces) {
        wave::validate(tr);
        for (double v : tr.samples) gmax = std::max(gmax, v);
    }
    NormalizationContext ctx;
    ctx.dc_offset = dc_offset;
    ctx.global_max = gmax;
    if (ctx.global_max <= ctx.dc_offset)
        throw std::invalid_argument(
            "normalization: global_max must exceed dc_offset");
    return ctx;
}

std::vector<wave::Waveform> normalize_traces(
    const std::vector<wave::Waveform>& traces,
    const NormalizationContext& ctx) {
    if (ctx.global_max <= ctx.dc_offset)
        throw std::invalid_argument(
            "normalization: global_max must exceed dc_offset");
    const double span = ctx.global_max - ctx.dc_offset;
    std::vector<wave::Waveform> out(traces.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0;
         i < static_cast<std::ptrdiff_t>(traces.size()); ++i) {
        out[i] = traces[i];
        for (double& v : out[i].samples) {
            v = (v - ctx.dc_offset) / span;
            if (v > 1.0 && v <= 1.0 + kClampTol) v = 1.0;
            if (v < 0.0 && v >= -kClampTol) v = 0.0;
        }
    }
    return out;
}

wave::Waveform intensity_trace_to_phase(const wave::Waveform& trace) {
    wave::Waveform out = trace;
    for (double& v : out.samples) v = intensity_to_phase(v);
    return out;
}

AlignmentResult align_to_pattern(const wave::Waveform& trace,
                                 const wave::NominalPattern& pattern,
                                 double rep_rate, double pulse_width) {
    wave::validate(trace);
    const double fs = trace.sample_rate;
    const std::size_t per_slot =
        static_cast<std::size_t>(std::llround(fs / rep_rate));
    const std::size_t n = trace.samples.size();

    // Template of nominal levels spanning the pulse width (or the
    // central half of each slot); correlate over integer sample shifts
    // within +-1 slot.
    std::vector<double> tmpl(n, 0.0);
    std::vector<char> mask(n, 0);
    std::size_t half_w = per_slot / 4;
    if (pulse_width > 0.0)
        half_w = static_cast<std::size_t>(
            std::llround(0.5 * pulse_width * fs));
    half_w = std::max<std::size_t>(half_w, 1);
    for (std::size_t k = 0; k < pattern.symbols.size(); ++k) {
        const std::size_t c = k * per_slot + per_slot / 2;
        const std::size_t lo = c >= half_w ? c - half_w : 0;
        const std::size_t hi = std::min(c + half_w, n);
        for (std::size_t i = lo; i < hi; ++i) {
            tmpl[i] = nominal_level(pattern.symbols[k]);
            mask[i] = 1;
        }
    }

    // Normalized correlation over every slot window, zero-level slots
    // included: their energy penalizes shifts that line the template up
    // with inter-pulse background, which is proportional to the pattern
    // and would otherwise score as well as the pulses themselves. A
    // perfectly aligned ideal trace scores exactly 1. Piecewise-constant
    // traces tie over a contiguous run of shifts; take its midpoint.
    const long long max_shift = static_cast<long long>(per_slot);
    double best = -HUGE_VAL;
    long long tie_lo = 0, tie_hi = 0;
    for (long long s = -max_shift; s <= max_shift; ++s) {
        double dot = 0.0, tt = 0.0, xx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask[i]) continue;
            const long long j = static_cast<long long>(i) + s;
            if (j < 0 || j >= static_cast<long long>(n)) continue;
            const double x = trace.samples[static_cast<std::size_t>(j)];
            dot += tmpl[i] * x;
            tt += tmpl[i] * tmpl[i];
            xx += x * x;
        }
        const double c =
            (tt > 0.0 && xx > 0.0) ? dot / std::sqrt(tt * xx) : 0.0;
        if (c > best) {
            best = c;
            tie_lo = tie_hi = s;
        } else if (c == best && s == tie_hi + 1) {
            tie_hi = s;
        }
    }

    AlignmentResult res;
    res.offset_s =
        static_cast<double>(std::llround(0.5 * static_cast<double>(
            tie_lo + tie_hi))) / fs;
    res.confidence = best;
    return res;
}

std::vector<PulseRecord> extract_pulse_phases(
    const wave::Waveform& trace, const wave::NominalPattern& pattern,
    const SlotGrid& grid, PhaseWindow window) {
    wave::validate(trace);
    if (grid.rep_rate <= 0.0)
        throw std::invalid_argument("extract: rep_rate must be > 0");
    const std::size_t n_slots = slots_in_trace(trace, grid.rep_rate);
    if (n_slots != pattern.symbols.size())
        throw std::invalid_argument(
            "extract: pattern length does not match trace slot count");

    double offset;
    if (grid.alignment_offset_s) {
        offset = *grid.alignment_offset_s;
    } else {
        AlignmentResult al = align_to_pattern(trace, pattern, grid.rep_rate,
                                              grid.pulse_width);
        if (al.confidence < grid.min_alignment_confidence)
            throw std::runtime_error(
                "extract: alignment confidence below threshold");
        offset = al.offset_s;
    }

    const double fs = trace.sample_rate;
    const double slot = 1.0 / grid.rep_rate;
    std::vector<PulseRecord> records;
    records.reserve(n_slots);
    for (std::size_t k = 0; k < n_slots; ++k) {
        const double center = (static_cast<double>(k) + 0.5) * slot + offset;
        PulseRecord rec;
        rec.slot_index = k;
        rec.nominal = pattern.symbols[k];
        if (window == PhaseWindow::center_sample) {
            long long idx = std::llround(center * fs);
            idx = std::clamp<long long>(
                idx, 0, static_cast<long long>(trace.samples.size()) - 1);
            rec.phi = trace.samples[static_cast<std::size_t>(idx)];
        } else {
            // Mean over the central 50% of the nominal pulse width.
            const double half = grid.pulse_width / 4.0;
            long long i0 = std::llround((center - half) * fs);
            long long i1 = std::llround((center + half) * fs);
            i0 = std::clamp<long long>(
                i0, 0, static_cast<long long>(trace.samples.size()) - 1);
            i1 = std::clamp<long long>(
                i1, i0 + 1, static_cast<long long>(trace.samples.size()));
            double acc = 0.0;
            for (long long i = i0; i < i1; ++i)
                acc += trace.samples[static_cast<std::size_t>(i)];
            rec.phi = acc / static_cast<double>(i1 - i0);
        }
        records.push_back(rec);
    }
    return records;
}

std::vector<PulseRecord> extract_pulse_peaks(
    const wave::Waveform& trace, const wave::NominalPattern& pattern,
    const SlotGrid& grid) {
    wave::validate(trace);
    if (grid.rep_rate <= 0.0)
        throw std::invalid_argument("extract: rep_rate must be > 0");
    const std::size_t n_slots = slots_in_trace(trace, grid.rep_rate);
    if (n_slots != pattern.symbols.size())
        throw std::invalid_argument(
            "extract: pattern length does not match trace slot count");

    const double offset = grid.alignment_offset_s.value_or(0.0);
    const double fs = trace.sample_rate;
    const double slot = 1.0 / grid.rep_rate;
    const int slot_ns = static_cast<int>(std::llround(1e9 * slot));

    std::vector<PulseRecord> records;
    std::optional<std::size_t> prev_on;
    for (std::size_t k = 0; k < n_slots; ++k) {
        const wave::Symbol sym = pattern.symbols[k];
        if (sym == wave::Symbol::Off) continue;

        const double lo = static_cast<double>(k) * slot + offset;
        long long i0 = std::llround(lo * fs);
        long long i1 = std::llround((lo + slot) * fs);
        i0 = std::clamp<long long>(
            i0, 0, static_cast<long long>(trace.samples.size()));
        i1 = std::clamp<long long>(
            i1, i0, static_cast<long long>(trace.samples.size()));
        if (i1 <= i0) continue;

        long long imax = i0;
        for (long long i = i0; i < i1; ++i)
            if (trace.samples[static_cast<std::size_t>(i)] >
                trace.samples[static_cast<std::size_t>(imax)])
                imax = i;
        const double peak = trace.samples[static_cast<std::size_t>(imax)];
        if (peak <= 0.0) continue; // empty slot

        // Sub-sample refinement via the parabola through the three
        // samples around the discrete max; flat tops fall back to the
        // plateau midpoint at the sampled level.
        double delta = 0.0;
        double peak_val = peak;
        long long iplat = imax;
        while (iplat + 1 < i1 &&
               trace.samples[static_cast<std::size_t>(iplat + 1)] == peak)
            ++iplat;
        if (iplat > imax) {
            delta = 0.5 * static_cast<double>(iplat - imax);
        } else if (imax > i0 && imax < i1 - 1) {
            const double ym = trace.samples[static_cast<std::size_t>(imax - 1)];
            const double y0 = peak;
            const double yp = trace.samples[static_cast<std::size_t>(imax + 1)];
            const double den = ym - 2.0 * y0 + yp;
            if (den < 0.0) {
                delta = (ym - yp) / (2.0 * den);
                peak_val = y0 - 0.25 * (ym - yp) * delta;
            }
        }

        PulseRecord rec;
        rec.slot_index = k;
        rec.nominal = sym;
        rec.peak_intensity = peak_val;
        rec.peak_time_offset =
            (static_cast<double>(imax) + delta) / fs -
            (static_cast<double>(k) * slot + offset);
        if (prev_on)
            rec.spacing_prev_ns =
                static_cast<int>(k - *prev_on) * slot_ns;
        prev_on = k;
        records.push_back(rec);
    }
    return records;
}

} // namespace pulsechain::phasemap
