#include "pulsechain/linsys.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>

namespace pulsechain::linsys {

namespace {

// Reverse Bessel polynomial coefficients a_k for theta_n(s), a_k =
// (2n-k)! / (2^(n-k) k! (n-k)!), computed in closed form.
std::vector<double> reverse_bessel_coeffs(int order) {
    std::vector<double> a(order + 1);
    for (int k = 0; k <= order; ++k) {
        double v = 1.0;
        // (2n-k)! / (k! (n-k)!) evaluated incrementally to stay finite.
        for (int i = 1; i <= 2 * order - k; ++i) v *= i;
        for (int i = 1; i <= k; ++i) v /= i;
        for (int i = 1; i <= order - k; ++i) v /= i;
        a[k] = v / std::pow(2.0, order - k);
    }
    return a;
}

std::complex<double> polyval(const std::vector<double>& coeffs,
                             std::complex<double> s) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;)
        acc = acc * s + coeffs[k];
    return acc;
}

// Prototype frequency where the unnormalized Bessel low-pass hits -3 dB,
// found by bisection on |H(jw)|^2 = 1/2.
double bessel_w3db(const std::vector<double>& coeffs) {
    const double a0 = coeffs[0];
    auto mag2 = [&](double w) {
        std::complex<double> h = a0 / polyval(coeffs, {0.0, w});
        return std::norm(h);
    };
    double lo = 0.0, hi = 1.0;
    while (mag2(hi) > 0.5) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mag2(mid) > 0.5)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::mutex fftw_plan_mutex;

} // namespace

struct FrequencyResponse::Impl {
    enum class Kind { bessel, tabulated, ideal_delay, identity, chain };
    Kind kind = Kind::identity;

    // bessel
    std::vector<double> coeffs;
    double a0 = 1.0;
    double w3db = 1.0;
    double cutoff_hz = 0.0;

    // tabulated
    std::vector<TablePoint> table;
    PhaseMode phase_mode = PhaseMode::ideal_linear;
    Extrapolation extrap = Extrapolation::hold;
    double rolloff_db_per_octave = 0.0;
    double group_delay_s = 0.0;

    // ideal_delay
    double delay_s = 0.0;

    // chain
    std::vector<FrequencyResponse> stages;

    std::complex<double> eval_nonneg(double f) const;
};

std::complex<double> FrequencyResponse::Impl::eval_nonneg(double f) const {
    switch (kind) {
        case Kind::identity:
            return 1.0;
        case Kind::ideal_delay:
            return std::polar(1.0, -2.0 * M_PI * f * delay_s);
        case Kind::bessel: {
            std::complex<double> s(0.0, w3db * f / cutoff_hz);
            return a0 / polyval(coeffs, s);
        }
        case Kind::chain: {
            std::complex<double> h = 1.0;
            for (const auto& st : stages) h *= st.eval(f);
            return h;
        }
        case Kind::tabulated: {
            double mag_db, phase_deg;
            const auto& t = table;
            if (f <= t.front().f_hz) {
                mag_db = t.front().mag_db;
                phase_deg = t.front().phase_deg;
            } else if (f >= t.back().f_hz) {
                phase_deg = t.back().phase_deg;
                if (extrap == Extrapolation::hold) {
                    mag_db = t.back().mag_db;
                } else {
                    mag_db = t.back().mag_db +
                             rolloff_db_per_octave *
                                 std::log2(f / t.back().f_hz);
                }
            } else {
                auto it = std::lower_bound(
                    t.begin(), t.end(), f,
                    [](const TablePoint& p, double v) { return p.f_hz < v; });
                const TablePoint& b = *it;
                const TablePoint& a = *(it - 1);
                const double u =
                    std::log(f / a.f_hz) / std::log(b.f_hz / a.f_hz);
                mag_db = a.mag_db + u * (b.mag_db - a.mag_db);
                phase_deg = a.phase_deg + u * (b.phase_deg - a.phase_deg);
            }
            const double mag = std::pow(10.0, mag_db / 20.0);
            double phase_rad;
            if (phase_mode == PhaseMode::ideal_linear)
                phase_rad = -2.0 * M_PI * f * group_delay_s;
            else
                phase_rad = phase_deg * M_PI / 180.0;
            return std::polar(mag, phase_rad);
        }
    }
    throw std::logic_error("unreachable response kind");
}

std::complex<double> FrequencyResponse::eval(double f_hz) const {
    if (f_hz < 0.0) return std::conj(impl_->eval_nonneg(-f_hz));
    return impl_->eval_nonneg(f_hz);
}

FrequencyResponse FrequencyResponse::bessel(int order, double cutoff_hz) {
    if (order < 1 || order > 10)
        throw std::invalid_argument("bessel: order must lie in [1, 10]");
    if (cutoff_hz <= 0.0)
        throw std::invalid_argument("bessel: cutoff_hz must be > 0");
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::bessel;
    impl->coeffs = reverse_bessel_coeffs(order);
    impl->a0 = impl->coeffs[0];
    impl->w3db = bessel_w3db(impl->coeffs);
    impl->cutoff_hz = cutoff_hz;
    return FrequencyResponse(std::move(impl));
}

FrequencyResponse FrequencyResponse::tabulated(std::vector<TablePoint> table,
                                               PhaseMode phase_mode,
                                               Extrapolation extrap,
                                               double rolloff_db_per_octave,
                                               double group_delay_s) {
    if (table.size() < 2)
        throw std::invalid_argument("tabulated: need at least 2 points");
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!std::isfinite(table[i].mag_db) || !std::isfinite(table[i].f_hz))
            throw std::invalid_argument("tabulated: non-finite table entry");
        if (i > 0 && table[i].f_hz <= table[i - 1].f_hz)
            throw std::invalid_argument(
                "tabulated: frequencies must be strictly ascending");
    }
    if (table.front().f_hz <= 0.0)
        throw std::invalid_argument("tabulated: frequencies must be > 0");
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::tabulated;
    impl->table = std::move(table);
    impl->phase_mode = phase_mode;
    impl->extrap = extrap;
    impl->rolloff_db_per_octave = rolloff_db_per_octave;
    impl->group_delay_s = group_delay_s;
    return FrequencyResponse(std::move(impl));
}

FrequencyResponse FrequencyResponse::ideal_delay(double delay_s) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::ideal_delay;
    impl->delay_s = delay_s;
    return FrequencyResponse(std::move(impl));
}

FrequencyResponse FrequencyResponse::identity() {
    return FrequencyResponse(std::make_shared<Impl>());
}

FrequencyResponse FrequencyResponse::chain(
    std::vector<FrequencyResponse> stages) {
    if (stages.empty())
        throw std::invalid_argument("chain: need at least one stage");
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::chain;
    impl->stages = std::move(stages);
    return FrequencyResponse(std::move(impl));
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace

wave::Waveform apply_response(const wave::Waveform& wf,
                              const FrequencyResponse& resp) {
    wave::validate(wf);
    const std::size_t n = wf.samples.size();
    const std::size_t m = next_pow2(2 * n);
    const double fs = wf.sample_rate;

    std::vector<fftw_complex> buf(m), spec(m);
    for (std::size_t i = 0; i < m; ++i) {
        buf[i][0] = i < n ? wf.samples[i] : 0.0;
        buf[i][1] = 0.0;
    }

    fftw_plan fwd, inv;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fwd = fftw_plan_dft_1d(static_cast<int>(m), buf.data(), spec.data(),
                               FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_1d(static_cast<int>(m), spec.data(), buf.data(),
                               FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);

    for (std::size_t j = 0; j < m; ++j) {
        const double f =
            (j <= m / 2 ? static_cast<double>(j)
                        : static_cast<double>(j) - static_cast<double>(m)) *
            fs / static_cast<double>(m);
        std::complex<double> h = resp.eval(f);
        if (!std::isfinite(h.real()) || !std::isfinite(h.imag()))
            throw std::runtime_error(
                "apply_response: response not evaluable at " +
                std::to_string(f) + " Hz");
        // DC and Nyquist bins are their own conjugate partners; only the
        // real part keeps real inputs mapping to real outputs.
        if (j == 0 || j == m / 2) h = h.real();
        const std::complex<double> v(spec[j][0], spec[j][1]);
        const std::complex<double> out = v * h;
        spec[j][0] = out.real();
        spec[j][1] = out.imag();
    }

    fftw_execute(inv);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }

    double sum_sq = 0.0;
    for (double v : wf.samples) sum_sq += v * v;
    const double rms = std::sqrt(sum_sq / static_cast<double>(n));

    wave::Waveform out;
    out.sample_rate = fs;
    out.t0 = wf.t0;
    out.samples.resize(n);
    double max_imag = 0.0;
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i) {
        out.samples[i] = buf[i][0] * scale;
        max_imag = std::max(max_imag, std::abs(buf[i][1]) * scale);
    }
    if (rms > 0.0 && max_imag > 1e-9 * rms)
        throw std::runtime_error(
            "apply_response: imaginary residue exceeds tolerance");
    return out;
}

std::vector<double> convolve_direct(const std::vector<double>& x,
                                    const std::vector<double>& h) {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double acc = 0.0;
        const std::size_t mmax = std::min(i + 1, h.size());
        for (std::size_t j = 0; j < mmax; ++j) acc += h[j] * x[i - j];
        y[i] = acc;
    }
    return y;
}

wave::Waveform simulate_chain(const wave::Waveform& drive,
                              const ChainConfig& cfg) {
    if (cfg.stages.empty())
        throw std::invalid_argument("simulate_chain: empty stage list");
    if (cfg.output_sample_rate <= 0.0)
        throw std::invalid_argument(
            "simulate_chain: output_sample_rate must be > 0");
    FrequencyResponse combined = FrequencyResponse::chain(cfg.stages);
    const double g0 = std::abs(combined.eval(0.0));
    if (g0 <= 0.0)
        throw std::runtime_error("simulate_chain: chain has zero DC gain");
    wave::Waveform filtered = apply_response(drive, combined);
    for (double& v : filtered.samples) v /= g0;
    return wave::resample(filtered, cfg.output_sample_rate);
}

std::vector<wave::Waveform> apply_response_batch(
    const std::vector<wave::Waveform>& wfs, const FrequencyResponse& resp) {
    std::vector<wave::Waveform> out(wfs.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0;
         i < static_cast<std::ptrdiff_t>(wfs.size()); ++i) {
        try {
            out[i] = apply_response(wfs[i], resp);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

} // namespace pulsechain::linsys
