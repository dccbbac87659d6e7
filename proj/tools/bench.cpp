// Compares the OpenMP kernels against their serial reference paths.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "pulsechain/corrstats.hpp"
#include "pulsechain/linsys.hpp"
#include "pulsechain/rng.hpp"
#include "pulsechain/sourcesim.hpp"
#include "pulsechain/waveform.hpp"

using namespace pulsechain;

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch())
        .count();
}

void report(const char* name, double serial_s, double parallel_s) {
    std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %.2fx\n",
                name, serial_s, parallel_s, serial_s / parallel_s);
}

} // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());

    // Batch filtering: FFT route (parallel over traces) vs one-by-one.
    {
        auto resp = linsys::FrequencyResponse::bessel(4, 12e9);
        SplitMix64 rng(11);
        std::vector<wave::Waveform> batch(64);
        for (auto& wf : batch) {
            wf.sample_rate = 120e9;
            wf.samples.resize(12000);
            for (double& v : wf.samples) v = rng.next_double();
        }
        double t0 = now_s();
        std::vector<wave::Waveform> serial_out;
        for (const auto& wf : batch)
            serial_out.push_back(linsys::apply_response(wf, resp));
        double t1 = now_s();
        auto parallel_out = linsys::apply_response_batch(batch, resp);
        double t2 = now_s();
        report("apply_response_batch", t1 - t0, t2 - t1);
    }

    // MZI slow-detector average over 2e7 pulse pairs.
    {
        sourcesim::GainSwitchConfig cfg;
        cfg.i_min_ma = 2.0;
        cfg.seed = 5;
        auto phases = sourcesim::gain_switched_phases(cfg, 20'000'000);
        std::vector<double> intensities(phases.phases.size(), 1.0);
        double t0 = now_s();
        double a = sourcesim::mzi_interfere_serial(phases, intensities,
                                                   0.3, 1);
        double t1 = now_s();
        double b = sourcesim::mzi_interfere(phases, intensities, 0.3, 1);
        double t2 = now_s();
        report("mzi_interfere", t1 - t0, t2 - t1);
        if (a != b) std::printf("  MISMATCH: %.17g vs %.17g\n", a, b);
    }

    // Case statistics over 15 000 records x 8 lags.
    {
        auto pattern = wave::random_pattern(
            3, {wave::Symbol::S0, wave::Symbol::S_half, wave::Symbol::S_pi},
            100);
        corrstats::RecordBatch batch(150);
        SplitMix64 rng(17);
        for (auto& recs : batch) {
            recs.resize(100);
            for (std::size_t k = 0; k < recs.size(); ++k) {
                recs[k].slot_index = k;
                recs[k].nominal = pattern.symbols[k];
                recs[k].phi = rng.next_double() * 3.14159;
            }
        }
        double t0 = now_s();
        auto a = corrstats::phase_case_stats_serial(batch, 8);
        double t1 = now_s();
        auto b = corrstats::phase_case_stats(batch, 8);
        double t2 = now_s();
        report("phase_case_stats", t1 - t0, t2 - t1);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].mean_phi != b[i].mean_phi)
                std::printf("  MISMATCH at case %zu\n", i);
    }
    return 0;
}
