#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pulsechain/corrstats.hpp"
#include "pulsechain/linsys.hpp"
#include "pulsechain/phasemap.hpp"
#include "pulsechain/sourcesim.hpp"
#include "pulsechain/waveform.hpp"

namespace pulsechain::pipeline {

enum class RunMode {
    phase_characterization,     // three-state drive, phase statistics
    selection_characterization, // Vpi ON/OFF trains, intensity by spacing
    source_model,               // gain-switched source behavioral model
};

struct StageSpec {
    std::string type; // bessel | table | delay | identity
    int order = 4;
    double cutoff_hz = 0.0;
    std::string table_path;
    std::string phase_mode = "ideal_linear"; // table only
    std::string extrapolation = "rolloff";   // hold | rolloff
    double rolloff_db_per_octave = -6.0205999132796239;
    double group_delay_s = 0.0;
    double delay_s = 0.0;
};

struct RunConfig {
    double rep_rate_hz = 1e9;
    RunMode mode = RunMode::phase_characterization;
    std::size_t n_traces = 150;
    std::size_t pattern_length = 100;
    std::vector<std::uint64_t> seeds; // empty: base_seed + index
    std::uint64_t base_seed = 1;

    double pulse_width_s = 200e-12;
    double sim_sample_rate = 120e9;
    double output_sample_rate = 40e9;
    double voltage_scale = 2.66; // mV at the photodiode
    double dc_offset = 0.0;

    std::vector<StageSpec> stages;

    int n_max = 8;
    int l_max = 7;
    std::string window = "center_mean_50pct"; // | center_sample
    int min_gap_ns = 1;                       // selection mode spacing draw
    int max_gap_ns = 7;

    sourcesim::GainSwitchConfig gain_switch; // source_model mode
    std::size_t n_pulses = 1000000;          // source_model pulse count
    std::size_t imbalance_slots = 1;
    std::size_t fringe_points = 32;

    std::uint64_t seed_for_trace(std::size_t i) const;
    void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Loads a JSON config, applying dotted-path overrides ("a.b=value").
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Builds the LTI chain from the stage specs; table paths are resolved
/// relative to base_dir.
linsys::ChainConfig build_chain(const RunConfig& cfg,
                                const std::filesystem::path& base_dir);

struct SimulatedRun {
    std::vector<wave::Waveform> traces; // photodiode-voltage traces
    std::vector<wave::NominalPattern> patterns;
};

/// Drive generation -> chain filtering -> photodiode voltage conversion
/// for every trace in the run. Parallel over traces.
SimulatedRun simulate_run(const RunConfig& cfg,
                          const linsys::ChainConfig& chain);

/// Writes traces, patterns and a manifest sufficient to re-run.
void write_run(const SimulatedRun& run, const RunConfig& cfg,
               const std::filesystem::path& out_dir);

/// Reads back a directory written by write_run.
SimulatedRun read_run(const std::filesystem::path& dir);

/// normalize -> phase conversion -> per-slot extraction -> case stats
/// -> deviations.
corrstats::CorrelationReport analyze_phase(const SimulatedRun& run,
                                           const RunConfig& cfg);

/// Peak extraction on ON/OFF runs -> intensity-by-spacing table.
std::vector<corrstats::SpacingRow> analyze_intensity(const SimulatedRun& run,
                                                     const RunConfig& cfg);

/// Gain-switched source fringe scan at the configured grid size.
sourcesim::VisibilityResult visibility_run(const RunConfig& cfg);

std::string tool_version();

} // namespace pulsechain::pipeline
