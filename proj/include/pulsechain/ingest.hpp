#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pulsechain/corrstats.hpp"
#include "pulsechain/linsys.hpp"
#include "pulsechain/phasemap.hpp"
#include "pulsechain/sourcesim.hpp"
#include "pulsechain/waveform.hpp"

namespace pulsechain::ingest {

struct TraceSchema {
    int time_col = 0;
    int value_col = 1;
    std::string units = "V";
};

/// Reads a two-column trace CSV (header line, then time,value rows).
/// The time column must be uniform within 0.1% relative jitter;
/// sample_rate = 1 / median step. Malformed input throws with the
/// offending line number.
wave::Waveform read_trace_csv(const std::filesystem::path& path,
                              const TraceSchema& schema = {});

/// Writes a trace with values at 9 significant digits. Writing twice
/// yields byte-identical files.
void write_trace_csv(const wave::Waveform& wf,
                     const std::filesystem::path& path,
                     const std::string& value_name = "value");

/// Rows `f_hz,mag_db[,phase_deg]` after one header line, strictly
/// ascending in frequency. A missing phase column leaves phase_deg = 0
/// (callers must then use PhaseMode::ideal_linear).
std::vector<linsys::TablePoint> read_response_table(
    const std::filesystem::path& path);

struct PolarimeterLog {
    std::vector<sourcesim::TimedStokes> entries;
    std::size_t renormalized_count = 0; // rows within the 1e-3 tolerance
};

/// Rows `timestamp_s,s1,s2,s3`. Norm deviations up to 1e-3 are silently
/// renormalized (counted in the metadata); larger deviations throw.
PolarimeterLog read_polarimeter_log(const std::filesystem::path& path);

/// Pattern files: one symbol name per line after a header.
void write_pattern(const wave::NominalPattern& pattern,
                   const std::filesystem::path& path);
wave::NominalPattern read_pattern(const std::filesystem::path& path);

// Report writers. Deterministic column and row order (sorted keys).
void write_correlation_report(const corrstats::CorrelationReport& report,
                              const std::filesystem::path& path);
void write_spacing_report(const std::vector<corrstats::SpacingRow>& rows,
                          const std::filesystem::path& path);
void write_visibility_report(const sourcesim::VisibilityResult& result,
                             const std::filesystem::path& path);
void write_drift_report(const std::vector<sourcesim::DriftPoint>& series,
                        const std::filesystem::path& path);

/// 9-significant-digit decimal formatting shared by every writer.
std::string format_g9(double v);

} // namespace pulsechain::ingest
