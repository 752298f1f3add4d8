#ifndef LATEBIND_IO_HPP
#define LATEBIND_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "latebind/profile.hpp"
#include "latebind/simulate.hpp"
#include "latebind/types.hpp"

// File formats. All writers are atomic (temp file + rename) and byte
// deterministic; all readers reject malformed input with the offending line
// cited. CSV fields never need quoting: function and workflow identifiers
// are restricted to [A-Za-z0-9_.-]+.
//
//   samples:  function,batch,millicores,latency_ms
//   profiles: function,batch,percentile,millicores,latency_ms
//   hints:    workflow,suffix,weight,batch,t_start_ms,t_end_ms,head_millicores

namespace latebind {

class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

bool valid_identifier(const std::string& s);

/// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double value);

/// Writes `content` to `path` via a temp file in the same directory plus an
/// atomic rename; no partial output is ever visible.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/* ---- samples ----------------------------------------------------- */

std::string samples_to_csv(const std::vector<LatencySamples>& samples);
std::vector<LatencySamples> samples_from_csv(const std::string& text);
std::vector<LatencySamples> read_samples_csv(const std::filesystem::path& path);
void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<LatencySamples>& samples);

/* ---- profiles ---------------------------------------------------- */

std::string profiles_to_csv(const ProfileSet& profiles);
/// Grids are reconstructed from the rows; surfaces must be complete and
/// monotone (profile invariants are re-validated on load).
ProfileSet profiles_from_csv(const std::string& text);
ProfileSet read_profiles_csv(const std::filesystem::path& path);
void write_profiles_csv(const std::filesystem::path& path,
                        const ProfileSet& profiles);

/* ---- hints tables ------------------------------------------------ */

std::string hints_to_csv(const std::vector<HintsTable>& tables);
std::vector<HintsTable> hints_from_csv(const std::string& text);
std::vector<HintsTable> read_hints_csv(const std::filesystem::path& path);
void write_hints_csv(const std::filesystem::path& path,
                     const std::vector<HintsTable>& tables);

/* ---- simulation reports ------------------------------------------ */

/// requests.csv: one row per (policy, request) with flattened per-function
/// columns for the workflow's chain length.
std::string requests_to_csv(const std::vector<SimReport>& reports);
/// summary.json text for a set of policy reports over one scenario;
/// includes consumption normalized by Optimal when present.
std::string summary_to_json(const std::vector<SimReport>& reports);

/// One decision-log line (JSON): request, suffix, budget, head size, source,
/// measured lookup latency.
std::string decision_log_line(std::uint64_t request, int suffix,
                              Millis budget_ms,
                              const AdaptationDecision& decision);

} // namespace latebind

#endif // LATEBIND_IO_HPP
