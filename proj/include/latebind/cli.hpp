#ifndef LATEBIND_CLI_HPP
#define LATEBIND_CLI_HPP

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "latebind/types.hpp"

// Subcommand runners behind the command-line front end. Each runner is
// idempotent for identical inputs, writes outputs atomically, and produces
// no output files on error.
//
// Exit codes: 0 ok, 1 usage, 2 input error, 3 infeasible configuration.

namespace latebind::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInfeasible = 3;

struct ProfileArgs {
    std::optional<std::filesystem::path> samples_csv; // existing samples
    std::optional<std::filesystem::path> families_json; // or generate them
    std::optional<std::filesystem::path> samples_out;   // emit generated CSV
    std::filesystem::path out;
    std::optional<Millicores> grid_k_min, grid_k_max, grid_step;
    std::optional<int> pct_min, pct_max, pct_step, pct_tail;
    int min_samples = 100;
    std::uint64_t seed = 1;
};

struct SynthesizeArgs {
    std::filesystem::path profiles_csv;
    std::filesystem::path workflow_json;
    std::filesystem::path out;
    std::string mode = "head"; // head | tail | head+next
    Millis step_ms = 1;
    int jobs = 0; // 0 = hardware concurrency
};

struct SimulateArgs {
    std::filesystem::path scenario_json;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed; // overrides the scenario seed
    std::optional<std::filesystem::path> decision_log;
    int jobs = 0;
};

struct ReportArgs {
    std::vector<std::filesystem::path> run_dirs; // simulate output dirs
    std::filesystem::path out_dir;
};

int run_profile(const ProfileArgs& args, std::ostream& out, std::ostream& err);
int run_synthesize(const SynthesizeArgs& args, std::ostream& out,
                   std::ostream& err);
int run_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err);
int run_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

/// Full argv front end (CLI11); returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

} // namespace latebind::cli

#endif // LATEBIND_CLI_HPP
