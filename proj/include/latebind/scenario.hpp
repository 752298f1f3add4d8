#ifndef LATEBIND_SCENARIO_HPP
#define LATEBIND_SCENARIO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latebind/dynamics.hpp"
#include "latebind/simulate.hpp"
#include "latebind/types.hpp"
#include "latebind/workloads.hpp"

// JSON configuration schemas (documented in the README). Parsing is strict:
// unknown fields are rejected, missing required fields are named in the
// error. Paths inside a scenario are resolved relative to the file.

namespace latebind {

struct GridsConfig {
    ResourceGrid resources;
    PercentileGrid percentiles;
};

/// workflow.json: { "id", "functions", "slo_ms", "grid" {k_min,k_max,step},
/// "percentiles" {min,max,step,tail} | {values,[tail]}, "weights", "batch" }
struct WorkflowConfig {
    WorkflowSpec workflow;
    GridsConfig grids;
};
WorkflowConfig parse_workflow_json(const std::string& text);
WorkflowConfig read_workflow_json(const std::filesystem::path& path);
std::string workflow_to_json(const WorkflowConfig& config);

/// families.json: { "grid", "batches", "n_per_size", "families": [ {name,
/// serial_ms, parallel_ms, k_ref, workset_sigma, workset_cap,
/// target_p99_p50, batch_scale {..}, interference [..]} ] }
struct FamiliesConfig {
    ResourceGrid grid;
    std::vector<int> batches{1};
    int n_per_size = 2000;
    std::vector<FunctionFamily> families;
};
FamiliesConfig parse_families_json(const std::string& text);
FamiliesConfig read_families_json(const std::filesystem::path& path);
std::string families_to_json(const FamiliesConfig& config);

/// scenario.json: { "workflow" {..}, "profiles_csv", ["tables_csv"],
/// "policies" [..], "n_requests", "seed", ["weight"],
/// ["arrival_interval_ms"], ["miss_policy"], ["miss_threshold"],
/// ["dynamics" {latency_scale, interference, host_capacity,
///              workset {fn: {sigma,cap}}}] }
struct ScenarioConfig {
    WorkflowConfig workflow;
    std::filesystem::path profiles_csv;
    std::optional<std::filesystem::path> tables_csv;
    std::vector<Policy> policies;
    SimConfig sim;
};
ScenarioConfig parse_scenario_json(const std::string& text,
                                   const std::filesystem::path& base_dir = {});
ScenarioConfig read_scenario_json(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioConfig& config);

} // namespace latebind

#endif // LATEBIND_SCENARIO_HPP
