#ifndef LATEBIND_SIMULATE_HPP
#define LATEBIND_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latebind/adapter.hpp"
#include "latebind/dynamics.hpp"
#include "latebind/profile.hpp"
#include "latebind/synthesize.hpp"
#include "latebind/types.hpp"

// Discrete-event replay of a request stream through a workflow chain.
// Late-binding policies drive the adapter after every function completion;
// early-binding baselines fix sizes up front; Optimal picks the cheapest
// SLO-meeting allocation per request with hindsight knowledge of its draws.
// All policies share the same difficulty draws for a given seed, so
// comparisons are paired.

namespace latebind {

enum class Policy {
    Janus,              // head-percentile exploration + runtime adaptation
    JanusMinus,         // adaptation with tail-only tables
    JanusPlus,          // exploration extended to the next-to-head function
    EarlyBindP99,       // static per-function sizes minimizing Σk at the tail
    EarlyBindIdentical, // static identical size for every function
    Optimal,            // per-request hindsight exhaustive lower bound
};

const char* to_string(Policy policy);
std::optional<Policy> policy_from_string(const std::string& name);
bool policy_uses_tables(Policy policy);
/// Exploration mode whose tables the policy expects (table policies only).
ExplorationMode exploration_mode_for(Policy policy);

struct FunctionOutcome {
    Millicores alloc = 0;
    Millis latency_ms = 0;
    DecisionSource source = DecisionSource::Hit;
    int percentile = 0; // sizing percentile when statically known, else 0
};

struct RequestTrace {
    std::uint64_t request = 0;
    std::vector<FunctionOutcome> functions;
    Millis end_to_end_ms = 0;
    double slack = 0.0; // 1 − end_to_end/SLO
    double total_millicore_ms = 0.0; // Σ alloc_i · latency_i
    bool slo_met = false;
};

struct PolicyAggregates {
    Millis p50_ms = 0;
    Millis p95_ms = 0;
    Millis p99_ms = 0;
    double violation_rate = 0.0;
    double mean_millicore_ms = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    double miss_rate = 0.0; // misses / lookups, 0 when no lookups
};

struct SimReport {
    std::string policy;
    std::string workflow;
    Millis slo_ms = 0;
    std::uint64_t seed = 0;
    std::vector<RequestTrace> traces;
    PolicyAggregates aggregates;
};

struct SimConfig {
    WorkflowSpec workflow;
    DynamicsModel dynamics;
    std::uint64_t n_requests = 1000;
    std::uint64_t seed = 1;
    Millis arrival_interval_ms = 0;
    double weight = 1.0; // head weight whose tables the adapter consults
    MissPolicy miss_policy = MissPolicy::ScaleToMax;
    double miss_threshold = 0.01;
    /// Observer for adapter decisions (invocation, suffix, budget, decision);
    /// purely informational, not part of any report.
    std::function<void(std::uint64_t, int, Millis, const AdaptationDecision&)>
        decision_sink;
};

/// Thrown when a policy's static sizing cannot meet the SLO.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Runs one policy over the request stream. Table policies require `tables`
/// synthesized with the matching exploration mode. Deterministic in
/// (config, seed). Returns the full per-request trace plus aggregates.
SimReport run_policy(Policy policy, const SimConfig& config,
                     const ProfileSet& profiles,
                     const std::vector<HintsTable>* tables = nullptr,
                     Adapter* adapter = nullptr);

/// Static per-function sizes minimizing Σk subject to Σ L_i(tail,k_i) ≤ slo.
/// Throws InfeasibleError when even all-max cannot meet it.
std::vector<Millicores> early_bind_p99_sizes(
    const std::vector<const LatencyProfile*>& chain, Millis slo_ms);

/// Smallest identical size with Σ L_i(tail,k) ≤ slo.
Millicores early_bind_identical_size(
    const std::vector<const LatencyProfile*>& chain, Millis slo_ms);

/// Recomputes aggregates from traces (used by report validation).
PolicyAggregates aggregate_traces(const std::vector<RequestTrace>& traces,
                                  std::uint64_t hits, std::uint64_t misses);

} // namespace latebind

#endif // LATEBIND_SIMULATE_HPP
