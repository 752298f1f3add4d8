#ifndef LATEBIND_SYNTHESIZE_HPP
#define LATEBIND_SYNTHESIZE_HPP

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "latebind/profile.hpp"
#include "latebind/types.hpp"

// Offline hints synthesis. For every integer time budget in a sub-workflow's
// range, find the cheapest allocation whose execution fits the budget and
// whose head-function timeout stays within the downstream resilience, then
// condense the per-budget results into compact (t_start, t_end, head_size)
// rules.
//
// The head function may be sized at a percentile below the tail; all other
// functions are sized at the tail percentile. The objective for a chain of
// length N with head weight W, head percentile p and allocation ⟨k_1..k_N⟩ is
//
//     s = W·k_1 + (p/100)·Σ_{i≥2} k_i + (1 − p/100)·(N−1)·K_max
//
// i.e. the expected resource consumption: with probability p/100 the head
// finishes within its estimate and downstream runs as planned, otherwise
// downstream must be scaled to the maximum.

namespace latebind {

/// Which functions of a sub-workflow may explore sub-tail percentiles.
enum class ExplorationMode {
    TailOnly,    // head fixed at the tail percentile
    HeadOnly,    // head explores the percentile grid (default)
    HeadAndNext, // head and next-to-head both explore
};

struct SynthOptions {
    double weight = 1.0;
    ExplorationMode mode = ExplorationMode::HeadOnly;
    Millis step_ms = 1;
    int jobs = 1;
};

/// One per-budget rule before condensing. `allocation` covers the whole
/// sub-workflow, head first. For single-function chains the percentile is
/// the tail and the objective is the allocation itself.
struct RawHint {
    Millis budget_ms = 0;
    int head_percentile = 0;
    int next_percentile = 0; // tail unless mode == HeadAndNext
    std::vector<Millicores> allocation;
    double objective = 0.0;
};

using ProfileChain = std::span<const LatencyProfile* const>;

/// Budget range explored for a sub-workflow: from everything at the lowest
/// percentile and maximum size to everything at the tail percentile and
/// minimum size.
std::pair<Millis, Millis> budget_range(ProfileChain chain);

/// Smallest grid size whose tail latency fits `t`; nullopt when even the
/// maximum size does not.
std::optional<Millicores> min_resource(const LatencyProfile& profile, Millis t);

/// Head percentiles p with L_1(p,K_max) + Σ_{i≥2} L_i(tail,K_max) ≤ t.
/// Downward-closed by surface monotonicity; may be empty. Requires a chain
/// of length ≥ 2.
std::vector<int> explore_percentile(ProfileChain chain, Millis t);

/// Optimal hint for one budget, or nullopt when infeasible. Exact: equals
/// exhaustive search over (percentiles × allocations) under the latency and
/// timeout-within-resilience constraints. Ties broken by lower Σk, then
/// lower k_1, then higher head percentile (then higher next percentile,
/// smaller downstream tail-latency total, smallest allocation — a total,
/// documented order).
std::optional<RawHint> generate(ProfileChain chain, Millis t,
                                const SynthOptions& options);

/// Per-budget hints over a contiguous range at fixed step. Entries below the
/// first feasible budget are explicitly infeasible (nullopt).
struct RawHintTable {
    Millis t_min = 0;
    Millis t_max = 0;
    Millis step_ms = 1;
    std::vector<std::optional<RawHint>> entries;

    std::size_t budget_count() const { return entries.size(); }
    std::size_t feasible_count() const;
    Millis budget_at(std::size_t i) const {
        return t_min + step_ms * static_cast<Millis>(i);
    }
    /// Entry whose budget equals `t`; throws if off the sampled ladder.
    const std::optional<RawHint>& at_budget(Millis t) const;
};

/// Runs `generate` for every budget in the chain's range. `options.jobs`
/// parallelizes across budget blocks without affecting results.
RawHintTable generate_table(ProfileChain chain, const SynthOptions& options);

/// Run-length encodes consecutive budgets sharing a head size into rows,
/// dropping all non-head fields. Leading infeasible budgets are skipped; an
/// infeasible budget after a feasible one is an error (cannot happen for
/// tables produced by generate_table). Throws on empty/no-feasible input.
HintsTable condense(const RawHintTable& raw, const HintsKey& key);

struct SynthStats {
    std::uint64_t budgets_swept = 0;
    std::uint64_t raw_hints = 0;
    std::uint64_t condensed_rows = 0;
    /// 1 − condensed/raw; 0 when raw is empty.
    double compression_ratio() const;
};

/// Condensed tables for every suffix sub-workflow ⟨f_i..f_N⟩ of the
/// workflow, for every configured weight, at the workflow's batch size.
/// Sorted by (suffix, weight, batch). Accumulates stats when given.
std::vector<HintsTable> synthesize_all(const WorkflowSpec& workflow,
                                       const ProfileSet& profiles,
                                       const SynthOptions& options,
                                       SynthStats* stats = nullptr);

} // namespace latebind

#endif // LATEBIND_SYNTHESIZE_HPP
