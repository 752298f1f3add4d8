#ifndef LATEBIND_ADAPTER_HPP
#define LATEBIND_ADAPTER_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "latebind/synthesize.hpp"
#include "latebind/types.hpp"

// Online decision engine. Given the remaining sub-workflow of an in-flight
// request and its residual time budget, looks up the head-function size in
// the installed hints tables, counts hits and misses, and flags table
// regeneration when the miss rate crosses the threshold.
//
// Lookups may run concurrently; table installation is atomic per key (a
// lookup sees the old or the new table, never a mixture).

namespace latebind {

enum class MissPolicy {
    ScaleToMax,       // miss → maximum available size
    RegenerateOnSpot, // miss → synthesize a hint for this budget, merge it in
};

enum class DecisionSource { Hit, MissMaxScale, MissRegenerated };

const char* to_string(DecisionSource source);

struct AdaptationDecision {
    Millicores head_size = 0;
    DecisionSource source = DecisionSource::Hit;
    double lookup_latency_us = 0.0; // measured wall time of the table search
};

class Adapter {
  public:
    struct Options {
        MissPolicy miss_policy = MissPolicy::ScaleToMax;
        double miss_threshold = 0.01;
    };

    /// On-the-spot hint synthesis for RegenerateOnSpot; returns nullopt when
    /// the budget is infeasible.
    using HintGenerator =
        std::function<std::optional<RawHint>(const HintsKey&, Millis budget)>;

    Adapter(ResourceGrid grid, Options options,
            HintGenerator generator = nullptr);

    /// Atomically replaces the tables for the keys present in `tables`;
    /// counters for replaced keys reset, regeneration flags of the affected
    /// workflows clear. Tables are validated first.
    void install_tables(std::vector<HintsTable> tables);

    /// Looks up the head size for the sub-workflow ⟨f_suffix..f_N⟩ under
    /// `budget`. Budgets above the covered range clamp to the last row (a
    /// loose budget admits the cheapest size); budgets below it or in a
    /// patched-table gap are misses handled per the miss policy. Throws on
    /// unknown key or non-positive budget.
    AdaptationDecision adapt(const std::string& workflow, int suffix,
                             Millis budget_ms, double weight = 1.0,
                             int batch = 1);

    /// Registers an in-flight request with its full SLO budget.
    void begin_request(const std::string& workflow, std::uint64_t request,
                       Millis slo_ms);

    /// Deducts a completed function's realized latency and returns the
    /// residual budget (may be ≤ 0: SLO already blown, downstream must scale
    /// to max). `last` closes the request.
    Millis record_completion(const std::string& workflow, std::uint64_t request,
                             Millis realized_latency_ms, bool last = false);

    /// True iff the workflow's cumulative miss rate exceeds the threshold;
    /// latches the regeneration flag. Throws std::logic_error when no lookup
    /// was recorded yet.
    bool check_regen(const std::string& workflow);
    bool regen_flag(const std::string& workflow) const;

    struct Counters {
        std::uint64_t hits = 0;
        std::uint64_t misses = 0;
        std::uint64_t lookups() const { return hits + misses; }
    };
    Counters counters(const HintsKey& key) const;
    Counters workflow_counters(const std::string& workflow) const;

    Millicores max_size() const { return grid_.k_max; }
    const Options& options() const { return options_; }

  private:
    struct Cell {
        std::shared_ptr<const HintsTable> table;
        std::atomic<std::uint64_t> hits{0};
        std::atomic<std::uint64_t> misses{0};
    };

    std::shared_ptr<Cell> find_cell(const HintsKey& key) const;

    ResourceGrid grid_;
    Options options_;
    HintGenerator generator_;

    mutable std::shared_mutex mutex_; // guards tables_ and regen_flags_
    std::map<HintsKey, std::shared_ptr<Cell>> tables_;
    std::map<std::string, bool> regen_flags_;

    mutable std::mutex requests_mutex_;
    std::map<std::pair<std::string, std::uint64_t>, Millis> residuals_;
};

} // namespace latebind

#endif // LATEBIND_ADAPTER_HPP
