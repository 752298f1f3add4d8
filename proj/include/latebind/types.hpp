#ifndef LATEBIND_TYPES_HPP
#define LATEBIND_TYPES_HPP

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

// Shared domain types: the discrete resource/percentile grids, workflow
// descriptions, and condensed hint tables. Compute sizes are integer
// millicores and latencies integer milliseconds throughout, so table keys
// and lookups are exact.

namespace latebind {

using FunctionId = std::string;
using Millis     = std::int64_t; // milliseconds
using Millicores = int;          // compute units

/* ------------------------------------------------------------------ */
/*  Grids                                                              */
/* ------------------------------------------------------------------ */

/// Arithmetic ladder of allocatable compute sizes [k_min, k_max] step `step`.
struct ResourceGrid {
    Millicores k_min = 0;
    Millicores k_max = 0;
    Millicores step  = 1;

    /// Throws std::invalid_argument on violated invariants.
    void validate() const;

    int size() const { return static_cast<int>((k_max - k_min) / step) + 1; }
    Millicores at(int index) const { return k_min + step * index; }
    bool contains(Millicores k) const {
        return k >= k_min && k <= k_max && (k - k_min) % step == 0;
    }
    /// Index of `k` on the grid; throws if off-grid.
    int index_of(Millicores k) const;
    std::vector<Millicores> sizes() const;

    bool operator==(const ResourceGrid&) const = default;
};

/// Ordered integer percentiles in [1, 99]; the maximum is the SLO-defining
/// tail percentile and is always present.
struct PercentileGrid {
    std::vector<int> values;

    /// Percentiles {lo, lo+step, ...} ∩ [lo, hi], with `tail` appended when
    /// the ladder skips it.
    static PercentileGrid ranged(int lo, int hi, int step, int tail = 99);

    void validate() const;

    int size() const { return static_cast<int>(values.size()); }
    int tail() const { return values.back(); }
    int lowest() const { return values.front(); }
    bool contains(int p) const;
    /// Index of `p`; throws if absent.
    int index_of(int p) const;

    bool operator==(const PercentileGrid&) const = default;
};

/* ------------------------------------------------------------------ */
/*  Workflow                                                           */
/* ------------------------------------------------------------------ */

/// An ordered chain of functions with a latency SLO. `weights` lists the
/// head-function weights for which hint tables are maintained; `batch` is
/// the concurrency level the chain is served at.
struct WorkflowSpec {
    std::string id;
    std::vector<FunctionId> functions;
    Millis slo_ms = 0;
    std::vector<double> weights{1.0};
    int batch = 1;

    int length() const { return static_cast<int>(functions.size()); }
};

struct ValidationIssue {
    std::string field;
    std::string message;
};

struct ValidationResult {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string to_string() const;
};

/// Reports (never throws) every violated invariant of the spec and grids.
ValidationResult validate_spec(const WorkflowSpec& spec,
                               const ResourceGrid& resources,
                               const PercentileGrid& percentiles);

/* ------------------------------------------------------------------ */
/*  Hints                                                              */
/* ------------------------------------------------------------------ */

/// One condensed rule: budgets in [t_start_ms, t_end_ms] (inclusive both
/// ends) resize the head function to head_size.
struct HintRow {
    Millis t_start_ms = 0;
    Millis t_end_ms   = 0;
    Millicores head_size = 0;

    bool contains(Millis t) const { return t >= t_start_ms && t <= t_end_ms; }
    bool operator==(const HintRow&) const = default;
};

/// Identity of a hints table: the sub-workflow ⟨f_suffix,…,f_N⟩ of a
/// workflow, under a head weight and a batch size. `suffix` is 1-based.
struct HintsKey {
    std::string workflow;
    int suffix = 1;
    double weight = 1.0;
    int batch = 1;

    friend auto operator<=>(const HintsKey& a, const HintsKey& b) {
        return std::tie(a.workflow, a.suffix, a.weight, a.batch) <=>
               std::tie(b.workflow, b.suffix, b.weight, b.batch);
    }
    friend bool operator==(const HintsKey& a, const HintsKey& b) {
        return (a <=> b) == 0;
    }
    std::string to_string() const;
};

/// Condensed hints table. Synthesized tables are gap-free at `step_ms`
/// granularity over [t_min, t_max]; tables patched at runtime by
/// regenerate-on-spot may contain singleton rows outside that range.
struct HintsTable {
    HintsKey key;
    std::vector<HintRow> rows;
    Millis step_ms = 1;

    Millis t_min() const { return rows.front().t_start_ms; }
    Millis t_max() const { return rows.back().t_end_ms; }

    /// Binary search for the row containing `budget`; nullptr on miss.
    const HintRow* find(Millis budget) const;

    /// Full invariants of a synthesized table: sorted, pairwise disjoint,
    /// gap-free at step_ms, adjacent rows with distinct head sizes, head
    /// sizes on the grid. Throws std::invalid_argument on violation.
    void validate(const ResourceGrid& grid) const;
};

} // namespace latebind

#endif // LATEBIND_TYPES_HPP
