#include "latebind/synthesize.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>

namespace latebind {

namespace {

constexpr std::int32_t kInfCost = std::numeric_limits<std::int32_t>::max() / 2;

/// Exact-total-latency DP for a function chain sized at the tail percentile:
/// for every achievable Σ L_i(tail, k_i) = ℓ, the minimum Σ k_i. Feasible
/// windows on ℓ (latency cap from the budget, latency floor from the
/// timeout-within-resilience constraint) are answered by an O(1)
/// range-argmin over the first stage.
class TailChainDp {
  public:
    TailChainDp(std::span<const LatencyProfile* const> chain,
                const ResourceGrid& grid, const PercentileGrid& percentiles) {
        const int k_count = grid.size();
        const int tail_idx = percentiles.index_of(percentiles.tail());

        tail_rows_.resize(chain.size());
        for (std::size_t j = 0; j < chain.size(); ++j) {
            tail_rows_[j].resize(static_cast<std::size_t>(k_count));
            for (int ki = 0; ki < k_count; ++ki)
                tail_rows_[j][static_cast<std::size_t>(ki)] =
                    chain[j]->at(tail_idx, ki);
        }
        sizes_ = grid.sizes();

        // stage j covers functions j..end; stage m is the empty suffix
        stages_.resize(chain.size() + 1);
        stages_.back() = Stage{0, {0}};
        for (std::size_t j = chain.size(); j-- > 0;) {
            const Stage& next = stages_[j + 1];
            const auto& row = tail_rows_[j];
            Stage cur;
            const Millis l_fast = row.back();  // tail latency at k_max
            const Millis l_slow = row.front(); // tail latency at k_min
            cur.lo = next.lo + l_fast;
            const Millis hi = next.lo + static_cast<Millis>(next.cost.size()) -
                              1 + l_slow;
            cur.cost.assign(static_cast<std::size_t>(hi - cur.lo + 1),
                            kInfCost);
            for (int ki = 0; ki < k_count; ++ki) {
                const Millis lk = row[static_cast<std::size_t>(ki)];
                const std::int32_t k = sizes_[static_cast<std::size_t>(ki)];
                for (std::size_t n = 0; n < next.cost.size(); ++n) {
                    if (next.cost[n] >= kInfCost) continue;
                    const Millis total = next.lo + static_cast<Millis>(n) + lk;
                    auto& slot =
                        cur.cost[static_cast<std::size_t>(total - cur.lo)];
                    slot = std::min(slot, next.cost[n] + k);
                }
            }
            stages_[j] = std::move(cur);
        }
        build_rmq();
    }

    /// Smallest achievable total tail latency (everything at k_max).
    Millis min_total() const { return stages_.front().lo; }
    Millis max_total() const {
        return stages_.front().lo +
               static_cast<Millis>(stages_.front().cost.size()) - 1;
    }

    struct Best {
        Millis total_latency;
        std::int32_t cost;
    };

    /// Minimum chain cost with total tail latency in [lo, hi]; ties resolve
    /// to the smaller total. nullopt when the window holds no feasible total.
    std::optional<Best> query(Millis lo, Millis hi) const {
        lo = std::max(lo, min_total());
        hi = std::min(hi, max_total());
        if (lo > hi) return std::nullopt;
        const auto a = static_cast<std::size_t>(lo - stages_.front().lo);
        const auto b = static_cast<std::size_t>(hi - stages_.front().lo);
        const std::size_t idx = rmq_argmin(a, b);
        const std::int32_t c = stages_.front().cost[idx];
        if (c >= kInfCost) return std::nullopt;
        return Best{stages_.front().lo + static_cast<Millis>(idx), c};
    }

    /// The allocation behind a queried (total, cost) point: per stage the
    /// smallest size achieving the optimum.
    std::vector<Millicores> reconstruct(Millis total) const {
        std::vector<Millicores> alloc;
        alloc.reserve(stages_.size() - 1);
        Millis rem = total;
        for (std::size_t j = 0; j + 1 < stages_.size(); ++j) {
            const Stage& cur = stages_[j];
            const Stage& next = stages_[j + 1];
            const std::int32_t target =
                cur.cost[static_cast<std::size_t>(rem - cur.lo)];
            bool found = false;
            for (std::size_t ki = 0; ki < sizes_.size(); ++ki) {
                const Millis lk = tail_rows_[j][ki];
                const Millis n = rem - lk - next.lo;
                if (n < 0 || n >= static_cast<Millis>(next.cost.size()))
                    continue;
                const std::int32_t c = next.cost[static_cast<std::size_t>(n)];
                if (c >= kInfCost) continue;
                if (c + sizes_[ki] == target) {
                    alloc.push_back(sizes_[ki]);
                    rem -= lk;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw std::logic_error("tail-chain DP reconstruction failed");
        }
        return alloc;
    }

  private:
    struct Stage {
        Millis lo = 0;
        std::vector<std::int32_t> cost; // by total − lo; kInfCost = unreachable
    };

    void build_rmq() {
        const auto& base = stages_.front().cost;
        const std::size_t n = base.size();
        levels_ = 1;
        while ((std::size_t{1} << levels_) <= n) ++levels_;
        rmq_.assign(levels_, std::vector<std::uint32_t>(n));
        for (std::size_t i = 0; i < n; ++i)
            rmq_[0][i] = static_cast<std::uint32_t>(i);
        for (std::size_t lvl = 1; lvl < levels_; ++lvl) {
            const std::size_t half = std::size_t{1} << (lvl - 1);
            for (std::size_t i = 0; i + (std::size_t{1} << lvl) <= n; ++i) {
                const std::uint32_t a = rmq_[lvl - 1][i];
                const std::uint32_t b = rmq_[lvl - 1][i + half];
                rmq_[lvl][i] = pick(a, b);
            }
        }
    }

    std::uint32_t pick(std::uint32_t a, std::uint32_t b) const {
        const auto& base = stages_.front().cost;
        if (base[a] != base[b]) return base[a] < base[b] ? a : b;
        return a < b ? a : b; // equal cost → smaller total latency
    }

    std::size_t rmq_argmin(std::size_t a, std::size_t b) const {
        std::size_t lvl = 0;
        while ((std::size_t{2} << lvl) <= b - a + 1) ++lvl;
        const std::size_t half = std::size_t{1} << lvl;
        return pick(rmq_[lvl][a], rmq_[lvl][b + 1 - half]);
    }

    std::vector<std::vector<Millis>> tail_rows_; // per function, by size index
    std::vector<Millicores> sizes_;
    std::vector<Stage> stages_;
    std::vector<std::vector<std::uint32_t>> rmq_;
    std::size_t levels_ = 0;
};

/// Shared per-chain state for solving many budgets of one sub-workflow.
class ChainSolver {
  public:
    ChainSolver(ProfileChain chain, const SynthOptions& options)
        : chain_(chain.begin(), chain.end()),
          weight_(options.weight),
          mode_(options.mode) {
        if (chain_.empty())
            throw std::invalid_argument("generate: empty sub-workflow");
        grid_ = chain_[0]->resources();
        percentiles_ = chain_[0]->percentiles();
        n_ = static_cast<int>(chain_.size());
        k_count_ = grid_.size();
        sizes_ = grid_.sizes();
        tail_idx_ = percentiles_.index_of(percentiles_.tail());

        if (n_ >= 2) {
            downstream_.emplace(
                std::span<const LatencyProfile* const>(chain_).subspan(1),
                grid_, percentiles_);
            if (mode_ == ExplorationMode::HeadAndNext && n_ >= 3)
                downstream2_.emplace(
                    std::span<const LatencyProfile* const>(chain_).subspan(2),
                    grid_, percentiles_);
        }
    }

    int chain_length() const { return n_; }

    /// Budgets below this are infeasible in every mode; in the head-only and
    /// tail-only modes the bound is tight (everything at k_max, tail
    /// percentile).
    Millis all_max_tail_latency() const {
        Millis sum = 0;
        for (int j = 0; j < n_; ++j)
            sum += chain_[static_cast<std::size_t>(j)]->at(tail_idx_,
                                                           k_count_ - 1);
        return sum;
    }

    bool exact_feasibility_bound() const {
        return mode_ != ExplorationMode::HeadAndNext || n_ <= 2;
    }

    std::optional<RawHint> solve(Millis t) const {
        if (t <= 0) return std::nullopt;
        if (n_ == 1) {
            // weight does not change the choice here, only the reported
            // objective value (the downstream terms vanish)
            auto k = min_resource(*chain_[0], t);
            if (!k) return std::nullopt;
            RawHint hint;
            hint.budget_ms = t;
            hint.head_percentile = percentiles_.tail();
            hint.next_percentile = percentiles_.tail();
            hint.allocation = {*k};
            hint.objective = weight_ * static_cast<double>(*k);
            return hint;
        }
        if (mode_ == ExplorationMode::HeadAndNext && n_ >= 3)
            return solve_two_level(t);
        return solve_head(t);
    }

  private:
    Millis head_latency(int pi, int ki) const { return chain_[0]->at(pi, ki); }

    struct Candidate {
        double objective;
        std::int64_t total_k;
        Millicores k1;
        int p1;
        int p2;
        Millis downstream_total; // tail-latency total behind the DP pick
        Millicores k2 = 0;       // two-level mode only

        bool better_than(const Candidate& other) const {
            if (objective != other.objective)
                return objective < other.objective;
            if (total_k != other.total_k) return total_k < other.total_k;
            if (k1 != other.k1) return k1 < other.k1;
            if (p1 != other.p1) return p1 > other.p1;
            if (p2 != other.p2) return p2 > other.p2;
            return downstream_total < other.downstream_total;
        }
    };

    double objective_value(double weight, Millicores k1, int p,
                           std::int64_t downstream_k) const {
        const double prob = static_cast<double>(p) / 100.0;
        return weight * static_cast<double>(k1) +
               prob * static_cast<double>(downstream_k) +
               (1.0 - prob) * static_cast<double>(n_ - 1) *
                   static_cast<double>(grid_.k_max);
    }

    std::optional<RawHint> solve_head(Millis t) const {
        const Millis c_max = downstream_->min_total();
        std::optional<Candidate> best;
        const bool tail_only = mode_ == ExplorationMode::TailOnly;
        const int p_begin = tail_only ? tail_idx_ : 0;
        for (int pi = p_begin; pi <= tail_idx_; ++pi) {
            const int p = percentiles_.values[static_cast<std::size_t>(pi)];
            // explore_percentile: feasible at k_max for the whole remainder
            if (head_latency(pi, k_count_ - 1) + c_max > t) continue;
            for (int ki = 0; ki < k_count_; ++ki) {
                const Millis l1 = head_latency(pi, ki);
                const Millis d1 = head_latency(tail_idx_, ki) - l1;
                const auto hit = downstream_->query(c_max + d1, t - l1);
                if (!hit) continue;
                Candidate cand;
                cand.k1 = sizes_[static_cast<std::size_t>(ki)];
                cand.p1 = p;
                cand.p2 = percentiles_.tail();
                cand.downstream_total = hit->total_latency;
                cand.total_k = cand.k1 + hit->cost;
                cand.objective = objective_value(weight_, cand.k1, p, hit->cost);
                if (!best || cand.better_than(*best)) best = cand;
            }
        }
        if (!best) return std::nullopt;
        RawHint hint;
        hint.budget_ms = t;
        hint.head_percentile = best->p1;
        hint.next_percentile = best->p2;
        hint.allocation.push_back(best->k1);
        auto rest = downstream_->reconstruct(best->downstream_total);
        hint.allocation.insert(hint.allocation.end(), rest.begin(), rest.end());
        hint.objective = best->objective;
        return hint;
    }

    std::optional<RawHint> solve_two_level(Millis t) const {
        const LatencyProfile& second = *chain_[1];
        const Millis c3 = downstream2_->min_total();
        const Millis c_max = downstream_->min_total();
        std::optional<Candidate> best;
        for (int p1i = 0; p1i <= tail_idx_; ++p1i) {
            const int p1 = percentiles_.values[static_cast<std::size_t>(p1i)];
            if (head_latency(p1i, k_count_ - 1) + c_max > t) continue;
            for (int k1i = 0; k1i < k_count_; ++k1i) {
                const Millis l1 = head_latency(p1i, k1i);
                const Millis d1 = head_latency(tail_idx_, k1i) - l1;
                const Millis after1 = t - l1;
                if (after1 < c3 + second.at(tail_idx_, k_count_ - 1)) continue;
                for (int p2i = 0; p2i <= tail_idx_; ++p2i) {
                    const int p2 =
                        percentiles_.values[static_cast<std::size_t>(p2i)];
                    for (int k2i = 0; k2i < k_count_; ++k2i) {
                        const Millis l2 = second.at(p2i, k2i);
                        const Millis d2 = second.at(tail_idx_, k2i) - l2;
                        const Millis r2 = l2 - second.at(p2i, k_count_ - 1);
                        const Millis lo = c3 + std::max(d2, d1 - r2);
                        const auto hit = downstream2_->query(lo, after1 - l2);
                        if (!hit) continue;
                        Candidate cand;
                        cand.k1 = sizes_[static_cast<std::size_t>(k1i)];
                        cand.k2 = sizes_[static_cast<std::size_t>(k2i)];
                        cand.p1 = p1;
                        cand.p2 = p2;
                        cand.downstream_total = hit->total_latency;
                        cand.total_k = cand.k1 + cand.k2 + hit->cost;
                        cand.objective = objective_value(
                            weight_, cand.k1, p1, cand.k2 + hit->cost);
                        if (!best || cand.better_than(*best)) best = cand;
                    }
                }
            }
        }
        if (!best) return std::nullopt;
        RawHint hint;
        hint.budget_ms = t;
        hint.head_percentile = best->p1;
        hint.next_percentile = best->p2;
        hint.allocation.push_back(best->k1);
        hint.allocation.push_back(best->k2);
        auto rest = downstream2_->reconstruct(best->downstream_total);
        hint.allocation.insert(hint.allocation.end(), rest.begin(), rest.end());
        hint.objective = best->objective;
        return hint;
    }

    std::vector<const LatencyProfile*> chain_;
    double weight_;
    ExplorationMode mode_;
    ResourceGrid grid_;
    PercentileGrid percentiles_;
    int n_ = 0;
    int k_count_ = 0;
    int tail_idx_ = 0;
    std::vector<Millicores> sizes_;
    std::optional<TailChainDp> downstream_;  // functions 2..N
    std::optional<TailChainDp> downstream2_; // functions 3..N
};

} // namespace

std::pair<Millis, Millis> budget_range(ProfileChain chain) {
    if (chain.empty())
        throw std::invalid_argument("budget_range: empty sub-workflow");
    Millis t_min = 0;
    Millis t_max = 0;
    for (const LatencyProfile* profile : chain) {
        const auto& grid = profile->resources();
        const auto& pct = profile->percentiles();
        t_min += profile->latency(pct.lowest(), grid.k_max);
        t_max += profile->latency(pct.tail(), grid.k_min);
    }
    return {t_min, t_max};
}

std::optional<Millicores> min_resource(const LatencyProfile& profile,
                                       Millis t) {
    if (t <= 0)
        throw std::invalid_argument("min_resource: budget must be positive");
    for (Millicores k : profile.resources().sizes())
        if (profile.tail_latency(k) <= t) return k;
    return std::nullopt;
}

std::vector<int> explore_percentile(ProfileChain chain, Millis t) {
    if (chain.size() < 2)
        throw std::invalid_argument(
            "explore_percentile: needs a sub-workflow of length >= 2");
    const auto& pct = chain[0]->percentiles();
    const Millicores k_max = chain[0]->resources().k_max;
    Millis rest = 0;
    for (std::size_t i = 1; i < chain.size(); ++i)
        rest += chain[i]->latency(pct.tail(), k_max);
    std::vector<int> result;
    for (int p : pct.values)
        if (chain[0]->latency(p, k_max) + rest <= t) result.push_back(p);
    return result;
}

std::optional<RawHint> generate(ProfileChain chain, Millis t,
                                const SynthOptions& options) {
    if (t <= 0)
        throw std::invalid_argument("generate: budget must be positive");
    return ChainSolver(chain, options).solve(t);
}

std::size_t RawHintTable::feasible_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.has_value() ? 1 : 0;
    return n;
}

const std::optional<RawHint>& RawHintTable::at_budget(Millis t) const {
    if (t < t_min || t > t_max || (t - t_min) % step_ms != 0)
        throw std::invalid_argument("budget " + std::to_string(t) +
                                    " is not on the table's budget ladder");
    return entries[static_cast<std::size_t>((t - t_min) / step_ms)];
}

RawHintTable generate_table(ProfileChain chain, const SynthOptions& options) {
    if (options.step_ms < 1)
        throw std::invalid_argument("generate_table: step must be >= 1");
    const ChainSolver solver(chain, options);
    auto [t_min, t_max] = budget_range(chain);

    RawHintTable table;
    table.t_min = t_min;
    table.t_max = t_max;
    table.step_ms = options.step_ms;
    const auto count =
        static_cast<std::size_t>((t_max - t_min) / options.step_ms) + 1;
    table.entries.resize(count);

    // Feasibility is upward-closed in the budget, so everything below the
    // first feasible ladder point stays nullopt.
    std::size_t first = count;
    if (solver.exact_feasibility_bound()) {
        const Millis bound = solver.all_max_tail_latency();
        if (bound <= t_max) {
            const Millis offset = bound - t_min;
            first = offset <= 0 ? 0
                                : static_cast<std::size_t>(
                                      (offset + options.step_ms - 1) /
                                      options.step_ms);
        }
    } else {
        std::size_t lo = 0, hi = count;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (solver.solve(table.budget_at(mid)))
                hi = mid;
            else
                lo = mid + 1;
        }
        first = lo;
    }

    if (first < count) {
        const int jobs = std::max(1, options.jobs);
        auto worker = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                table.entries[i] = solver.solve(table.budget_at(i));
        };
        if (jobs == 1 || count - first < 256) {
            worker(first, count);
        } else {
            std::vector<std::thread> threads;
            const std::size_t span = count - first;
            const std::size_t chunk = (span + jobs - 1) / jobs;
            for (int j = 0; j < jobs; ++j) {
                const std::size_t begin = first + chunk * j;
                if (begin >= count) break;
                threads.emplace_back(worker, begin,
                                     std::min(count, begin + chunk));
            }
            for (auto& th : threads) th.join();
        }
    }
    return table;
}

HintsTable condense(const RawHintTable& raw, const HintsKey& key) {
    if (raw.entries.empty())
        throw std::invalid_argument("condense: empty raw table");
    std::size_t i = 0;
    while (i < raw.entries.size() && !raw.entries[i]) ++i;
    if (i == raw.entries.size())
        throw std::invalid_argument("condense: no feasible budget in range");

    HintsTable table;
    table.key = key;
    table.step_ms = raw.step_ms;
    for (std::size_t j = i; j < raw.entries.size(); ++j) {
        const auto& entry = raw.entries[j];
        if (!entry)
            throw std::invalid_argument(
                "condense: infeasible budget after a feasible one");
        const Millicores head = entry->allocation.front();
        const Millis t = raw.budget_at(j);
        if (!table.rows.empty() && table.rows.back().head_size == head)
            table.rows.back().t_end_ms = t;
        else
            table.rows.push_back({t, t, head});
    }
    return table;
}

double SynthStats::compression_ratio() const {
    if (raw_hints == 0) return 0.0;
    return 1.0 - static_cast<double>(condensed_rows) /
                     static_cast<double>(raw_hints);
}

std::vector<HintsTable> synthesize_all(const WorkflowSpec& workflow,
                                       const ProfileSet& profiles,
                                       const SynthOptions& options,
                                       SynthStats* stats) {
    const int n = workflow.length();
    if (n < 1)
        throw std::invalid_argument("synthesize_all: empty workflow");
    std::vector<HintsTable> tables;
    for (int suffix = 1; suffix <= n; ++suffix) {
        const std::vector<FunctionId> rest(
            workflow.functions.begin() + (suffix - 1),
            workflow.functions.end());
        const auto chain = profiles.chain(rest, workflow.batch);
        for (double weight : workflow.weights) {
            SynthOptions opts = options;
            opts.weight = weight;
            const RawHintTable raw = generate_table(chain, opts);
            HintsKey key{workflow.id, suffix, weight, workflow.batch};
            HintsTable table = condense(raw, key);
            table.validate(chain[0]->resources());
            if (stats) {
                stats->budgets_swept += raw.budget_count();
                stats->raw_hints += raw.feasible_count();
                stats->condensed_rows += table.rows.size();
            }
            tables.push_back(std::move(table));
        }
    }
    return tables;
}

} // namespace latebind
