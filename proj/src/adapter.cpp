#include "latebind/adapter.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace latebind {

const char* to_string(DecisionSource source) {
    switch (source) {
        case DecisionSource::Hit: return "hit";
        case DecisionSource::MissMaxScale: return "miss_max_scale";
        case DecisionSource::MissRegenerated: return "miss_regenerated";
    }
    return "unknown";
}

Adapter::Adapter(ResourceGrid grid, Options options, HintGenerator generator)
    : grid_(grid), options_(options), generator_(std::move(generator)) {
    grid_.validate();
    if (!(options_.miss_threshold > 0.0 && options_.miss_threshold < 1.0))
        throw std::invalid_argument(
            "adapter: miss threshold must lie in (0, 1)");
}

void Adapter::install_tables(std::vector<HintsTable> tables) {
    for (const HintsTable& table : tables) table.validate(grid_);
    std::unique_lock lock(mutex_);
    for (HintsTable& table : tables) {
        auto cell = std::make_shared<Cell>();
        HintsKey key = table.key;
        regen_flags_[key.workflow] = false;
        cell->table = std::make_shared<const HintsTable>(std::move(table));
        tables_[key] = std::move(cell); // fresh cell: counters reset
    }
}

std::shared_ptr<Adapter::Cell> Adapter::find_cell(const HintsKey& key) const {
    std::shared_lock lock(mutex_);
    auto it = tables_.find(key);
    return it == tables_.end() ? nullptr : it->second;
}

AdaptationDecision Adapter::adapt(const std::string& workflow, int suffix,
                                  Millis budget_ms, double weight, int batch) {
    if (budget_ms <= 0)
        throw std::invalid_argument("adapt: budget must be positive");
    const HintsKey key{workflow, suffix, weight, batch};

    // snapshot the cell and its current table; cell->table is written only
    // under the unique lock, so a lookup sees one consistent table
    std::shared_ptr<Cell> cell;
    std::shared_ptr<const HintsTable> table;
    {
        std::shared_lock lock(mutex_);
        auto it = tables_.find(key);
        if (it == tables_.end())
            throw std::invalid_argument("adapt: no hints table for " +
                                        key.to_string());
        cell = it->second;
        table = cell->table;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const HintRow* row = table->find(budget_ms);
    if (!row && budget_ms > table->t_max())
        row = &table->rows.back(); // loose budgets admit the cheapest rule
    const auto t1 = std::chrono::steady_clock::now();

    AdaptationDecision decision;
    decision.lookup_latency_us =
        std::chrono::duration<double, std::micro>(t1 - t0).count();

    if (row) {
        decision.head_size = row->head_size;
        decision.source = DecisionSource::Hit;
        cell->hits.fetch_add(1, std::memory_order_relaxed);
        return decision;
    }

    cell->misses.fetch_add(1, std::memory_order_relaxed);
    if (options_.miss_policy == MissPolicy::RegenerateOnSpot && generator_) {
        if (auto hint = generator_(key, budget_ms)) {
            // merge as a singleton row; the table is re-condensed only when
            // fresh tables are installed
            const HintRow fresh{budget_ms, budget_ms,
                                hint->allocation.front()};
            std::unique_lock lock(mutex_);
            auto patched = std::make_shared<HintsTable>(*cell->table);
            auto pos = std::upper_bound(
                patched->rows.begin(), patched->rows.end(), fresh,
                [](const HintRow& a, const HintRow& b) {
                    return a.t_start_ms < b.t_start_ms;
                });
            patched->rows.insert(pos, fresh);
            cell->table = std::move(patched);
            decision.head_size = fresh.head_size;
            decision.source = DecisionSource::MissRegenerated;
            return decision;
        }
    }
    decision.head_size = grid_.k_max;
    decision.source = DecisionSource::MissMaxScale;
    return decision;
}

void Adapter::begin_request(const std::string& workflow, std::uint64_t request,
                            Millis slo_ms) {
    std::lock_guard lock(requests_mutex_);
    residuals_[{workflow, request}] = slo_ms;
}

Millis Adapter::record_completion(const std::string& workflow,
                                  std::uint64_t request,
                                  Millis realized_latency_ms, bool last) {
    std::lock_guard lock(requests_mutex_);
    auto it = residuals_.find({workflow, request});
    if (it == residuals_.end())
        throw std::invalid_argument("record_completion: unknown request " +
                                    std::to_string(request) + " of " +
                                    workflow);
    it->second -= realized_latency_ms;
    const Millis residual = it->second;
    if (last) residuals_.erase(it);
    return residual;
}

bool Adapter::check_regen(const std::string& workflow) {
    const Counters c = workflow_counters(workflow);
    if (c.lookups() == 0)
        throw std::logic_error("check_regen: no lookups recorded for " +
                               workflow);
    const double rate =
        static_cast<double>(c.misses) / static_cast<double>(c.lookups());
    if (rate > options_.miss_threshold) {
        std::unique_lock lock(mutex_);
        regen_flags_[workflow] = true;
        return true;
    }
    return false;
}

bool Adapter::regen_flag(const std::string& workflow) const {
    std::shared_lock lock(mutex_);
    auto it = regen_flags_.find(workflow);
    return it != regen_flags_.end() && it->second;
}

Adapter::Counters Adapter::counters(const HintsKey& key) const {
    auto cell = find_cell(key);
    if (!cell)
        throw std::invalid_argument("counters: no hints table for " +
                                    key.to_string());
    return {cell->hits.load(std::memory_order_relaxed),
            cell->misses.load(std::memory_order_relaxed)};
}

Adapter::Counters Adapter::workflow_counters(const std::string& workflow) const {
    std::shared_lock lock(mutex_);
    Counters total;
    for (const auto& [key, cell] : tables_) {
        if (key.workflow != workflow) continue;
        total.hits += cell->hits.load(std::memory_order_relaxed);
        total.misses += cell->misses.load(std::memory_order_relaxed);
    }
    return total;
}

} // namespace latebind
