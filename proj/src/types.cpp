#include "latebind/types.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace latebind {

void ResourceGrid::validate() const {
    if (k_min < 1)
        throw std::invalid_argument("resource grid: k_min must be >= 1");
    if (step < 1)
        throw std::invalid_argument("resource grid: step must be >= 1");
    if (k_min > k_max)
        throw std::invalid_argument("resource grid: k_min must be <= k_max");
    if ((k_max - k_min) % step != 0)
        throw std::invalid_argument(
            "resource grid: (k_max - k_min) must be divisible by step");
}

int ResourceGrid::index_of(Millicores k) const {
    if (!contains(k))
        throw std::invalid_argument("size " + std::to_string(k) +
                                    " is not on the resource grid");
    return static_cast<int>((k - k_min) / step);
}

std::vector<Millicores> ResourceGrid::sizes() const {
    std::vector<Millicores> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (Millicores k = k_min; k <= k_max; k += step) out.push_back(k);
    return out;
}

PercentileGrid PercentileGrid::ranged(int lo, int hi, int step, int tail) {
    PercentileGrid grid;
    for (int p = lo; p <= hi; p += step) grid.values.push_back(p);
    if (grid.values.empty() || grid.values.back() < tail)
        grid.values.push_back(tail);
    grid.validate();
    return grid;
}

void PercentileGrid::validate() const {
    if (values.empty())
        throw std::invalid_argument("percentile grid: no values");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 1 || values[i] > 99)
            throw std::invalid_argument(
                "percentile grid: values must lie in [1, 99], got " +
                std::to_string(values[i]));
        if (i > 0 && values[i] <= values[i - 1])
            throw std::invalid_argument(
                "percentile grid: values must be strictly increasing");
    }
}

bool PercentileGrid::contains(int p) const {
    return std::binary_search(values.begin(), values.end(), p);
}

int PercentileGrid::index_of(int p) const {
    auto it = std::lower_bound(values.begin(), values.end(), p);
    if (it == values.end() || *it != p)
        throw std::invalid_argument("percentile " + std::to_string(p) +
                                    " is not on the percentile grid");
    return static_cast<int>(it - values.begin());
}

std::string ValidationResult::to_string() const {
    std::ostringstream os;
    for (const auto& issue : issues) {
        if (os.tellp() > 0) os << "; ";
        os << issue.field << ": " << issue.message;
    }
    return os.str();
}

ValidationResult validate_spec(const WorkflowSpec& spec,
                               const ResourceGrid& resources,
                               const PercentileGrid& percentiles) {
    ValidationResult result;
    auto report = [&](std::string field, std::string message) {
        result.issues.push_back({std::move(field), std::move(message)});
    };

    if (spec.functions.empty()) report("functions", "N >= 1 required");
    for (const auto& fn : spec.functions)
        if (fn.empty()) report("functions", "function ids must be non-empty");
    if (spec.slo_ms <= 0) report("slo_ms", "SLO must be > 0");
    if (spec.weights.empty()) report("weights", "at least one weight required");
    for (double w : spec.weights)
        if (!(w >= 1.0))
            report("weights", "every weight must be >= 1");
    if (spec.batch < 1) report("batch", "batch must be a positive integer");

    try {
        resources.validate();
    } catch (const std::invalid_argument& e) {
        report("grid", e.what());
    }
    try {
        percentiles.validate();
    } catch (const std::invalid_argument& e) {
        report("percentiles", e.what());
    }
    return result;
}

std::string HintsKey::to_string() const {
    std::ostringstream os;
    os << workflow << "/suffix=" << suffix << "/weight=" << weight
       << "/batch=" << batch;
    return os.str();
}

const HintRow* HintsTable::find(Millis budget) const {
    // rows sorted by t_start_ms and pairwise disjoint
    auto it = std::upper_bound(
        rows.begin(), rows.end(), budget,
        [](Millis t, const HintRow& row) { return t < row.t_start_ms; });
    if (it == rows.begin()) return nullptr;
    --it;
    return it->contains(budget) ? &*it : nullptr;
}

void HintsTable::validate(const ResourceGrid& grid) const {
    if (rows.empty())
        throw std::invalid_argument("hints table " + key.to_string() +
                                    ": no rows");
    if (step_ms < 1)
        throw std::invalid_argument("hints table " + key.to_string() +
                                    ": step must be >= 1");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const HintRow& row = rows[i];
        if (row.t_start_ms > row.t_end_ms)
            throw std::invalid_argument("hints table " + key.to_string() +
                                        ": row with t_start > t_end");
        if (!grid.contains(row.head_size))
            throw std::invalid_argument("hints table " + key.to_string() +
                                        ": head size off the resource grid");
        if (i > 0) {
            if (rows[i - 1].t_end_ms + step_ms != row.t_start_ms)
                throw std::invalid_argument(
                    "hints table " + key.to_string() +
                    ": rows must tile the budget range without gaps");
            if (rows[i - 1].head_size == row.head_size)
                throw std::invalid_argument(
                    "hints table " + key.to_string() +
                    ": adjacent rows with equal head size (condensing "
                    "incomplete)");
        }
    }
}

} // namespace latebind
