#include "latebind/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace latebind {

std::size_t LatencySamples::total_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : by_size) n += v.size();
    return n;
}

LatencyProfile::LatencyProfile(FunctionId function, int batch,
                               ResourceGrid resources,
                               PercentileGrid percentiles,
                               std::vector<Millis> surface)
    : function_(std::move(function)),
      batch_(batch),
      resources_(resources),
      percentiles_(std::move(percentiles)),
      k_count_(static_cast<std::size_t>(resources.size())),
      surface_(std::move(surface)) {
    resources_.validate();
    percentiles_.validate();
    const std::size_t p_count = static_cast<std::size_t>(percentiles_.size());
    if (surface_.size() != p_count * k_count_)
        throw std::invalid_argument("latency profile " + function_ +
                                    ": surface does not cover the grids");
    for (std::size_t pi = 0; pi < p_count; ++pi) {
        for (std::size_t ki = 0; ki < k_count_; ++ki) {
            const Millis v = surface_[pi * k_count_ + ki];
            if (v <= 0)
                throw std::invalid_argument("latency profile " + function_ +
                                            ": latencies must be positive");
            if (pi > 0 && v < surface_[(pi - 1) * k_count_ + ki])
                throw std::invalid_argument(
                    "latency profile " + function_ +
                    ": surface must be non-decreasing in the percentile");
            if (ki > 0 && v > surface_[pi * k_count_ + ki - 1])
                throw std::invalid_argument(
                    "latency profile " + function_ +
                    ": surface must be non-increasing in the size");
        }
    }
}

Millis LatencyProfile::latency(int percentile, Millicores k) const {
    const int pi = percentiles_.index_of(percentile);
    const int ki = resources_.index_of(k);
    return at(pi, ki);
}

namespace {

/// Nearest-rank percentile: the ceil(p/100 · n)-th smallest sample.
Millis nearest_rank(const std::vector<Millis>& sorted, int percentile) {
    const auto n = static_cast<long long>(sorted.size());
    long long rank = (static_cast<long long>(percentile) * n + 99) / 100;
    rank = std::max<long long>(rank, 1);
    return sorted[static_cast<std::size_t>(rank - 1)];
}

/// Pool-adjacent-violators projection onto non-increasing sequences
/// (least squares, unit weights).
std::vector<double> isotonic_non_increasing(const std::vector<double>& row) {
    struct Block {
        double sum;
        int count;
        double mean() const { return sum / count; }
    };
    std::vector<Block> blocks;
    blocks.reserve(row.size());
    for (double v : row) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1 &&
               blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
            Block b = blocks.back();
            blocks.pop_back();
            blocks.back().sum += b.sum;
            blocks.back().count += b.count;
        }
    }
    std::vector<double> out;
    out.reserve(row.size());
    for (const Block& b : blocks)
        out.insert(out.end(), static_cast<std::size_t>(b.count), b.mean());
    return out;
}

} // namespace

LatencyProfile extract_profile(const LatencySamples& samples,
                               const ResourceGrid& resources,
                               const PercentileGrid& percentiles,
                               int min_samples) {
    resources.validate();
    percentiles.validate();

    const int k_count = resources.size();
    std::vector<std::vector<Millis>> sorted(static_cast<std::size_t>(k_count));
    for (int ki = 0; ki < k_count; ++ki) {
        const Millicores k = resources.at(ki);
        auto it = samples.by_size.find(k);
        if (it == samples.by_size.end())
            throw std::invalid_argument(
                "samples for " + samples.function + ": missing grid size " +
                std::to_string(k));
        if (static_cast<int>(it->second.size()) < min_samples)
            throw std::invalid_argument(
                "samples for " + samples.function + " at size " +
                std::to_string(k) + ": " + std::to_string(it->second.size()) +
                " samples, need >= " + std::to_string(min_samples));
        for (Millis v : it->second)
            if (v <= 0)
                throw std::invalid_argument("samples for " + samples.function +
                                            ": latencies must be positive");
        sorted[static_cast<std::size_t>(ki)] = it->second;
        std::sort(sorted[static_cast<std::size_t>(ki)].begin(),
                  sorted[static_cast<std::size_t>(ki)].end());
    }

    const int p_count = percentiles.size();
    std::vector<Millis> surface(
        static_cast<std::size_t>(p_count) * static_cast<std::size_t>(k_count));
    std::vector<double> row(static_cast<std::size_t>(k_count));
    for (int pi = 0; pi < p_count; ++pi) {
        for (int ki = 0; ki < k_count; ++ki)
            row[static_cast<std::size_t>(ki)] = static_cast<double>(
                nearest_rank(sorted[static_cast<std::size_t>(ki)],
                             percentiles.values[static_cast<std::size_t>(pi)]));
        const std::vector<double> corrected = isotonic_non_increasing(row);
        for (int ki = 0; ki < k_count; ++ki) {
            const auto v = static_cast<Millis>(
                std::llround(corrected[static_cast<std::size_t>(ki)]));
            surface[static_cast<std::size_t>(pi) * k_count + ki] =
                std::max<Millis>(v, 1);
        }
    }
    // Rounding the projections can nick the cross-percentile ordering by one
    // unit; restore it explicitly (order-preserving, at most +1 adjustments).
    for (int pi = 1; pi < p_count; ++pi)
        for (int ki = 0; ki < k_count; ++ki) {
            auto& v = surface[static_cast<std::size_t>(pi) * k_count + ki];
            v = std::max(v, surface[static_cast<std::size_t>(pi - 1) * k_count + ki]);
        }
    // The max() above can only raise values left-to-right within a row pair,
    // so re-assert non-increase in k the same way.
    for (int pi = 0; pi < p_count; ++pi)
        for (int ki = k_count - 2; ki >= 0; --ki) {
            auto& v = surface[static_cast<std::size_t>(pi) * k_count + ki];
            v = std::max(v, surface[static_cast<std::size_t>(pi) * k_count + ki + 1]);
        }

    return LatencyProfile(samples.function, samples.batch, resources,
                          percentiles, std::move(surface));
}

Millis timeout(const LatencyProfile& profile, int percentile, Millicores k) {
    return profile.latency(profile.percentiles().tail(), k) -
           profile.latency(percentile, k);
}

Millis resilience(const LatencyProfile& profile, int percentile, Millicores k) {
    return profile.latency(percentile, k) -
           profile.latency(percentile, profile.resources().k_max);
}

void ProfileSet::add(LatencyProfile profile) {
    auto key = std::make_pair(profile.function(), profile.batch());
    profiles_.insert_or_assign(std::move(key), std::move(profile));
}

bool ProfileSet::contains(const FunctionId& fn, int batch) const {
    return profiles_.count({fn, batch}) > 0;
}

const LatencyProfile& ProfileSet::get(const FunctionId& fn, int batch) const {
    auto it = profiles_.find({fn, batch});
    if (it == profiles_.end())
        throw std::out_of_range("no profile for function '" + fn +
                                "' at batch " + std::to_string(batch));
    return it->second;
}

std::vector<const LatencyProfile*> ProfileSet::chain(
    const std::vector<FunctionId>& fns, int batch) const {
    std::vector<const LatencyProfile*> out;
    out.reserve(fns.size());
    for (const auto& fn : fns) out.push_back(&get(fn, batch));
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out[i]->resources() == out[0]->resources()) ||
            !(out[i]->percentiles() == out[0]->percentiles()))
            throw std::invalid_argument(
                "profiles in a chain must share the same grids (" +
                out[0]->function() + " vs " + out[i]->function() + ")");
    }
    return out;
}

} // namespace latebind
