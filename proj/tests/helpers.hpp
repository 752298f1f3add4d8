#ifndef LATEBIND_TESTS_HELPERS_HPP
#define LATEBIND_TESTS_HELPERS_HPP

#include <algorithm>
#include <functional>
#include <vector>

#include "latebind/profile.hpp"
#include "latebind/rng.hpp"
#include "latebind/types.hpp"

namespace helpers {

using latebind::LatencyProfile;
using latebind::Millicores;
using latebind::Millis;
using latebind::PercentileGrid;
using latebind::ResourceGrid;

/// Profile from an explicit L(p, k) function; the function must already be
/// monotone (checked by the profile constructor).
inline LatencyProfile make_profile(
    const std::string& fn, const ResourceGrid& grid,
    const PercentileGrid& pct,
    const std::function<Millis(int p, Millicores k)>& latency, int batch = 1) {
    std::vector<Millis> surface;
    surface.reserve(static_cast<std::size_t>(pct.size() * grid.size()));
    for (int p : pct.values)
        for (Millicores k : grid.sizes()) surface.push_back(latency(p, k));
    return LatencyProfile(fn, batch, grid, pct, std::move(surface));
}

/// Random surface, monotone by construction: a non-increasing base row for
/// the lowest percentile plus non-negative non-increasing increments per
/// percentile step.
inline LatencyProfile random_profile(const std::string& fn,
                                     const ResourceGrid& grid,
                                     const PercentileGrid& pct,
                                     latebind::Rng& rng, Millis base_lo = 50,
                                     Millis base_hi = 400) {
    const auto k_count = static_cast<std::size_t>(grid.size());
    const auto p_count = static_cast<std::size_t>(pct.size());

    auto non_increasing_row = [&](Millis lo, Millis hi) {
        std::vector<Millis> row(k_count);
        for (auto& v : row)
            v = lo + static_cast<Millis>(rng.next_u64() %
                                         static_cast<std::uint64_t>(
                                             hi - lo + 1));
        std::sort(row.rbegin(), row.rend());
        return row;
    };

    std::vector<Millis> surface;
    surface.reserve(p_count * k_count);
    std::vector<Millis> row = non_increasing_row(base_lo, base_hi);
    surface.insert(surface.end(), row.begin(), row.end());
    for (std::size_t pi = 1; pi < p_count; ++pi) {
        const std::vector<Millis> bump = non_increasing_row(0, base_hi / 4);
        for (std::size_t ki = 0; ki < k_count; ++ki) row[ki] += bump[ki];
        surface.insert(surface.end(), row.begin(), row.end());
    }
    return LatencyProfile(fn, 1, grid, pct, std::move(surface));
}

} // namespace helpers

#endif // LATEBIND_TESTS_HELPERS_HPP
