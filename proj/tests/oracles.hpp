#ifndef LATEBIND_TESTS_ORACLES_HPP
#define LATEBIND_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "latebind/profile.hpp"
#include "latebind/types.hpp"

// Independent oracles used to freeze expected values. These deliberately use
// the slowest, most literal formulation of each definition and share no code
// with the implementation paths they check.

namespace oracles {

using latebind::LatencyProfile;
using latebind::Millicores;
using latebind::Millis;

/// Nearest-rank percentile by sort-and-index. The rank ceil(p·n/100) is
/// taken in exact integer arithmetic (floating point rounds e.g.
/// 0.56·100 up to 57).
inline Millis nearest_rank(std::vector<Millis> samples, int percentile) {
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<long long>(samples.size());
    long long rank = (static_cast<long long>(percentile) * n + 100 - 1) / 100;
    if (rank < 1) rank = 1;
    return samples[static_cast<std::size_t>(rank - 1)];
}

/// Least-squares projection onto non-increasing sequences via the minimax
/// representation (reverse, isotonic-nondecreasing minimax, reverse).
inline std::vector<double> isotonic_non_increasing(std::vector<double> row) {
    std::reverse(row.begin(), row.end());
    const std::size_t n = row.size();
    std::vector<double> fit(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -1e300;
        for (std::size_t a = 0; a <= i; ++a) {
            double worst = 1e300;
            for (std::size_t b = i; b < n; ++b) {
                double sum = 0;
                for (std::size_t j = a; j <= b; ++j) sum += row[j];
                worst = std::min(worst,
                                 sum / static_cast<double>(b - a + 1));
            }
            best = std::max(best, worst);
        }
        fit[i] = best;
    }
    std::reverse(fit.begin(), fit.end());
    return fit;
}

/// One exhaustive-search hint: full cross product over the head percentile
/// and all sizes, checking the latency-budget and timeout-within-resilience
/// constraints literally, minimizing the expected-consumption objective.
/// Ties break by lower Σk, then lower k_1, then higher percentile.
struct BruteForceResult {
    double objective = 0.0;
    int head_percentile = 0;
    std::vector<Millicores> allocation;
    std::int64_t total_k = 0;
};

inline std::optional<BruteForceResult> brute_force_generate(
    const std::vector<const LatencyProfile*>& chain, Millis t, double weight) {
    const auto& grid = chain[0]->resources();
    const auto& pct = chain[0]->percentiles();
    const auto sizes = grid.sizes();
    const int tail = pct.tail();
    const auto n = chain.size();

    std::optional<BruteForceResult> best;
    auto consider = [&](int p, const std::vector<Millicores>& alloc) {
        // latency budget at the chosen percentiles
        Millis total_latency = chain[0]->latency(p, alloc[0]);
        for (std::size_t i = 1; i < n; ++i)
            total_latency += chain[i]->latency(tail, alloc[i]);
        if (total_latency > t) return;
        // head timeout within downstream resilience
        const Millis head_timeout =
            chain[0]->latency(tail, alloc[0]) - chain[0]->latency(p, alloc[0]);
        Millis total_resilience = 0;
        for (std::size_t i = 1; i < n; ++i)
            total_resilience += chain[i]->latency(tail, alloc[i]) -
                                chain[i]->latency(tail, grid.k_max);
        if (head_timeout > total_resilience) return;

        std::int64_t downstream_k = 0;
        for (std::size_t i = 1; i < n; ++i) downstream_k += alloc[i];
        const double prob = static_cast<double>(p) / 100.0;
        const double objective =
            weight * static_cast<double>(alloc[0]) +
            prob * static_cast<double>(downstream_k) +
            (1.0 - prob) * static_cast<double>(n - 1) *
                static_cast<double>(grid.k_max);
        const std::int64_t total_k = alloc[0] + downstream_k;

        if (!best || objective < best->objective ||
            (objective == best->objective &&
             (total_k < best->total_k ||
              (total_k == best->total_k &&
               (alloc[0] < best->allocation[0] ||
                (alloc[0] == best->allocation[0] &&
                 p > best->head_percentile)))))) {
            best = BruteForceResult{objective, p, alloc, total_k};
        }
    };

    std::vector<Millicores> alloc(n);
    auto walk = [&](auto&& self, std::size_t i, int p) -> void {
        if (i == n) {
            consider(p, alloc);
            return;
        }
        for (Millicores k : sizes) {
            alloc[i] = k;
            self(self, i + 1, p);
        }
    };
    if (n == 1) {
        for (Millicores k : sizes) {
            alloc[0] = k;
            consider(tail, alloc);
        }
    } else {
        for (int p : pct.values) walk(walk, 0, p);
    }
    return best;
}

/// Plain scan lookup with the same clamp-above-range rule as the adapter.
inline const latebind::HintRow* linear_scan(
    const std::vector<latebind::HintRow>& rows, Millis budget) {
    for (const auto& row : rows)
        if (budget >= row.t_start_ms && budget <= row.t_end_ms) return &row;
    if (!rows.empty() && budget > rows.back().t_end_ms) return &rows.back();
    return nullptr;
}

/// Run-length encoding of (budget, head size) pairs.
inline std::vector<latebind::HintRow> rle(
    const std::vector<std::pair<Millis, Millicores>>& points) {
    std::vector<latebind::HintRow> rows;
    for (const auto& [t, head] : points) {
        if (!rows.empty() && rows.back().head_size == head)
            rows.back().t_end_ms = t;
        else
            rows.push_back({t, t, head});
    }
    return rows;
}

} // namespace oracles

#endif // LATEBIND_TESTS_ORACLES_HPP
