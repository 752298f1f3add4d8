#ifndef LATEBIND_WORKLOADS_HPP
#define LATEBIND_WORKLOADS_HPP

#include <map>
#include <vector>

#include "latebind/profile.hpp"
#include "latebind/types.hpp"

// Calibrated synthetic function families. Each family has an Amdahl-style
// base latency curve (a serial part plus a part that scales inversely with
// the allocation, so resilience flattens at high sizes) and log-normal
// working-set noise calibrated to a target P99/P50 ratio.

namespace latebind {

struct FunctionFamily {
    FunctionId name;
    double serial_ms = 0.0;
    double parallel_ms = 0.0;
    Millicores k_ref = 1000; // size at which the parallel part costs parallel_ms
    /// Sub-linear speedup exponent: the parallel part scales with
    /// (k_ref/k)^exponent. 1.0 is ideal scaling; real functions sit below it
    /// (diminishing returns at larger allocations).
    double speedup_exponent = 1.0;
    double workset_sigma = 0.0;
    double workset_cap = 4.0;
    /// Expected P99/P50 sample ratio; generation verifies it within ±10%.
    double target_p99_p50 = 1.0;
    /// Latency multiplier per batch size (concurrency level).
    std::map<int, double> batch_scale{{1, 1.0}};
    /// Interference multiplier by co-location count (copied into dynamics
    /// models by scenario builders).
    std::vector<double> interference{1.0};

    void validate() const;
    double base_latency_ms(Millicores k, int batch) const;
    /// Sigma for which median·exp(sigma·z99)/median hits `ratio` at P99/P50.
    static double sigma_for_ratio(double ratio);
};

/// Deterministic samples for one (family, batch) over the grid. Throws when
/// the empirical P99/P50 ratio at k_min falls outside ±10% of the family's
/// target (e.g. the cap makes the band unreachable).
LatencySamples generate_samples(const FunctionFamily& family, int batch,
                                const ResourceGrid& grid, int n_per_size,
                                std::uint64_t seed);

} // namespace latebind

#endif // LATEBIND_WORKLOADS_HPP
