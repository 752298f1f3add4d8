#ifndef LATEBIND_PROFILE_HPP
#define LATEBIND_PROFILE_HPP

#include <map>
#include <utility>
#include <vector>

#include "latebind/types.hpp"

// Latency profiling: empirical percentile surfaces L(p, k) per
// (function, batch), plus the timeout and resilience metrics derived from
// them. Surfaces are monotone by construction: non-decreasing in the
// percentile, non-increasing in the allocated size.

namespace latebind {

/// Raw execution-time observations per grid size for one (function, batch).
struct LatencySamples {
    FunctionId function;
    int batch = 1;
    std::map<Millicores, std::vector<Millis>> by_size;

    std::size_t total_count() const;
};

/// Empirical latency surface L(p, k) over the full grid cross product.
class LatencyProfile {
  public:
    /// `surface` is row-major over (percentile index, size index). Throws if
    /// the monotonicity invariants or dimensions are violated.
    LatencyProfile(FunctionId function, int batch, ResourceGrid resources,
                   PercentileGrid percentiles, std::vector<Millis> surface);

    const FunctionId& function() const { return function_; }
    int batch() const { return batch_; }
    const ResourceGrid& resources() const { return resources_; }
    const PercentileGrid& percentiles() const { return percentiles_; }

    /// L(p, k); throws on off-grid arguments.
    Millis latency(int percentile, Millicores k) const;
    Millis tail_latency(Millicores k) const {
        return latency(percentiles_.tail(), k);
    }
    /// L(p, k) by grid indices, unchecked bounds.
    Millis at(int p_index, int k_index) const {
        return surface_[static_cast<std::size_t>(p_index) * k_count_ + k_index];
    }

    bool operator==(const LatencyProfile&) const = default;

  private:
    FunctionId function_;
    int batch_;
    ResourceGrid resources_;
    PercentileGrid percentiles_;
    std::size_t k_count_;
    std::vector<Millis> surface_;
};

/// Builds the surface from samples: nearest-rank percentile per size, then
/// pool-adjacent-violators isotonic correction across sizes per percentile
/// row (raw empirical percentiles can be non-monotone in k under noise;
/// the resilience metric requires L non-increasing in k). Deterministic.
/// Throws when a grid size is missing or a sample list is smaller than
/// `min_samples`.
LatencyProfile extract_profile(const LatencySamples& samples,
                               const ResourceGrid& resources,
                               const PercentileGrid& percentiles,
                               int min_samples = 100);

/// D(p,k) = L(tail,k) − L(p,k): the latency underestimation risk of sizing
/// at percentile p instead of the tail. Non-negative.
Millis timeout(const LatencyProfile& profile, int percentile, Millicores k);

/// R(p,k) = L(p,k) − L(p,K_max): the reduction obtainable by scaling to the
/// maximum size, i.e. the budget available to absorb upstream timeouts.
/// Non-negative.
Millis resilience(const LatencyProfile& profile, int percentile, Millicores k);

/* ------------------------------------------------------------------ */

/// Immutable collection of profiles keyed by (function, batch).
class ProfileSet {
  public:
    void add(LatencyProfile profile);
    bool contains(const FunctionId& fn, int batch) const;
    /// Throws std::out_of_range with the missing key named.
    const LatencyProfile& get(const FunctionId& fn, int batch) const;

    /// Profiles for a chain of functions at one batch size, in chain order.
    /// Verifies all share the same grids.
    std::vector<const LatencyProfile*> chain(const std::vector<FunctionId>& fns,
                                             int batch) const;

    const std::map<std::pair<FunctionId, int>, LatencyProfile>& all() const {
        return profiles_;
    }
    bool empty() const { return profiles_.empty(); }

  private:
    std::map<std::pair<FunctionId, int>, LatencyProfile> profiles_;
};

} // namespace latebind

#endif // LATEBIND_PROFILE_HPP
