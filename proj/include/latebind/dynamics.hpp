#ifndef LATEBIND_DYNAMICS_HPP
#define LATEBIND_DYNAMICS_HPP

#include <map>
#include <vector>

#include "latebind/profile.hpp"
#include "latebind/types.hpp"

// Generative runtime-dynamics model for the simulator. A request's latency
// at size k is the profile's interpolated inverse CDF at the request's
// difficulty draw, optionally inflated by unprofiled working-set noise,
// a global latency scale (distribution shift), and co-location interference.

namespace latebind {

/// Extra log-normal working-set variance on top of the profiled
/// distribution. Multiplier = min(cap, exp(sigma·|z|)) ≥ 1.
struct WorksetNoise {
    double sigma = 0.0;
    double cap = 4.0;
};

struct DynamicsModel {
    /// Global multiplier on every realized latency; 1.0 = the profiled world.
    double latency_scale = 1.0;
    /// Interference multiplier by co-located in-flight instance count of the
    /// same function: index 0 ↔ count 1. Counts beyond the table (or beyond
    /// host_capacity) use the last entry. Non-decreasing, first entry 1.0.
    std::vector<double> interference{1.0};
    int host_capacity = 6;
    /// Per-function unprofiled working-set noise (defaults to none).
    std::map<FunctionId, WorksetNoise> workset;

    void validate() const;
    double interference_multiplier(int colocated) const;
    const WorksetNoise& workset_for(const FunctionId& fn) const;
};

struct ShiftSpec {
    double latency_scale = 1.0;
    double sigma_scale = 1.0;
};

/// Returns a modified copy; the identity shift returns an equal model.
DynamicsModel distribution_shift(const DynamicsModel& model,
                                 const ShiftSpec& shift);

/// Interpolated inverse CDF of the profiled distribution at size k.
/// `u` is clamped to the profiled percentile range [lowest/100, tail/100],
/// so draws never exceed the profiled tail. Monotone non-decreasing in u
/// and non-increasing in k.
double inverse_cdf(const LatencyProfile& profile, Millicores k, double u);

/// The per-invocation random draws, derived from (seed, invocation,
/// function) only — identical across policies and across candidate sizes
/// (common random numbers).
struct LatencyDraws {
    double u = 0.5;         // difficulty quantile in (0,1)
    double workset_z = 0.0; // standard normal for working-set noise
};
LatencyDraws make_draws(std::uint64_t seed, std::uint64_t invocation,
                        int function_index);

/// Realized latency in ms (≥ 1) for one invocation of `profile`'s function
/// at size k under the draws and the current co-location count.
Millis sample_latency(const DynamicsModel& model, const LatencyProfile& profile,
                      Millicores k, const LatencyDraws& draws,
                      int colocated = 1);

} // namespace latebind

#endif // LATEBIND_DYNAMICS_HPP
