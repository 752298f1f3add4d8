#include "latebind/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latebind/rng.hpp"

namespace latebind {

void DynamicsModel::validate() const {
    if (latency_scale <= 0.0)
        throw std::invalid_argument("dynamics: latency_scale must be > 0");
    if (interference.empty())
        throw std::invalid_argument("dynamics: interference curve is empty");
    if (interference.front() < 1.0)
        throw std::invalid_argument(
            "dynamics: interference at co-location 1 must be >= 1");
    for (std::size_t i = 1; i < interference.size(); ++i)
        if (interference[i] < interference[i - 1])
            throw std::invalid_argument(
                "dynamics: interference curve must be non-decreasing");
    if (host_capacity < 1)
        throw std::invalid_argument("dynamics: host capacity must be >= 1");
    for (const auto& [fn, noise] : workset) {
        if (noise.sigma < 0.0)
            throw std::invalid_argument("dynamics: workset sigma must be >= 0");
        if (noise.cap < 1.0)
            throw std::invalid_argument("dynamics: workset cap must be >= 1");
    }
}

double DynamicsModel::interference_multiplier(int colocated) const {
    int count = std::clamp(colocated, 1, host_capacity);
    count = std::min(count, static_cast<int>(interference.size()));
    return interference[static_cast<std::size_t>(count - 1)];
}

const WorksetNoise& DynamicsModel::workset_for(const FunctionId& fn) const {
    static const WorksetNoise none;
    auto it = workset.find(fn);
    return it == workset.end() ? none : it->second;
}

DynamicsModel distribution_shift(const DynamicsModel& model,
                                 const ShiftSpec& shift) {
    DynamicsModel out = model;
    out.latency_scale *= shift.latency_scale;
    for (auto& [fn, noise] : out.workset) noise.sigma *= shift.sigma_scale;
    out.validate();
    return out;
}

double inverse_cdf(const LatencyProfile& profile, Millicores k, double u) {
    const PercentileGrid& pct = profile.percentiles();
    const int ki = profile.resources().index_of(k);
    const double p = std::clamp(u * 100.0, static_cast<double>(pct.lowest()),
                                static_cast<double>(pct.tail()));
    // bracketing grid percentiles
    int hi = 0;
    while (pct.values[static_cast<std::size_t>(hi)] < p) ++hi;
    if (hi == 0) return static_cast<double>(profile.at(0, ki));
    const int lo = hi - 1;
    const double p_lo = pct.values[static_cast<std::size_t>(lo)];
    const double p_hi = pct.values[static_cast<std::size_t>(hi)];
    const double w = (p - p_lo) / (p_hi - p_lo);
    const double v_lo = static_cast<double>(profile.at(lo, ki));
    const double v_hi = static_cast<double>(profile.at(hi, ki));
    return v_lo + w * (v_hi - v_lo);
}

LatencyDraws make_draws(std::uint64_t seed, std::uint64_t invocation,
                        int function_index) {
    LatencyDraws draws;
    Rng rng(mix_seed(seed, invocation,
                     static_cast<std::uint64_t>(function_index) + 1));
    draws.u = rng.next_unit();
    draws.workset_z = rng.next_normal();
    return draws;
}

Millis sample_latency(const DynamicsModel& model, const LatencyProfile& profile,
                      Millicores k, const LatencyDraws& draws, int colocated) {
    double value = inverse_cdf(profile, k, draws.u);
    const WorksetNoise& noise = model.workset_for(profile.function());
    if (noise.sigma > 0.0)
        value *= std::min(noise.cap,
                          std::exp(noise.sigma * std::fabs(draws.workset_z)));
    value *= model.latency_scale;
    value *= model.interference_multiplier(colocated);
    return std::max<Millis>(1, static_cast<Millis>(std::llround(value)));
}

} // namespace latebind
