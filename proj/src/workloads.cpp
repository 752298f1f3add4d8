#include "latebind/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latebind/rng.hpp"

namespace latebind {

namespace {
// standard normal quantile at 0.99, for mapping a P99/P50 target onto the
// log-normal sigma
constexpr double kZ99 = 2.3263478740408408;
} // namespace

void FunctionFamily::validate() const {
    if (name.empty())
        throw std::invalid_argument("function family: empty name");
    if (serial_ms < 0 || parallel_ms < 0 || serial_ms + parallel_ms <= 0)
        throw std::invalid_argument("function family " + name +
                                    ": base curve must be positive");
    if (k_ref < 1)
        throw std::invalid_argument("function family " + name +
                                    ": k_ref must be >= 1");
    if (speedup_exponent <= 0.0 || speedup_exponent > 1.5)
        throw std::invalid_argument("function family " + name +
                                    ": speedup exponent must be in (0, 1.5]");
    if (workset_sigma < 0)
        throw std::invalid_argument("function family " + name +
                                    ": sigma must be >= 0");
    if (workset_cap < 1)
        throw std::invalid_argument("function family " + name +
                                    ": cap must be >= 1");
    if (target_p99_p50 < 1)
        throw std::invalid_argument("function family " + name +
                                    ": target P99/P50 must be >= 1");
    if (batch_scale.empty())
        throw std::invalid_argument("function family " + name +
                                    ": no batch scales");
    for (const auto& [b, f] : batch_scale)
        if (b < 1 || f <= 0)
            throw std::invalid_argument("function family " + name +
                                        ": invalid batch scale");
}

double FunctionFamily::base_latency_ms(Millicores k, int batch) const {
    auto it = batch_scale.find(batch);
    if (it == batch_scale.end())
        throw std::invalid_argument("function family " + name +
                                    ": no batch scale for batch " +
                                    std::to_string(batch));
    const double speedup =
        std::pow(static_cast<double>(k_ref) / static_cast<double>(k),
                 speedup_exponent);
    return (serial_ms + parallel_ms * speedup) * it->second;
}

double FunctionFamily::sigma_for_ratio(double ratio) {
    if (ratio < 1.0)
        throw std::invalid_argument("P99/P50 ratio must be >= 1");
    return std::log(ratio) / kZ99;
}

LatencySamples generate_samples(const FunctionFamily& family, int batch,
                                const ResourceGrid& grid, int n_per_size,
                                std::uint64_t seed) {
    family.validate();
    grid.validate();
    if (n_per_size < 100)
        throw std::invalid_argument("generate_samples: need >= 100 per size");

    LatencySamples samples;
    samples.function = family.name;
    samples.batch = batch;
    for (Millicores k : grid.sizes()) {
        Rng rng(mix_seed(seed, fnv1a(family.name.data(), family.name.size()),
                         static_cast<std::uint64_t>(batch),
                         static_cast<std::uint64_t>(k)));
        const double base = family.base_latency_ms(k, batch);
        auto& list = samples.by_size[k];
        list.reserve(static_cast<std::size_t>(n_per_size));
        for (int i = 0; i < n_per_size; ++i) {
            const double mult =
                std::min(family.workset_cap,
                         std::exp(family.workset_sigma * rng.next_normal()));
            list.push_back(std::max<Millis>(
                1, static_cast<Millis>(std::llround(base * mult))));
        }
    }

    // nearest-rank P99/P50 at the smallest size must stay within ±10% of the
    // family's target ratio
    {
        std::vector<Millis> sorted = samples.by_size.at(grid.k_min);
        std::sort(sorted.begin(), sorted.end());
        auto rank = [&](int p) {
            long long r = (static_cast<long long>(p) *
                               static_cast<long long>(sorted.size()) +
                           99) /
                          100;
            return sorted[static_cast<std::size_t>(std::max(r, 1LL) - 1)];
        };
        const double ratio = static_cast<double>(rank(99)) /
                             static_cast<double>(rank(50));
        const double lo = 0.9 * family.target_p99_p50;
        const double hi = 1.1 * family.target_p99_p50;
        if (ratio < lo || ratio > hi)
            throw std::runtime_error(
                "generate_samples: family " + family.name +
                " produced P99/P50 = " + std::to_string(ratio) +
                ", outside the target band [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]");
    }
    return samples;
}

} // namespace latebind
