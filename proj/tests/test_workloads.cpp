#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "latebind/demo.hpp"
#include "latebind/profile.hpp"
#include "latebind/workloads.hpp"

#include "oracles.hpp"

using namespace latebind;

namespace {
const ResourceGrid kGrid{1000, 3000, 100};
}

TEST_CASE("zero sigma produces exactly the base curve") {
    FunctionFamily family;
    family.name = "flat";
    family.serial_ms = 100;
    family.parallel_ms = 300;
    family.workset_sigma = 0.0;
    family.target_p99_p50 = 1.0;
    const LatencySamples samples =
        generate_samples(family, 1, kGrid, 200, 42);
    for (Millicores k : kGrid.sizes()) {
        const auto expected = static_cast<Millis>(
            std::llround(family.base_latency_ms(k, 1)));
        for (Millis v : samples.by_size.at(k)) CHECK(v == expected);
    }
    // P99/P50 of constant samples is exactly 1
    const auto& at_min = samples.by_size.at(kGrid.k_min);
    CHECK(oracles::nearest_rank(at_min, 99) ==
          oracles::nearest_rank(at_min, 50));
}

TEST_CASE("calibrated family hits its tail ratio band") {
    // target 1.56 with a +-10% acceptance band
    FunctionFamily family;
    family.name = "icl_like";
    family.serial_ms = 150;
    family.parallel_ms = 450;
    family.workset_sigma = FunctionFamily::sigma_for_ratio(1.56);
    family.target_p99_p50 = 1.56;
    const LatencySamples samples =
        generate_samples(family, 1, kGrid, 2000, 7);
    const auto& at_min = samples.by_size.at(kGrid.k_min);
    const double ratio =
        static_cast<double>(oracles::nearest_rank(at_min, 99)) /
        static_cast<double>(oracles::nearest_rank(at_min, 50));
    CHECK(ratio > 1.40);
    CHECK(ratio < 1.72);
}

TEST_CASE("unreachable band errors out") {
    FunctionFamily family;
    family.name = "capped";
    family.serial_ms = 500;
    family.parallel_ms = 0;
    family.workset_cap = 1.5; // cap forbids a 3x tail
    family.workset_sigma = FunctionFamily::sigma_for_ratio(3.0);
    family.target_p99_p50 = 3.0;
    CHECK_THROWS_AS(generate_samples(family, 1, kGrid, 500, 1),
                    std::runtime_error);
}

TEST_CASE("two seeds differ pointwise but share the distribution") {
    FunctionFamily family;
    family.name = "seeded";
    family.serial_ms = 200;
    family.parallel_ms = 400;
    family.workset_sigma = FunctionFamily::sigma_for_ratio(1.5);
    family.target_p99_p50 = 1.5;
    const LatencySamples a = generate_samples(family, 1, kGrid, 1000, 1);
    const LatencySamples b = generate_samples(family, 1, kGrid, 1000, 2);
    CHECK(a.by_size.at(1000) != b.by_size.at(1000));

    // Kolmogorov distance between the two empirical CDFs at k_min
    std::vector<Millis> xa = a.by_size.at(1000);
    std::vector<Millis> xb = b.by_size.at(1000);
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    double ks = 0.0;
    std::size_t i = 0, j = 0;
    while (i < xa.size() && j < xb.size()) {
        if (xa[i] <= xb[j])
            ++i;
        else
            ++j;
        ks = std::max(ks, std::fabs(static_cast<double>(i) / xa.size() -
                                    static_cast<double>(j) / xb.size()));
    }
    CHECK(ks < 0.08);

    // determinism: one seed, identical samples
    const LatencySamples a2 = generate_samples(family, 1, kGrid, 1000, 1);
    CHECK(a.by_size == a2.by_size);
}

TEST_CASE("latency never increases with the allocation") {
    for (const FunctionFamily& family : demo::families()) {
        // the base curve is strictly non-increasing
        double prev_base = 1e300;
        for (Millicores k : kGrid.sizes()) {
            const double base = family.base_latency_ms(k, 1);
            CHECK(base > 0);
            CHECK(base <= prev_base);
            prev_base = base;
        }
        // empirical means follow it up to sampling noise
        const LatencySamples samples =
            generate_samples(family, 1, kGrid, 2000, 11);
        double prev = 1e300;
        for (Millicores k : kGrid.sizes()) {
            const auto& list = samples.by_size.at(k);
            double mean = 0;
            for (Millis v : list) mean += static_cast<double>(v);
            mean /= static_cast<double>(list.size());
            CHECK(mean <= prev * 1.02);
            prev = mean;
        }
    }
}

TEST_CASE("batch scaling stretches the base curve") {
    const auto families = demo::families();
    const FunctionFamily& detect = families[0];
    CHECK(detect.base_latency_ms(1000, 2) >
          detect.base_latency_ms(1000, 1));
    CHECK_THROWS_AS(detect.base_latency_ms(1000, 9), std::invalid_argument);
}
