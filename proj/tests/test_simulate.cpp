#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latebind/demo.hpp"
#include "latebind/dynamics.hpp"
#include "latebind/io.hpp"
#include "latebind/simulate.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace latebind;

namespace {

const ProfileSet& demo_profiles() {
    static const ProfileSet set = demo::profiles();
    return set;
}

const std::vector<HintsTable>& demo_tables(ExplorationMode mode) {
    static std::map<int, std::vector<HintsTable>> cache;
    auto it = cache.find(static_cast<int>(mode));
    if (it == cache.end()) {
        SynthOptions options;
        options.mode = mode;
        options.jobs = 2;
        it = cache.emplace(static_cast<int>(mode),
                           synthesize_all(demo::workflow(), demo_profiles(),
                                          options))
                 .first;
    }
    return it->second;
}

} // namespace

TEST_CASE("inverse_cdf and sample_latency basics") {
    const ResourceGrid grid{1000, 2000, 1000};
    const PercentileGrid pct{{1, 25, 50, 75, 99}};
    const auto profile = helpers::make_profile(
        "f", grid, pct, [](int p, Millicores k) -> Millis {
            return (k == 1000 ? 1000 : 600) + 10 * static_cast<Millis>(p);
        });
    const DynamicsModel model = demo::dynamics();

    SUBCASE("u at the tail returns the tail latency exactly") {
        LatencyDraws draws{0.99, 0.0};
        CHECK(sample_latency(model, profile, 1000, draws) ==
              profile.latency(99, 1000));
        draws.u = 0.9999; // clamped to the profiled range
        CHECK(sample_latency(model, profile, 1000, draws) ==
              profile.latency(99, 1000));
        draws.u = 1e-9;
        CHECK(sample_latency(model, profile, 1000, draws) ==
              profile.latency(1, 1000));
    }
    SUBCASE("fixed draw is monotone in the size") {
        for (double u : {0.02, 0.3, 0.5, 0.77, 0.99}) {
            const LatencyDraws draws{u, 0.0};
            CHECK(sample_latency(model, profile, 2000, draws) <=
                  sample_latency(model, profile, 1000, draws));
        }
    }
    SUBCASE("interference multiplies realized latency") {
        DynamicsModel noisy = model;
        noisy.interference = {1.0, 2.0, 8.1};
        const LatencyDraws draws{0.5, 0.0};
        const Millis base = sample_latency(noisy, profile, 1000, draws, 1);
        CHECK(sample_latency(noisy, profile, 1000, draws, 2) == 2 * base);
        CHECK(sample_latency(noisy, profile, 1000, draws, 3) ==
              static_cast<Millis>(std::llround(8.1 * base)));
        // counts beyond the curve clamp to its last entry
        CHECK(sample_latency(noisy, profile, 1000, draws, 5) ==
              sample_latency(noisy, profile, 1000, draws, 3));
    }
}

TEST_CASE("Monte-Carlo self-consistency: empirical P50 near L(50,k)") {
    const ResourceGrid grid{1000, 2000, 1000};
    const PercentileGrid pct{{1, 25, 50, 75, 99}};
    const auto profile = helpers::make_profile(
        "f", grid, pct, [](int p, Millicores k) -> Millis {
            return (k == 1000 ? 2000 : 1200) + 8 * static_cast<Millis>(p);
        });
    const DynamicsModel model = demo::dynamics();
    std::vector<Millis> draws;
    draws.reserve(100000);
    for (std::uint64_t i = 0; i < 100000; ++i)
        draws.push_back(sample_latency(model, profile, 1000,
                                       make_draws(77, i, 0)));
    const Millis p50 = oracles::nearest_rank(draws, 50);
    const auto expected = static_cast<double>(profile.latency(50, 1000));
    CHECK(std::fabs(static_cast<double>(p50) - expected) / expected < 0.05);
}

TEST_CASE("distribution_shift") {
    const DynamicsModel base = demo::dynamics();
    const DynamicsModel same = distribution_shift(base, ShiftSpec{});
    CHECK(same.latency_scale == base.latency_scale);
    const DynamicsModel worse =
        distribution_shift(base, ShiftSpec{1.5, 1.0});
    CHECK(worse.latency_scale == doctest::Approx(1.5));

    // the identity shift reproduces the report byte for byte
    SimConfig config = demo::sim_config(1900, 100, 19);
    SimConfig shifted = config;
    shifted.dynamics = same;
    const auto& profiles = demo_profiles();
    const auto& tables = demo_tables(ExplorationMode::HeadOnly);
    const SimReport a = run_policy(Policy::Janus, config, profiles, &tables);
    const SimReport b = run_policy(Policy::Janus, shifted, profiles, &tables);
    CHECK(requests_to_csv({a}) == requests_to_csv({b}));
}

TEST_CASE("early_bind_p99_sizes equals hand enumeration") {
    const ResourceGrid grid{1000, 3000, 1000};
    const PercentileGrid pct{{50, 99}};
    const auto f1 = helpers::make_profile(
        "f1", grid, pct, [](int p, Millicores k) -> Millis {
            const Millis base = k == 1000 ? 800 : (k == 2000 ? 500 : 400);
            return p == 99 ? base : base - 100;
        });
    const auto f2 = helpers::make_profile(
        "f2", grid, pct, [](int p, Millicores k) -> Millis {
            const Millis base = k == 1000 ? 600 : (k == 2000 ? 350 : 300);
            return p == 99 ? base : base - 100;
        });
    const std::vector<const LatencyProfile*> chain{&f1, &f2};

    // exhaustive oracle over the 3x3 cross product
    auto oracle = [&](Millis slo) {
        std::vector<Millicores> best;
        std::int64_t best_sum = 0;
        for (Millicores a : grid.sizes())
            for (Millicores b : grid.sizes()) {
                if (f1.latency(99, a) + f2.latency(99, b) > slo) continue;
                const std::int64_t sum = a + b;
                const std::vector<Millicores> alloc{a, b};
                if (best.empty() || sum < best_sum ||
                    (sum == best_sum && alloc < best)) {
                    best = alloc;
                    best_sum = sum;
                }
            }
        return best;
    };
    for (Millis slo : {700, 850, 900, 1000, 1150, 1400, 2000})
        CHECK(early_bind_p99_sizes(chain, slo) == oracle(slo));
    CHECK_THROWS_AS(early_bind_p99_sizes(chain, 600), InfeasibleError);

    CHECK(early_bind_identical_size(chain, 850) == 2000);
    CHECK(early_bind_identical_size(chain, 1400) == 1000);
    CHECK_THROWS_AS(early_bind_identical_size(chain, 600), InfeasibleError);
}

TEST_CASE("report invariants on the demo scenario") {
    SimConfig config = demo::sim_config(1900, 300, 11);
    const auto& profiles = demo_profiles();
    const auto& tables = demo_tables(ExplorationMode::HeadOnly);

    const SimReport report =
        run_policy(Policy::Janus, config, profiles, &tables);
    CHECK(report.traces.size() == 300);
    for (const auto& trace : report.traces) {
        // slack and conservation recomputed from the trace itself
        CHECK(trace.slack ==
              doctest::Approx(1.0 - static_cast<double>(trace.end_to_end_ms) /
                                        static_cast<double>(config.workflow
                                                                .slo_ms)));
        CHECK(trace.slo_met ==
              (trace.end_to_end_ms <= config.workflow.slo_ms));
        Millis e2e = 0;
        double consumption = 0.0;
        for (const auto& fo : trace.functions) {
            e2e += fo.latency_ms;
            consumption += static_cast<double>(fo.alloc) *
                           static_cast<double>(fo.latency_ms);
        }
        CHECK(e2e == trace.end_to_end_ms);
        CHECK(consumption == doctest::Approx(trace.total_millicore_ms));
    }
    const PolicyAggregates recomputed = aggregate_traces(
        report.traces, report.aggregates.hits, report.aggregates.misses);
    CHECK(recomputed.p99_ms == report.aggregates.p99_ms);
    CHECK(recomputed.violation_rate ==
          doctest::Approx(report.aggregates.violation_rate));
    CHECK(recomputed.mean_millicore_ms ==
          doctest::Approx(report.aggregates.mean_millicore_ms));
}

TEST_CASE("optimal lower-bounds every policy request by request") {
    SimConfig config = demo::sim_config(1900, 200, 5);
    const auto& profiles = demo_profiles();

    const SimReport optimal =
        run_policy(Policy::Optimal, config, profiles);
    const SimReport janus = run_policy(Policy::Janus, config, profiles,
                                       &demo_tables(ExplorationMode::HeadOnly));
    const SimReport p99 = run_policy(Policy::EarlyBindP99, config, profiles);
    const SimReport identical =
        run_policy(Policy::EarlyBindIdentical, config, profiles);

    for (const SimReport* other : {&janus, &p99, &identical}) {
        REQUIRE(other->traces.size() == optimal.traces.size());
        for (std::size_t r = 0; r < optimal.traces.size(); ++r) {
            if (!other->traces[r].slo_met) continue;
            CHECK(optimal.traces[r].total_millicore_ms <=
                  other->traces[r].total_millicore_ms + 1e-9);
        }
    }
}

TEST_CASE("same seed, same bytes; different seed, different draws") {
    SimConfig config = demo::sim_config(1900, 150, 21);
    const auto& profiles = demo_profiles();
    const auto& tables = demo_tables(ExplorationMode::HeadOnly);

    const SimReport a = run_policy(Policy::Janus, config, profiles, &tables);
    const SimReport b = run_policy(Policy::Janus, config, profiles, &tables);
    CHECK(requests_to_csv({a}) == requests_to_csv({b}));
    CHECK(summary_to_json({a}) == summary_to_json({b}));

    SimConfig other = config;
    other.seed = 22;
    const SimReport c = run_policy(Policy::Janus, other, profiles, &tables);
    CHECK(requests_to_csv({a}) != requests_to_csv({c}));
}

TEST_CASE("tail-only tables consume at least as much as explored tables") {
    SimConfig config = demo::sim_config(1900, 400, 13);
    const auto& profiles = demo_profiles();
    const SimReport janus = run_policy(Policy::Janus, config, profiles,
                                       &demo_tables(ExplorationMode::HeadOnly));
    const SimReport minus =
        run_policy(Policy::JanusMinus, config, profiles,
                   &demo_tables(ExplorationMode::TailOnly));
    CHECK(janus.aggregates.mean_millicore_ms <=
          minus.aggregates.mean_millicore_ms + 1e-9);
}

TEST_CASE("batched requests share one invocation latency") {
    SimConfig config = demo::sim_config(4200, 90, 3);
    config.workflow = demo::workflow(4200, 3);
    const ProfileSet profiles = demo::profiles(1.0, {3});

    SynthOptions options;
    const auto tables =
        synthesize_all(config.workflow, profiles, options);
    const SimReport report =
        run_policy(Policy::Janus, config, profiles, &tables);
    REQUIRE(report.traces.size() == 90);
    for (std::size_t r = 0; r < report.traces.size(); r += 3) {
        for (std::size_t j = r + 1; j < std::min(r + 3, report.traces.size());
             ++j) {
            CHECK(report.traces[j].end_to_end_ms ==
                  report.traces[r].end_to_end_ms);
            CHECK(report.traces[j].total_millicore_ms ==
                  doctest::Approx(report.traces[r].total_millicore_ms));
        }
    }
}

TEST_CASE("interference couples co-located invocations of one function") {
    // two simultaneous arrivals of a single-function workflow, curve 1->1,
    // 2->3: both invocations see co-location count 2 at start
    const ResourceGrid grid{1000, 1000, 1};
    const PercentileGrid pct{{50, 99}};
    ProfileSet profiles;
    // constant surface keeps the interpolated draw integral, so the 3x
    // multiplier is exact after rounding
    profiles.add(helpers::make_profile(
        "only", grid, pct,
        [](int, Millicores) -> Millis { return 100; }));

    SimConfig config;
    config.workflow.id = "wf";
    config.workflow.functions = {"only"};
    config.workflow.slo_ms = 1000;
    config.n_requests = 2;
    config.seed = 3;
    config.arrival_interval_ms = 0;
    config.dynamics.interference = {1.0, 3.0};

    const SimReport report =
        run_policy(Policy::EarlyBindIdentical, config, profiles);
    SimConfig isolated = config;
    isolated.arrival_interval_ms = 10000;
    const SimReport apart =
        run_policy(Policy::EarlyBindIdentical, isolated, profiles);

    // second arrival sees the first still in flight; first one completed
    // before the second starts in the spaced run
    CHECK(report.traces[1].end_to_end_ms ==
          3 * apart.traces[1].end_to_end_ms);
}

TEST_CASE("miss counting under a latency shift feeds check_regen") {
    SimConfig config = demo::sim_config(2450, 500, 9);
    config.dynamics = distribution_shift(config.dynamics, ShiftSpec{1.5, 1.0});
    const auto& profiles = demo_profiles();
    const auto& tables = demo_tables(ExplorationMode::HeadOnly);

    Adapter adapter(demo::grid(),
                    Adapter::Options{MissPolicy::ScaleToMax, 0.01});
    adapter.install_tables(tables);
    const SimReport shifted =
        run_policy(Policy::Janus, config, profiles, nullptr, &adapter);
    CHECK(shifted.aggregates.miss_rate > 0.01);
    CHECK(adapter.check_regen(config.workflow.id));
}
