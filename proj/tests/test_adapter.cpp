#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include "latebind/adapter.hpp"
#include "latebind/rng.hpp"

#include "oracles.hpp"

using namespace latebind;

namespace {

const ResourceGrid kGrid{1000, 3000, 100};

HintsTable two_row_table() {
    HintsTable table;
    table.key = {"wf", 2, 1.0, 1};
    table.rows = {{2000, 2500, 3000}, {2501, 4000, 2000}};
    return table;
}

Adapter make_adapter(MissPolicy policy = MissPolicy::ScaleToMax,
                     Adapter::HintGenerator generator = nullptr) {
    return Adapter(kGrid, Adapter::Options{policy, 0.01},
                   std::move(generator));
}

} // namespace

TEST_CASE("adapt: hit, boundary, miss") {
    Adapter adapter = make_adapter();
    adapter.install_tables({two_row_table()});

    auto d1 = adapter.adapt("wf", 2, 3000);
    CHECK(d1.head_size == 2000);
    CHECK(d1.source == DecisionSource::Hit);

    auto d2 = adapter.adapt("wf", 2, 2500); // inclusive upper bound
    CHECK(d2.head_size == 3000);
    CHECK(d2.source == DecisionSource::Hit);

    auto d3 = adapter.adapt("wf", 2, 1500); // below range
    CHECK(d3.head_size == 3000);            // k_max
    CHECK(d3.source == DecisionSource::MissMaxScale);

    auto d4 = adapter.adapt("wf", 2, 9000); // above range clamps to last row
    CHECK(d4.head_size == 2000);
    CHECK(d4.source == DecisionSource::Hit);

    const auto counters = adapter.counters({"wf", 2, 1.0, 1});
    CHECK(counters.hits == 3);
    CHECK(counters.misses == 1);
    CHECK(counters.lookups() == 4); // hit+miss equals the adapt call count

    CHECK_THROWS_AS(adapter.adapt("wf", 3, 3000), std::invalid_argument);
    CHECK_THROWS_AS(adapter.adapt("wf", 2, 0), std::invalid_argument);
}

TEST_CASE("regenerate-on-spot merges singleton rows") {
    int calls = 0;
    auto generator = [&](const HintsKey& key,
                         Millis budget) -> std::optional<RawHint> {
        ++calls;
        CHECK(key.suffix == 2);
        if (budget < 100) return std::nullopt; // infeasible
        return RawHint{budget, 99, 99, {1400, 1000}, 0.0};
    };
    Adapter adapter = make_adapter(MissPolicy::RegenerateOnSpot, generator);
    adapter.install_tables({two_row_table()});

    auto d = adapter.adapt("wf", 2, 1500);
    CHECK(d.source == DecisionSource::MissRegenerated);
    CHECK(d.head_size == 1400);
    CHECK(calls == 1);

    // the merged singleton now serves repeats as a hit
    auto again = adapter.adapt("wf", 2, 1500);
    CHECK(again.source == DecisionSource::Hit);
    CHECK(again.head_size == 1400);
    CHECK(calls == 1);

    // infeasible regeneration falls back to max scale
    auto worst = adapter.adapt("wf", 2, 50);
    CHECK(worst.source == DecisionSource::MissMaxScale);
    CHECK(worst.head_size == 3000);

    const auto counters = adapter.counters({"wf", 2, 1.0, 1});
    CHECK(counters.hits == 1);
    CHECK(counters.misses == 2);
}

TEST_CASE("record_completion tracks residual budgets") {
    Adapter adapter = make_adapter();
    adapter.begin_request("wf", 1, 3000);
    CHECK(adapter.record_completion("wf", 1, 900) == 2100);
    CHECK(adapter.record_completion("wf", 1, 2000) == 100);
    CHECK(adapter.record_completion("wf", 1, 400, true) == -300); // blown
    CHECK_THROWS_AS(adapter.record_completion("wf", 1, 10),
                    std::invalid_argument); // closed at chain end
}

TEST_CASE("check_regen thresholds") {
    Adapter adapter = make_adapter();
    adapter.install_tables({two_row_table()});

    CHECK_THROWS_AS(adapter.check_regen("wf"), std::logic_error);

    for (int i = 0; i < 990; ++i) adapter.adapt("wf", 2, 3000);
    for (int i = 0; i < 10; ++i) adapter.adapt("wf", 2, 100);
    CHECK(!adapter.check_regen("wf")); // rate == threshold, not above
    CHECK(!adapter.regen_flag("wf"));

    adapter.adapt("wf", 2, 100); // 989 hits equivalent: 11th miss tips it
    CHECK(adapter.check_regen("wf"));
    CHECK(adapter.regen_flag("wf"));

    // installing fresh tables resets counters and the flag
    adapter.install_tables({two_row_table()});
    CHECK(!adapter.regen_flag("wf"));
    CHECK(adapter.counters({"wf", 2, 1.0, 1}).lookups() == 0);
}

TEST_CASE("install over empty state enables lookups; reinstall is idempotent") {
    Adapter adapter = make_adapter();
    CHECK_THROWS_AS(adapter.adapt("wf", 2, 3000), std::invalid_argument);
    adapter.install_tables({two_row_table()});
    const auto first = adapter.adapt("wf", 2, 3000);
    adapter.install_tables({two_row_table()});
    const auto second = adapter.adapt("wf", 2, 3000);
    CHECK(first.head_size == second.head_size);
    CHECK(first.source == second.source);

    HintsTable invalid = two_row_table();
    invalid.rows[1].t_start_ms = 2600; // gap
    CHECK_THROWS_AS(adapter.install_tables({invalid}), std::invalid_argument);
}

TEST_CASE("concurrent lookups during install see old or new, never a mix") {
    HintsTable before = two_row_table();
    HintsTable after = two_row_table();
    after.rows = {{2000, 2500, 2800}, {2501, 4000, 1700}};

    Adapter adapter = make_adapter();
    adapter.install_tables({before});

    std::atomic<bool> stop{false};
    std::atomic<int> anomalies{0};
    std::thread reader([&] {
        while (!stop.load()) {
            const auto low = adapter.adapt("wf", 2, 2200);
            const auto high = adapter.adapt("wf", 2, 3000);
            const bool old_pair = low.head_size == 3000;
            const bool new_pair = low.head_size == 2800;
            if (!(old_pair || new_pair)) anomalies.fetch_add(1);
            if ((old_pair && high.head_size != 2000 && high.head_size != 1700) ||
                (new_pair && high.head_size != 1700 && high.head_size != 2000))
                anomalies.fetch_add(1);
        }
    });
    for (int i = 0; i < 200; ++i) {
        adapter.install_tables({i % 2 == 0 ? after : before});
    }
    stop.store(true);
    reader.join();
    CHECK(anomalies.load() == 0);
}

TEST_CASE("binary search equals linear scan on a large random table") {
    HintsTable table;
    table.key = {"wf", 1, 1.0, 1};
    Rng rng(4242);
    Millis t = 1000;
    Millicores head = 1000;
    for (int i = 0; i < 10000; ++i) {
        const Millis width = 1 + static_cast<Millis>(rng.next_u64() % 40);
        // alternate head sizes so adjacent rows stay distinct
        head = head == 1000 ? 1000 + 100 * (1 + static_cast<int>(
                                                    rng.next_u64() % 20))
                            : 1000;
        table.rows.push_back({t, t + width - 1, head});
        t += width;
    }
    table.validate(kGrid);

    Adapter adapter = make_adapter();
    adapter.install_tables({table});

    for (int i = 0; i < 100000; ++i) {
        const Millis budget =
            1 + static_cast<Millis>(rng.next_u64() %
                                    static_cast<std::uint64_t>(t + 2000));
        const HintRow* expect = oracles::linear_scan(table.rows, budget);
        const auto got = adapter.adapt("wf", 1, budget);
        if (expect) {
            CHECK(got.head_size == expect->head_size);
            CHECK(got.source == DecisionSource::Hit);
        } else {
            CHECK(got.head_size == kGrid.k_max);
            CHECK(got.source == DecisionSource::MissMaxScale);
        }
    }
}
