#include "latebind/simulate.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <stdexcept>

namespace latebind {

const char* to_string(Policy policy) {
    switch (policy) {
        case Policy::Janus: return "Janus";
        case Policy::JanusMinus: return "JanusMinus";
        case Policy::JanusPlus: return "JanusPlus";
        case Policy::EarlyBindP99: return "EarlyBindP99";
        case Policy::EarlyBindIdentical: return "EarlyBindIdentical";
        case Policy::Optimal: return "Optimal";
    }
    return "unknown";
}

std::optional<Policy> policy_from_string(const std::string& name) {
    for (Policy p : {Policy::Janus, Policy::JanusMinus, Policy::JanusPlus,
                     Policy::EarlyBindP99, Policy::EarlyBindIdentical,
                     Policy::Optimal})
        if (name == to_string(p)) return p;
    return std::nullopt;
}

bool policy_uses_tables(Policy policy) {
    return policy == Policy::Janus || policy == Policy::JanusMinus ||
           policy == Policy::JanusPlus;
}

ExplorationMode exploration_mode_for(Policy policy) {
    switch (policy) {
        case Policy::JanusMinus: return ExplorationMode::TailOnly;
        case Policy::JanusPlus: return ExplorationMode::HeadAndNext;
        default: return ExplorationMode::HeadOnly;
    }
}

std::vector<Millicores> early_bind_p99_sizes(
    const std::vector<const LatencyProfile*>& chain, Millis slo_ms) {
    // exhaustive over the size cross product: minimize Σk subject to the
    // tail latencies fitting the SLO; ties resolve to the lexicographically
    // smallest allocation
    const auto& grid = chain[0]->resources();
    const auto sizes = grid.sizes();
    const std::size_t n = chain.size();

    Millis best_possible = 0;
    for (const auto* profile : chain)
        best_possible += profile->tail_latency(grid.k_max);
    if (best_possible > slo_ms)
        throw InfeasibleError(
            "early binding infeasible: SLO below the achievable tail latency");

    std::vector<Millicores> current(n), best;
    std::int64_t best_sum = 0;
    auto consider = [&](const std::vector<Millicores>& alloc,
                        std::int64_t sum) {
        if (best.empty() || sum < best_sum ||
            (sum == best_sum && alloc < best)) {
            best = alloc;
            best_sum = sum;
        }
    };
    // depth-first with latency pruning
    auto walk = [&](auto&& self, std::size_t i, Millis latency,
                    std::int64_t sum) -> void {
        if (latency > slo_ms) return;
        if (i == n) {
            consider(current, sum);
            return;
        }
        for (Millicores k : sizes) {
            const Millis l = chain[i]->tail_latency(k);
            if (latency + l > slo_ms) continue;
            current[i] = k;
            self(self, i + 1, latency + l, sum + k);
        }
    };
    walk(walk, 0, 0, 0);
    return best;
}

Millicores early_bind_identical_size(
    const std::vector<const LatencyProfile*>& chain, Millis slo_ms) {
    for (Millicores k : chain[0]->resources().sizes()) {
        Millis total = 0;
        for (const auto* profile : chain) total += profile->tail_latency(k);
        if (total <= slo_ms) return k;
    }
    throw InfeasibleError(
        "identical early binding infeasible: SLO below the achievable tail "
        "latency at maximum size");
}

PolicyAggregates aggregate_traces(const std::vector<RequestTrace>& traces,
                                  std::uint64_t hits, std::uint64_t misses) {
    PolicyAggregates agg;
    if (traces.empty()) return agg;
    std::vector<Millis> e2e;
    e2e.reserve(traces.size());
    std::uint64_t violations = 0;
    double consumption = 0.0;
    for (const auto& trace : traces) {
        e2e.push_back(trace.end_to_end_ms);
        violations += trace.slo_met ? 0 : 1;
        consumption += trace.total_millicore_ms;
    }
    std::sort(e2e.begin(), e2e.end());
    auto rank = [&](int p) {
        const auto n = static_cast<long long>(e2e.size());
        long long r = (static_cast<long long>(p) * n + 99) / 100;
        r = std::max<long long>(r, 1);
        return e2e[static_cast<std::size_t>(r - 1)];
    };
    agg.p50_ms = rank(50);
    agg.p95_ms = rank(95);
    agg.p99_ms = rank(99);
    agg.violation_rate =
        static_cast<double>(violations) / static_cast<double>(traces.size());
    agg.mean_millicore_ms = consumption / static_cast<double>(traces.size());
    agg.hits = hits;
    agg.misses = misses;
    agg.miss_rate = (hits + misses) == 0
                        ? 0.0
                        : static_cast<double>(misses) /
                              static_cast<double>(hits + misses);
    return agg;
}

namespace {

/// Hindsight per-invocation optimum: cheapest consumption meeting the SLO
/// given the invocation's realized latency per candidate size (isolation
/// interference). Falls back to all-max when no allocation meets the SLO.
std::vector<Millicores> hindsight_optimal(
    const std::vector<std::vector<Millis>>& latency_by_fn_size,
    const std::vector<Millicores>& sizes, Millis slo_ms) {
    const std::size_t n = latency_by_fn_size.size();
    std::vector<Millicores> current(n), best;
    double best_cost = 0.0;
    auto walk = [&](auto&& self, std::size_t i, Millis latency,
                    double cost) -> void {
        if (latency > slo_ms) return;
        if (!best.empty() && cost > best_cost) return; // costs only grow
        if (i == n) {
            if (best.empty() || cost < best_cost ||
                (cost == best_cost && current < best)) {
                best = current;
                best_cost = cost;
            }
            return;
        }
        for (std::size_t ki = 0; ki < sizes.size(); ++ki) {
            const Millis l = latency_by_fn_size[i][ki];
            current[i] = sizes[ki];
            self(self, i + 1, latency + l,
                 cost + static_cast<double>(sizes[ki]) * static_cast<double>(l));
        }
    };
    walk(walk, 0, 0, 0.0);
    if (best.empty())
        best.assign(n, sizes.back()); // SLO unreachable even in hindsight
    return best;
}

struct Invocation {
    std::uint64_t index = 0;
    std::vector<std::uint64_t> requests;
    Millis arrival = 0;
    Millis clock = 0;
    int stage = 0;
    std::vector<FunctionOutcome> outcomes;
    std::vector<Millicores> static_alloc; // non-adaptive policies
};

struct Event {
    Millis time;
    std::uint64_t seq;
    std::size_t inv;
    bool is_arrival;
    friend bool operator>(const Event& a, const Event& b) {
        return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
};

} // namespace

SimReport run_policy(Policy policy, const SimConfig& config,
                     const ProfileSet& profiles,
                     const std::vector<HintsTable>* tables, Adapter* adapter) {
    const WorkflowSpec& wf = config.workflow;
    const int n = wf.length();
    if (n < 1) throw std::invalid_argument("run_policy: empty workflow");
    config.dynamics.validate();
    const auto chain = profiles.chain(wf.functions, wf.batch);
    const ResourceGrid& grid = chain[0]->resources();
    const int tail = chain[0]->percentiles().tail();

    // adapter setup for the table-driven policies
    std::unique_ptr<Adapter> owned;
    Adapter* engine = adapter;
    if (policy_uses_tables(policy)) {
        if (!engine) {
            if (!tables)
                throw std::invalid_argument(
                    std::string(to_string(policy)) + " requires hints tables");
            Adapter::HintGenerator generator;
            if (config.miss_policy == MissPolicy::RegenerateOnSpot) {
                const ExplorationMode mode = exploration_mode_for(policy);
                generator = [&profiles, wf, mode](const HintsKey& key,
                                                  Millis budget)
                    -> std::optional<RawHint> {
                    const std::vector<FunctionId> rest(
                        wf.functions.begin() + (key.suffix - 1),
                        wf.functions.end());
                    SynthOptions opts;
                    opts.weight = key.weight;
                    opts.mode = mode;
                    return generate(profiles.chain(rest, key.batch), budget,
                                    opts);
                };
            }
            owned = std::make_unique<Adapter>(
                grid,
                Adapter::Options{config.miss_policy, config.miss_threshold},
                std::move(generator));
            owned->install_tables(*tables);
            engine = owned.get();
        }
        // verify a table exists for every suffix before starting
        for (int suffix = 1; suffix <= n; ++suffix)
            engine->counters(
                HintsKey{wf.id, suffix, config.weight, wf.batch});
    }
    const std::uint64_t hits_before =
        engine ? engine->workflow_counters(wf.id).hits : 0;
    const std::uint64_t misses_before =
        engine ? engine->workflow_counters(wf.id).misses : 0;

    // static sizing for the early-binding baselines
    std::vector<Millicores> early_sizes;
    if (policy == Policy::EarlyBindP99)
        early_sizes = early_bind_p99_sizes(chain, wf.slo_ms);
    else if (policy == Policy::EarlyBindIdentical)
        early_sizes.assign(static_cast<std::size_t>(n),
                           early_bind_identical_size(chain, wf.slo_ms));

    const auto batch = static_cast<std::uint64_t>(wf.batch);
    const std::uint64_t n_inv = (config.n_requests + batch - 1) / batch;
    std::vector<Invocation> invocations(n_inv);
    for (std::uint64_t i = 0; i < n_inv; ++i) {
        auto& inv = invocations[i];
        inv.index = i;
        inv.arrival = static_cast<Millis>(i) * config.arrival_interval_ms;
        inv.clock = inv.arrival;
        inv.outcomes.resize(static_cast<std::size_t>(n));
        for (std::uint64_t r = i * batch;
             r < std::min(config.n_requests, (i + 1) * batch); ++r)
            inv.requests.push_back(r);
    }

    // hindsight latencies per invocation when Optimal needs them
    const auto sizes = grid.sizes();
    if (policy == Policy::Optimal) {
        std::vector<std::vector<Millis>> lat(static_cast<std::size_t>(n));
        for (auto& inv : invocations) {
            for (int fi = 0; fi < n; ++fi) {
                auto& row = lat[static_cast<std::size_t>(fi)];
                row.resize(sizes.size());
                const LatencyDraws draws =
                    make_draws(config.seed, inv.index, fi);
                for (std::size_t ki = 0; ki < sizes.size(); ++ki)
                    row[ki] = sample_latency(config.dynamics,
                                             *chain[static_cast<std::size_t>(fi)],
                                             sizes[ki], draws, 1);
            }
            inv.static_alloc = hindsight_optimal(lat, sizes, wf.slo_ms);
        }
    } else if (!early_sizes.empty()) {
        for (auto& inv : invocations) inv.static_alloc = early_sizes;
    }

    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
    std::uint64_t seq = 0;
    for (std::size_t i = 0; i < invocations.size(); ++i)
        queue.push({invocations[i].arrival, seq++, i, true});

    std::map<FunctionId, int> inflight;

    auto start_stage = [&](Invocation& inv, Millicores alloc,
                           DecisionSource source, int percentile) {
        const int fi = inv.stage;
        const FunctionId& fn =
            wf.functions[static_cast<std::size_t>(fi)];
        const int colocated = ++inflight[fn];
        const LatencyDraws draws = make_draws(config.seed, inv.index, fi);
        const Millis lat =
            sample_latency(config.dynamics, *chain[static_cast<std::size_t>(fi)],
                           alloc, draws, colocated);
        inv.outcomes[static_cast<std::size_t>(fi)] =
            FunctionOutcome{alloc, lat, source, percentile};
        queue.push({inv.clock + lat, seq++, inv.index, false});
    };

    auto first_decision = [&](Invocation& inv) {
        if (policy_uses_tables(policy)) {
            engine->begin_request(wf.id, inv.index, wf.slo_ms);
            const AdaptationDecision d =
                engine->adapt(wf.id, 1, wf.slo_ms, config.weight, wf.batch);
            if (config.decision_sink)
                config.decision_sink(inv.index, 1, wf.slo_ms, d);
            start_stage(inv, d.head_size, d.source, 0);
        } else {
            start_stage(inv, inv.static_alloc[0], DecisionSource::Hit,
                        policy == Policy::Optimal ? 0 : tail);
        }
    };

    std::vector<RequestTrace> traces(config.n_requests);
    auto finalize = [&](Invocation& inv) {
        const Millis e2e = inv.clock - inv.arrival;
        for (std::uint64_t r : inv.requests) {
            RequestTrace& trace = traces[r];
            trace.request = r;
            trace.functions = inv.outcomes;
            trace.end_to_end_ms = e2e;
            trace.slack = 1.0 - static_cast<double>(e2e) /
                                    static_cast<double>(wf.slo_ms);
            trace.slo_met = e2e <= wf.slo_ms;
            trace.total_millicore_ms = 0.0;
            for (const auto& fo : inv.outcomes)
                trace.total_millicore_ms +=
                    static_cast<double>(fo.alloc) *
                    static_cast<double>(fo.latency_ms);
        }
    };

    while (!queue.empty()) {
        const Event ev = queue.top();
        queue.pop();
        Invocation& inv = invocations[ev.inv];
        if (ev.is_arrival) {
            first_decision(inv);
            continue;
        }
        // completion of inv.stage
        const int fi = inv.stage;
        inv.clock = ev.time;
        --inflight[wf.functions[static_cast<std::size_t>(fi)]];
        const Millis realized =
            inv.outcomes[static_cast<std::size_t>(fi)].latency_ms;
        inv.stage += 1;
        const bool done = inv.stage >= n;

        if (policy_uses_tables(policy)) {
            const Millis residual =
                engine->record_completion(wf.id, inv.index, realized, done);
            if (!done) {
                if (residual <= 0) {
                    // budget already blown: bypass the table, force max
                    start_stage(inv, grid.k_max, DecisionSource::MissMaxScale,
                                0);
                } else {
                    const AdaptationDecision d =
                        engine->adapt(wf.id, inv.stage + 1, residual,
                                      config.weight, wf.batch);
                    if (config.decision_sink)
                        config.decision_sink(inv.index, inv.stage + 1,
                                             residual, d);
                    start_stage(inv, d.head_size, d.source, 0);
                }
            }
        } else if (!done) {
            start_stage(inv, inv.static_alloc[static_cast<std::size_t>(inv.stage)],
                        DecisionSource::Hit,
                        policy == Policy::Optimal ? 0 : tail);
        }
        if (done) finalize(inv);
    }

    SimReport report;
    report.policy = to_string(policy);
    report.workflow = wf.id;
    report.slo_ms = wf.slo_ms;
    report.seed = config.seed;
    report.traces = std::move(traces);
    const std::uint64_t hits =
        engine ? engine->workflow_counters(wf.id).hits - hits_before : 0;
    const std::uint64_t misses =
        engine ? engine->workflow_counters(wf.id).misses - misses_before : 0;
    report.aggregates = aggregate_traces(report.traces, hits, misses);
    return report;
}

} // namespace latebind
