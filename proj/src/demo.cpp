#include "latebind/demo.hpp"

namespace latebind::demo {

ResourceGrid grid() { return ResourceGrid{1000, 3000, 100}; }

PercentileGrid percentiles() { return PercentileGrid::ranged(1, 99, 5, 99); }

std::vector<FunctionFamily> families(double scale) {
    // Three heterogeneous stages with tail/median ratios in the calibrated
    // band (~1.4-1.6) and sub-linear speedup, so scaling a function up buys
    // latency at a real resource premium.
    std::vector<FunctionFamily> out;

    FunctionFamily detect;
    detect.name = "detect";
    detect.serial_ms = 150.0 * scale;
    detect.parallel_ms = 750.0 * scale;
    detect.speedup_exponent = 0.6;
    detect.workset_sigma = FunctionFamily::sigma_for_ratio(1.46);
    detect.target_p99_p50 = 1.46;
    detect.batch_scale = {{1, 1.0}, {2, 1.55}, {3, 2.05}};
    out.push_back(detect);

    FunctionFamily answer;
    answer.name = "answer";
    answer.serial_ms = 100.0 * scale;
    answer.parallel_ms = 500.0 * scale;
    answer.speedup_exponent = 0.6;
    answer.workset_sigma = FunctionFamily::sigma_for_ratio(1.56);
    answer.target_p99_p50 = 1.56;
    answer.batch_scale = {{1, 1.0}, {2, 1.5}, {3, 1.95}};
    out.push_back(answer);

    FunctionFamily speak;
    speak.name = "speak";
    speak.serial_ms = 50.0 * scale;
    speak.parallel_ms = 250.0 * scale;
    speak.speedup_exponent = 0.6;
    speak.workset_sigma = FunctionFamily::sigma_for_ratio(1.37);
    speak.target_p99_p50 = 1.37;
    speak.batch_scale = {{1, 1.0}, {2, 1.45}, {3, 1.85}};
    out.push_back(speak);

    return out;
}

WorkflowSpec workflow(Millis slo_ms, int batch) {
    WorkflowSpec wf;
    wf.id = "assistant";
    wf.functions = {"detect", "answer", "speak"};
    wf.slo_ms = slo_ms;
    wf.weights = {1.0};
    wf.batch = batch;
    return wf;
}

DynamicsModel dynamics() {
    DynamicsModel model;
    model.latency_scale = 1.0;
    model.interference = {1.0};
    model.host_capacity = 6;
    return model;
}

ProfileSet profiles(double scale, std::vector<int> batches, std::uint64_t seed,
                    int n_per_size) {
    ProfileSet set;
    const ResourceGrid g = grid();
    const PercentileGrid p = percentiles();
    for (const FunctionFamily& family : families(scale))
        for (int batch : batches)
            set.add(extract_profile(generate_samples(family, batch, g,
                                                     n_per_size, seed),
                                    g, p));
    return set;
}

SimConfig sim_config(Millis slo_ms, std::uint64_t n_requests,
                     std::uint64_t seed) {
    SimConfig config;
    config.workflow = workflow(slo_ms);
    config.dynamics = dynamics();
    config.n_requests = n_requests;
    config.seed = seed;
    config.arrival_interval_ms = 0;
    config.weight = 1.0;
    config.miss_policy = MissPolicy::ScaleToMax;
    config.miss_threshold = 0.01;
    return config;
}

} // namespace latebind::demo
