#include "latebind/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "latebind/io.hpp"

namespace latebind {

namespace {

using nlohmann::json;

/// Strict view over a JSON object: every read is recorded, unknown or
/// left-over keys are rejected, and type errors cite the field path.
class Strict {
  public:
    Strict(const json& j, std::string context)
        : j_(j), context_(std::move(context)) {
        if (!j_.is_object())
            throw ParseError(context_ + ": expected a JSON object");
    }

    template <typename T>
    T get(const char* key) {
        require(key);
        return read<T>(key);
    }

    template <typename T>
    T get_or(const char* key, T fallback) {
        if (!j_.contains(key)) {
            seen_.insert(key);
            return fallback;
        }
        return read<T>(key);
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& raw(const char* key) {
        require(key);
        seen_.insert(key);
        return j_.at(key);
    }

    const json* raw_if(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    /// Call after all reads: rejects unknown fields.
    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key))
                throw ParseError(context_ + ": unknown field '" + key + "'");
    }

  private:
    void require(const char* key) {
        if (!j_.contains(key))
            throw ParseError(context_ + ": missing required field '" +
                             std::string(key) + "'");
    }

    template <typename T>
    T read(const char* key) {
        seen_.insert(key);
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ParseError(context_ + ": field '" + key +
                             "' has the wrong type");
        }
    }

    const json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

json parse_text(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ParseError(std::string(what) + ": invalid JSON");
    return j;
}

ResourceGrid grid_from(const json& j, const std::string& context) {
    Strict s(j, context);
    ResourceGrid grid;
    grid.k_min = s.get<Millicores>("k_min");
    grid.k_max = s.get<Millicores>("k_max");
    grid.step = s.get<Millicores>("step");
    s.finish();
    return grid;
}

json grid_to(const ResourceGrid& grid) {
    return json{{"k_min", grid.k_min}, {"k_max", grid.k_max},
                {"step", grid.step}};
}

PercentileGrid percentiles_from(const json& j, const std::string& context) {
    Strict s(j, context);
    PercentileGrid grid;
    if (s.has("values")) {
        grid.values = s.get<std::vector<int>>("values");
        const int tail = s.get_or<int>("tail", grid.values.empty()
                                                   ? 99
                                                   : grid.values.back());
        if (!grid.values.empty() && grid.values.back() < tail)
            grid.values.push_back(tail);
    } else {
        const int lo = s.get<int>("min");
        const int hi = s.get<int>("max");
        const int step = s.get<int>("step");
        const int tail = s.get_or<int>("tail", 99);
        s.finish();
        return PercentileGrid::ranged(lo, hi, step, tail);
    }
    s.finish();
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(context + ": " + e.what());
    }
    return grid;
}

json percentiles_to(const PercentileGrid& grid) {
    return json{{"values", grid.values}};
}

DynamicsModel dynamics_from(const json& j, const std::string& context) {
    Strict s(j, context);
    DynamicsModel model;
    model.latency_scale = s.get_or<double>("latency_scale", 1.0);
    model.interference =
        s.get_or<std::vector<double>>("interference", {1.0});
    model.host_capacity = s.get_or<int>("host_capacity", 6);
    if (const json* w = s.raw_if("workset")) {
        if (!w->is_object())
            throw ParseError(context + ".workset: expected an object");
        for (const auto& [fn, spec] : w->items()) {
            Strict ws(spec, context + ".workset." + fn);
            WorksetNoise noise;
            noise.sigma = ws.get_or<double>("sigma", 0.0);
            noise.cap = ws.get_or<double>("cap", 4.0);
            ws.finish();
            model.workset[fn] = noise;
        }
    }
    s.finish();
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(context + ": " + e.what());
    }
    return model;
}

json dynamics_to(const DynamicsModel& model) {
    json j;
    j["latency_scale"] = model.latency_scale;
    j["interference"] = model.interference;
    j["host_capacity"] = model.host_capacity;
    if (!model.workset.empty()) {
        json w = json::object();
        for (const auto& [fn, noise] : model.workset)
            w[fn] = json{{"sigma", noise.sigma}, {"cap", noise.cap}};
        j["workset"] = std::move(w);
    }
    return j;
}

WorkflowConfig workflow_from(const json& j, const std::string& context) {
    Strict s(j, context);
    WorkflowConfig config;
    config.workflow.id = s.get<std::string>("id");
    config.workflow.functions = s.get<std::vector<FunctionId>>("functions");
    config.workflow.slo_ms = s.get<Millis>("slo_ms");
    config.workflow.weights =
        s.get_or<std::vector<double>>("weights", {1.0});
    config.workflow.batch = s.get_or<int>("batch", 1);
    config.grids.resources = grid_from(s.raw("grid"), context + ".grid");
    config.grids.percentiles =
        percentiles_from(s.raw("percentiles"), context + ".percentiles");
    s.finish();

    if (!valid_identifier(config.workflow.id))
        throw ParseError(context + ": invalid workflow id '" +
                         config.workflow.id + "'");
    for (const auto& fn : config.workflow.functions)
        if (!valid_identifier(fn))
            throw ParseError(context + ": invalid function id '" + fn + "'");
    const ValidationResult check = validate_spec(
        config.workflow, config.grids.resources, config.grids.percentiles);
    if (!check.ok()) throw ParseError(context + ": " + check.to_string());
    return config;
}

json workflow_to(const WorkflowConfig& config) {
    json j;
    j["id"] = config.workflow.id;
    j["functions"] = config.workflow.functions;
    j["slo_ms"] = config.workflow.slo_ms;
    j["weights"] = config.workflow.weights;
    j["batch"] = config.workflow.batch;
    j["grid"] = grid_to(config.grids.resources);
    j["percentiles"] = percentiles_to(config.grids.percentiles);
    return j;
}

} // namespace

WorkflowConfig parse_workflow_json(const std::string& text) {
    const json root = parse_text(text, "workflow config");
    return workflow_from(root, "workflow");
}

WorkflowConfig read_workflow_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    try {
        return parse_workflow_json(os.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string workflow_to_json(const WorkflowConfig& config) {
    return workflow_to(config).dump(2) + "\n";
}

FamiliesConfig parse_families_json(const std::string& text) {
    const json root = parse_text(text, "families config");
    Strict s(root, "families");
    FamiliesConfig config;
    config.grid = grid_from(s.raw("grid"), "families.grid");
    config.batches = s.get_or<std::vector<int>>("batches", {1});
    config.n_per_size = s.get_or<int>("n_per_size", 2000);
    const json& list = s.raw("families");
    if (!list.is_array())
        throw ParseError("families.families: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string ctx = "families.families[" + std::to_string(i) + "]";
        Strict f(list[i], ctx);
        FunctionFamily family;
        family.name = f.get<std::string>("name");
        family.serial_ms = f.get<double>("serial_ms");
        family.parallel_ms = f.get<double>("parallel_ms");
        family.k_ref = f.get_or<Millicores>("k_ref", 1000);
        family.speedup_exponent = f.get_or<double>("speedup_exponent", 1.0);
        family.target_p99_p50 = f.get_or<double>("target_p99_p50", 1.0);
        family.workset_sigma = f.get_or<double>(
            "workset_sigma", FunctionFamily::sigma_for_ratio(
                                 family.target_p99_p50));
        family.workset_cap = f.get_or<double>("workset_cap", 4.0);
        family.interference =
            f.get_or<std::vector<double>>("interference", {1.0});
        if (const json* bs = f.raw_if("batch_scale")) {
            if (!bs->is_object())
                throw ParseError(ctx + ".batch_scale: expected an object");
            family.batch_scale.clear();
            for (const auto& [b, factor] : bs->items()) {
                int batch = 0;
                try {
                    batch = std::stoi(b);
                } catch (...) {
                    throw ParseError(ctx + ".batch_scale: bad batch '" + b +
                                     "'");
                }
                if (!factor.is_number())
                    throw ParseError(ctx + ".batch_scale: factor must be a "
                                     "number");
                family.batch_scale[batch] = factor.get<double>();
            }
        }
        f.finish();
        if (!valid_identifier(family.name))
            throw ParseError(ctx + ": invalid family name '" + family.name +
                             "'");
        try {
            family.validate();
        } catch (const std::invalid_argument& e) {
            throw ParseError(ctx + ": " + e.what());
        }
        config.families.push_back(std::move(family));
    }
    s.finish();
    if (config.families.empty())
        throw ParseError("families.families: empty");
    if (config.batches.empty())
        throw ParseError("families.batches: empty");
    return config;
}

FamiliesConfig read_families_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    try {
        return parse_families_json(os.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string families_to_json(const FamiliesConfig& config) {
    json j;
    j["grid"] = grid_to(config.grid);
    j["batches"] = config.batches;
    j["n_per_size"] = config.n_per_size;
    json list = json::array();
    for (const FunctionFamily& family : config.families) {
        json f;
        f["name"] = family.name;
        f["serial_ms"] = family.serial_ms;
        f["parallel_ms"] = family.parallel_ms;
        f["k_ref"] = family.k_ref;
        f["speedup_exponent"] = family.speedup_exponent;
        f["workset_sigma"] = family.workset_sigma;
        f["workset_cap"] = family.workset_cap;
        f["target_p99_p50"] = family.target_p99_p50;
        json bs = json::object();
        for (const auto& [batch, factor] : family.batch_scale)
            bs[std::to_string(batch)] = factor;
        f["batch_scale"] = std::move(bs);
        f["interference"] = family.interference;
        list.push_back(std::move(f));
    }
    j["families"] = std::move(list);
    return j.dump(2) + "\n";
}

ScenarioConfig parse_scenario_json(const std::string& text,
                                   const std::filesystem::path& base_dir) {
    const json root = parse_text(text, "scenario");
    Strict s(root, "scenario");
    ScenarioConfig config;
    config.workflow = workflow_from(s.raw("workflow"), "scenario.workflow");

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        return path;
    };
    config.profiles_csv = resolve(s.get<std::string>("profiles_csv"));
    if (s.has("tables_csv"))
        config.tables_csv = resolve(s.get<std::string>("tables_csv"));

    const auto names = s.get<std::vector<std::string>>("policies");
    if (names.empty()) throw ParseError("scenario.policies: empty");
    for (const std::string& name : names) {
        const auto policy = policy_from_string(name);
        if (!policy)
            throw ParseError("scenario.policies: unknown policy '" + name +
                             "'");
        config.policies.push_back(*policy);
    }

    config.sim.workflow = config.workflow.workflow;
    config.sim.n_requests = s.get<std::uint64_t>("n_requests");
    config.sim.seed = s.get<std::uint64_t>("seed");
    config.sim.weight = s.get_or<double>("weight", 1.0);
    config.sim.arrival_interval_ms =
        s.get_or<Millis>("arrival_interval_ms", 0);
    config.sim.miss_threshold = s.get_or<double>("miss_threshold", 0.01);
    const std::string miss =
        s.get_or<std::string>("miss_policy", "ScaleToMax");
    if (miss == "ScaleToMax")
        config.sim.miss_policy = MissPolicy::ScaleToMax;
    else if (miss == "RegenerateOnSpot")
        config.sim.miss_policy = MissPolicy::RegenerateOnSpot;
    else
        throw ParseError("scenario.miss_policy: unknown policy '" + miss +
                         "'");
    if (const json* d = s.raw_if("dynamics"))
        config.sim.dynamics = dynamics_from(*d, "scenario.dynamics");
    s.finish();

    if (config.sim.n_requests == 0)
        throw ParseError("scenario.n_requests: must be >= 1");
    const auto& weights = config.workflow.workflow.weights;
    if (std::find(weights.begin(), weights.end(), config.sim.weight) ==
        weights.end())
        throw ParseError(
            "scenario.weight: not among the workflow's table weights");
    return config;
}

ScenarioConfig read_scenario_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    try {
        return parse_scenario_json(os.str(), path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string scenario_to_json(const ScenarioConfig& config) {
    json j;
    j["workflow"] = workflow_to(config.workflow);
    j["profiles_csv"] = config.profiles_csv.string();
    if (config.tables_csv) j["tables_csv"] = config.tables_csv->string();
    json policies = json::array();
    for (Policy p : config.policies) policies.push_back(to_string(p));
    j["policies"] = std::move(policies);
    j["n_requests"] = config.sim.n_requests;
    j["seed"] = config.sim.seed;
    j["weight"] = config.sim.weight;
    j["arrival_interval_ms"] = config.sim.arrival_interval_ms;
    j["miss_policy"] = config.sim.miss_policy == MissPolicy::ScaleToMax
                           ? "ScaleToMax"
                           : "RegenerateOnSpot";
    j["miss_threshold"] = config.sim.miss_threshold;
    j["dynamics"] = dynamics_to(config.sim.dynamics);
    return j.dump(2) + "\n";
}

} // namespace latebind
