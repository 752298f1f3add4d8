#include "latebind/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "latebind/io.hpp"
#include "latebind/scenario.hpp"
#include "latebind/simulate.hpp"
#include "latebind/synthesize.hpp"
#include "latebind/workloads.hpp"

namespace latebind::cli {

namespace {

using nlohmann::json;

int input_error(std::ostream& err, const std::string& message) {
    err << "error: " << message << "\n";
    return kExitInput;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

int effective_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace

int run_profile(const ProfileArgs& args, std::ostream& out,
                std::ostream& err) {
    try {
        ResourceGrid grid{args.grid_k_min.value_or(1000),
                          args.grid_k_max.value_or(3000),
                          args.grid_step.value_or(100)};
        PercentileGrid percentiles = PercentileGrid::ranged(
            args.pct_min.value_or(1), args.pct_max.value_or(99),
            args.pct_step.value_or(5), args.pct_tail.value_or(99));

        std::vector<LatencySamples> samples;
        if (args.families_json) {
            const FamiliesConfig config =
                read_families_json(*args.families_json);
            if (!args.grid_k_min) grid = config.grid;
            for (const FunctionFamily& family : config.families)
                for (int batch : config.batches)
                    samples.push_back(generate_samples(family, batch,
                                                       grid,
                                                       config.n_per_size,
                                                       args.seed));
            if (args.samples_out) {
                write_samples_csv(*args.samples_out, samples);
                out << "samples: " << args.samples_out->string() << "\n";
            }
        } else if (args.samples_csv) {
            samples = read_samples_csv(*args.samples_csv);
        } else {
            err << "error: either --samples or --families is required\n";
            return kExitUsage;
        }

        ProfileSet profiles;
        for (const LatencySamples& group : samples)
            profiles.add(extract_profile(group, grid, percentiles,
                                         args.min_samples));
        write_profiles_csv(args.out, profiles);
        out << "profiles: " << args.out.string() << " ("
            << profiles.all().size() << " surfaces, "
            << percentiles.size() << " percentiles x " << grid.size()
            << " sizes)\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return input_error(err, e.what());
    }
}

int run_synthesize(const SynthesizeArgs& args, std::ostream& out,
                   std::ostream& err) {
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const WorkflowConfig config = read_workflow_json(args.workflow_json);
        const ProfileSet profiles = read_profiles_csv(args.profiles_csv);

        const auto chain = profiles.chain(config.workflow.functions,
                                          config.workflow.batch);
        if (!(chain[0]->resources() == config.grids.resources) ||
            !(chain[0]->percentiles() == config.grids.percentiles))
            return input_error(err,
                               "profile grids do not match the workflow's "
                               "declared grids");

        SynthOptions options;
        options.step_ms = args.step_ms;
        options.jobs = effective_jobs(args.jobs);
        if (args.mode == "head")
            options.mode = ExplorationMode::HeadOnly;
        else if (args.mode == "tail")
            options.mode = ExplorationMode::TailOnly;
        else if (args.mode == "head+next")
            options.mode = ExplorationMode::HeadAndNext;
        else {
            err << "error: unknown mode '" << args.mode
                << "' (head, tail, head+next)\n";
            return kExitUsage;
        }

        SynthStats stats;
        const std::vector<HintsTable> tables =
            synthesize_all(config.workflow, profiles, options, &stats);
        write_hints_csv(args.out, tables);

        out << "tables: " << args.out.string() << "\n"
            << "budgets swept: " << stats.budgets_swept << "\n"
            << "raw hints: " << stats.raw_hints << "\n"
            << "condensed rows: " << stats.condensed_rows << "\n"
            << "compression ratio: "
            << format_double(stats.compression_ratio() * 100.0) << "%\n"
            << "wall time: " << format_double(seconds_since(t0)) << " s\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return input_error(err, e.what());
    }
}

int run_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err) {
    try {
        const ScenarioConfig scenario = read_scenario_json(args.scenario_json);
        const ProfileSet profiles = read_profiles_csv(scenario.profiles_csv);
        SimConfig sim = scenario.sim;
        if (args.seed) sim.seed = *args.seed;

        const auto chain = profiles.chain(sim.workflow.functions,
                                          sim.workflow.batch);
        if (!(chain[0]->resources() == scenario.workflow.grids.resources) ||
            !(chain[0]->percentiles() ==
              scenario.workflow.grids.percentiles))
            return input_error(err,
                               "profile grids do not match the scenario's "
                               "declared grids");

        // tables per exploration mode: loaded from the scenario's file when
        // given, synthesized in-process otherwise
        std::map<ExplorationMode, std::vector<HintsTable>> tables_by_mode;
        std::optional<std::vector<HintsTable>> file_tables;
        if (scenario.tables_csv)
            file_tables = read_hints_csv(*scenario.tables_csv);
        for (Policy policy : scenario.policies) {
            if (!policy_uses_tables(policy)) continue;
            const ExplorationMode mode = exploration_mode_for(policy);
            if (tables_by_mode.count(mode)) continue;
            if (file_tables) {
                tables_by_mode[mode] = *file_tables;
            } else {
                SynthOptions options;
                options.mode = mode;
                options.jobs = effective_jobs(args.jobs);
                tables_by_mode[mode] =
                    synthesize_all(sim.workflow, profiles, options);
            }
        }

        std::ostringstream decision_log;
        std::vector<SimReport> reports;
        for (Policy policy : scenario.policies) {
            SimConfig run_config = sim;
            if (args.decision_log) {
                run_config.decision_sink =
                    [&decision_log](std::uint64_t invocation, int suffix,
                                    Millis budget,
                                    const AdaptationDecision& decision) {
                        decision_log << decision_log_line(invocation, suffix,
                                                          budget, decision)
                                     << '\n';
                    };
            }
            const std::vector<HintsTable>* tables =
                policy_uses_tables(policy)
                    ? &tables_by_mode.at(exploration_mode_for(policy))
                    : nullptr;
            reports.push_back(run_policy(policy, run_config, profiles, tables));
            const PolicyAggregates& a = reports.back().aggregates;
            out << to_string(policy) << ": p99=" << a.p99_ms
                << "ms violations=" << format_double(a.violation_rate * 100.0)
                << "% mean=" << format_double(a.mean_millicore_ms)
                << " millicore-ms miss_rate="
                << format_double(a.miss_rate * 100.0) << "%\n";
        }

        const std::string summary = summary_to_json(reports);
        const std::string requests = requests_to_csv(reports);
        write_file_atomic(args.out_dir / "summary.json", summary);
        write_file_atomic(args.out_dir / "requests.csv", requests);
        if (args.decision_log)
            write_file_atomic(*args.decision_log, decision_log.str());
        out << "report: " << (args.out_dir / "summary.json").string() << ", "
            << (args.out_dir / "requests.csv").string() << "\n";
        return kExitOk;
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ParseError& e) {
        // a bad policy name is a usage mistake, not a malformed input file
        if (std::string(e.what()).find("unknown policy") != std::string::npos) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        return input_error(err, e.what());
    } catch (const std::exception& e) {
        return input_error(err, e.what());
    }
}

namespace {

struct RunData {
    std::string label;
    json summary;
    // per policy, sorted end-to-end latencies
    std::map<std::string, std::vector<Millis>> e2e;
};

const json& require_field(const json& j, const char* key,
                          const std::string& context) {
    if (!j.contains(key))
        throw ParseError(context + ": missing field '" + key + "'");
    return j.at(key);
}

RunData load_run(const std::filesystem::path& dir) {
    RunData run;
    run.label = dir.filename().string().empty()
                    ? dir.parent_path().filename().string()
                    : dir.filename().string();

    const auto summary_path = dir / "summary.json";
    std::ifstream in(summary_path);
    if (!in) throw ParseError("cannot open " + summary_path.string());
    std::ostringstream os;
    os << in.rdbuf();
    run.summary = json::parse(os.str(), nullptr, false);
    if (run.summary.is_discarded())
        throw ParseError(summary_path.string() + ": invalid JSON");
    const json& policies =
        require_field(run.summary, "policies", summary_path.string());
    for (const auto& [name, agg] : policies.items()) {
        for (const char* key :
             {"p50_ms", "p95_ms", "p99_ms", "violation_rate",
              "mean_millicore_ms", "hits", "misses", "miss_rate"})
            require_field(agg, key, summary_path.string() + ": policy " + name);
    }

    const auto requests_path = dir / "requests.csv";
    std::ifstream req(requests_path);
    if (!req) throw ParseError("cannot open " + requests_path.string());
    std::string line;
    if (!std::getline(req, line))
        throw ParseError(requests_path.string() + ": empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) header.push_back(field);
    }
    const auto policy_col =
        std::find(header.begin(), header.end(), "policy") - header.begin();
    const auto e2e_col =
        std::find(header.begin(), header.end(), "end_to_end_ms") -
        header.begin();
    if (policy_col == static_cast<long>(header.size()) ||
        e2e_col == static_cast<long>(header.size()))
        throw ParseError(requests_path.string() +
                         ": missing field 'policy' or 'end_to_end_ms'");
    std::size_t line_no = 1;
    while (std::getline(req, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (static_cast<long>(fields.size()) <= std::max(policy_col, e2e_col))
            throw ParseError(requests_path.string() + ": line " +
                             std::to_string(line_no) + ": too few fields");
        run.e2e[fields[static_cast<std::size_t>(policy_col)]].push_back(
            std::stoll(fields[static_cast<std::size_t>(e2e_col)]));
    }
    for (auto& [policy, values] : run.e2e)
        std::sort(values.begin(), values.end());
    return run;
}

} // namespace

int run_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (args.run_dirs.empty()) {
            err << "error: at least one run directory is required\n";
            return kExitUsage;
        }
        std::vector<RunData> runs;
        for (const auto& dir : args.run_dirs) runs.push_back(load_run(dir));

        std::ostringstream cdf;
        cdf << "run,policy,end_to_end_ms,cum_fraction\n";
        for (const RunData& run : runs) {
            for (const auto& [policy, values] : run.e2e) {
                const auto n = static_cast<double>(values.size());
                for (std::size_t i = 0; i < values.size(); ++i) {
                    // one point per distinct latency, at its last occurrence
                    if (i + 1 < values.size() && values[i + 1] == values[i])
                        continue;
                    cdf << run.label << ',' << policy << ',' << values[i]
                        << ','
                        << format_double(static_cast<double>(i + 1) / n)
                        << '\n';
                }
            }
        }

        std::ostringstream consumption;
        consumption << "run,policy,mean_millicore_ms,normalized_by_optimal\n";
        std::ostringstream hitmiss;
        hitmiss << "run,policy,hits,misses,miss_rate\n";
        for (const RunData& run : runs) {
            for (const auto& [policy, agg] : run.summary.at("policies").items()) {
                consumption << run.label << ',' << policy << ','
                            << format_double(
                                   agg.at("mean_millicore_ms").get<double>())
                            << ',';
                if (agg.contains("normalized_by_optimal"))
                    consumption << format_double(
                        agg.at("normalized_by_optimal").get<double>());
                consumption << '\n';
                hitmiss << run.label << ',' << policy << ','
                        << agg.at("hits").get<std::uint64_t>() << ','
                        << agg.at("misses").get<std::uint64_t>() << ','
                        << format_double(agg.at("miss_rate").get<double>())
                        << '\n';
            }
        }

        write_file_atomic(args.out_dir / "latency_cdf.csv", cdf.str());
        write_file_atomic(args.out_dir / "consumption.csv", consumption.str());
        write_file_atomic(args.out_dir / "hitmiss.csv", hitmiss.str());
        out << "plot data: " << (args.out_dir / "latency_cdf.csv").string()
            << ", " << (args.out_dir / "consumption.csv").string() << ", "
            << (args.out_dir / "hitmiss.csv").string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return input_error(err, e.what());
    }
}

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
    CLI::App app{
        "Late-binding resource adaptation for serverless workflow chains: "
        "percentile profiling, hints synthesis and condensing, online "
        "adaptation, and a discrete-event simulator with baselines."};
    app.require_subcommand(1);

    ProfileArgs profile_args;
    auto* profile = app.add_subcommand(
        "profile", "Extract latency percentile surfaces from samples");
    std::string p_samples, p_families, p_samples_out;
    std::string p_out;
    profile->add_option("--samples", p_samples,
                        "Sample CSV (function,batch,millicores,latency_ms)");
    profile->add_option("--families", p_families,
                        "Family spec JSON; generates samples deterministically");
    profile->add_option("--samples-out", p_samples_out,
                        "Also write generated samples to this CSV");
    profile->add_option("--out", p_out, "Output profile CSV")->required();
    profile->add_option("--k-min", profile_args.grid_k_min, "Grid minimum");
    profile->add_option("--k-max", profile_args.grid_k_max, "Grid maximum");
    profile->add_option("--k-step", profile_args.grid_step, "Grid step");
    profile->add_option("--p-min", profile_args.pct_min, "Lowest percentile");
    profile->add_option("--p-max", profile_args.pct_max, "Highest percentile");
    profile->add_option("--p-step", profile_args.pct_step, "Percentile step");
    profile->add_option("--p-tail", profile_args.pct_tail, "Tail percentile");
    profile->add_option("--min-samples", profile_args.min_samples,
                        "Required samples per (function, size)");
    profile->add_option("--seed", profile_args.seed,
                        "Seed for generated samples");

    SynthesizeArgs synth_args;
    auto* synthesize = app.add_subcommand(
        "synthesize", "Generate and condense hints tables for a workflow");
    std::string s_profiles, s_workflow, s_out;
    synthesize->add_option("--profiles", s_profiles, "Profile CSV")
        ->required();
    synthesize->add_option("--workflow", s_workflow, "Workflow JSON")
        ->required();
    synthesize->add_option("--out", s_out, "Output hints CSV")->required();
    synthesize->add_option("--mode", synth_args.mode,
                           "Percentile exploration: head, tail, head+next");
    synthesize->add_option("--step-ms", synth_args.step_ms,
                           "Budget ladder step (ms)");
    synthesize->add_option("--jobs", synth_args.jobs,
                           "Worker threads (0 = hardware)");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand(
        "simulate", "Replay a request stream under the configured policies");
    std::string m_scenario, m_out_dir, m_log;
    simulate->add_option("--scenario", m_scenario, "Scenario JSON")
        ->required();
    simulate->add_option("--out-dir", m_out_dir, "Report output directory")
        ->required();
    simulate->add_option("--seed", sim_args.seed,
                         "Override the scenario seed");
    simulate->add_option("--decision-log", m_log,
                         "Write adapter decisions (JSON lines) here");
    simulate->add_option("--jobs", sim_args.jobs,
                         "Worker threads for in-process synthesis");

    ReportArgs report_args;
    auto* report = app.add_subcommand(
        "report", "Derive plot-ready CSVs from simulation reports");
    std::vector<std::string> r_dirs;
    std::string r_out_dir;
    report->add_option("--run", r_dirs, "Simulate output directory (repeat)")
        ->required();
    report->add_option("--out-dir", r_out_dir, "Plot data directory")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (profile->parsed()) {
        if (!p_samples.empty()) profile_args.samples_csv = p_samples;
        if (!p_families.empty()) profile_args.families_json = p_families;
        if (!p_samples_out.empty()) profile_args.samples_out = p_samples_out;
        profile_args.out = p_out;
        return run_profile(profile_args, out, err);
    }
    if (synthesize->parsed()) {
        synth_args.profiles_csv = s_profiles;
        synth_args.workflow_json = s_workflow;
        synth_args.out = s_out;
        return run_synthesize(synth_args, out, err);
    }
    if (simulate->parsed()) {
        sim_args.scenario_json = m_scenario;
        sim_args.out_dir = m_out_dir;
        if (!m_log.empty()) sim_args.decision_log = m_log;
        return run_simulate(sim_args, out, err);
    }
    if (report->parsed()) {
        for (const auto& d : r_dirs) report_args.run_dirs.push_back(d);
        report_args.out_dir = r_out_dir;
        return run_report(report_args, out, err);
    }
    err << "error: no subcommand\n";
    return kExitUsage;
}

} // namespace latebind::cli
