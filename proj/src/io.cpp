#include "latebind/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace latebind {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t pos = text.find('\n', start);
        if (pos == std::string::npos) pos = text.size();
        std::string line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = pos + 1;
    }
    return lines;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& message) {
    throw ParseError("line " + std::to_string(line_no) + ": " + message);
}

std::int64_t parse_int(const std::string& field, std::size_t line_no,
                       const char* what) {
    std::int64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        fail(line_no, std::string("expected integer ") + what + ", got '" +
                          field + "'");
    return value;
}

double parse_double(const std::string& field, std::size_t line_no,
                    const char* what) {
    double value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        fail(line_no, std::string("expected number ") + what + ", got '" +
                          field + "'");
    return value;
}

void expect_header(const std::vector<std::string>& lines, const char* header) {
    if (lines.empty()) fail(1, std::string("expected header '") + header + "'");
    if (lines[0] != header)
        fail(1, std::string("expected header '") + header + "', got '" +
                    lines[0] + "'");
}

std::string identifier(const std::string& field, std::size_t line_no,
                       const char* what) {
    if (!valid_identifier(field))
        fail(line_no, std::string("invalid ") + what + " '" + field +
                          "' (allowed: [A-Za-z0-9_.-]+)");
    return field;
}

} // namespace

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '.' ||
                        c == '-';
        if (!ok) return false;
    }
    return true;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp.string() +
                                     " for writing");
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

/* ---- samples ----------------------------------------------------- */

static const char* kSamplesHeader = "function,batch,millicores,latency_ms";

std::string samples_to_csv(const std::vector<LatencySamples>& samples) {
    // canonical group order keeps write -> read -> write byte-stable
    std::vector<const LatencySamples*> sorted;
    sorted.reserve(samples.size());
    for (const auto& group : samples) sorted.push_back(&group);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const LatencySamples* a, const LatencySamples* b) {
                         return std::tie(a->function, a->batch) <
                                std::tie(b->function, b->batch);
                     });
    std::ostringstream os;
    os << kSamplesHeader << '\n';
    for (const LatencySamples* group : sorted)
        for (const auto& [k, list] : group->by_size)
            for (Millis v : list)
                os << group->function << ',' << group->batch << ',' << k << ','
                   << v << '\n';
    return os.str();
}

std::vector<LatencySamples> samples_from_csv(const std::string& text) {
    const auto lines = split_lines(text);
    expect_header(lines, kSamplesHeader);
    if (lines.size() <= 1) throw ParseError("no samples");

    std::map<std::pair<std::string, int>, LatencySamples> groups;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_line(lines[i]);
        if (fields.size() != 4)
            fail(i + 1, "expected 4 fields, got " +
                            std::to_string(fields.size()));
        const std::string fn = identifier(fields[0], i + 1, "function id");
        const int batch =
            static_cast<int>(parse_int(fields[1], i + 1, "batch"));
        const auto k =
            static_cast<Millicores>(parse_int(fields[2], i + 1, "millicores"));
        const Millis v = parse_int(fields[3], i + 1, "latency_ms");
        if (batch < 1) fail(i + 1, "batch must be >= 1");
        if (v <= 0) fail(i + 1, "latency_ms must be positive");
        auto& group = groups[{fn, batch}];
        group.function = fn;
        group.batch = batch;
        group.by_size[k].push_back(v);
    }
    if (groups.empty()) throw ParseError("no samples");

    std::vector<LatencySamples> out;
    out.reserve(groups.size());
    for (auto& [key, group] : groups) out.push_back(std::move(group));
    return out;
}

/* ---- profiles ---------------------------------------------------- */

static const char* kProfilesHeader =
    "function,batch,percentile,millicores,latency_ms";

std::string profiles_to_csv(const ProfileSet& profiles) {
    std::ostringstream os;
    os << kProfilesHeader << '\n';
    for (const auto& [key, profile] : profiles.all()) {
        const auto& pct = profile.percentiles();
        const auto& grid = profile.resources();
        for (int pi = 0; pi < pct.size(); ++pi)
            for (int ki = 0; ki < grid.size(); ++ki)
                os << profile.function() << ',' << profile.batch() << ','
                   << pct.values[static_cast<std::size_t>(pi)] << ','
                   << grid.at(ki) << ',' << profile.at(pi, ki) << '\n';
    }
    return os.str();
}

ProfileSet profiles_from_csv(const std::string& text) {
    const auto lines = split_lines(text);
    expect_header(lines, kProfilesHeader);

    struct Rows {
        std::set<int> percentiles;
        std::set<Millicores> sizes;
        std::map<std::pair<int, Millicores>, Millis> values;
    };
    std::map<std::pair<std::string, int>, Rows> groups;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_line(lines[i]);
        if (fields.size() != 5)
            fail(i + 1, "expected 5 fields, got " +
                            std::to_string(fields.size()));
        const std::string fn = identifier(fields[0], i + 1, "function id");
        const int batch =
            static_cast<int>(parse_int(fields[1], i + 1, "batch"));
        const int p =
            static_cast<int>(parse_int(fields[2], i + 1, "percentile"));
        const auto k =
            static_cast<Millicores>(parse_int(fields[3], i + 1, "millicores"));
        const Millis v = parse_int(fields[4], i + 1, "latency_ms");
        auto& rows = groups[{fn, batch}];
        rows.percentiles.insert(p);
        rows.sizes.insert(k);
        if (!rows.values.emplace(std::make_pair(p, k), v).second)
            fail(i + 1, "duplicate (percentile, millicores) entry");
    }
    if (groups.empty()) throw ParseError("no profile rows");

    ProfileSet set;
    for (const auto& [key, rows] : groups) {
        PercentileGrid pct;
        pct.values.assign(rows.percentiles.begin(), rows.percentiles.end());
        pct.validate();

        const std::vector<Millicores> sizes(rows.sizes.begin(),
                                            rows.sizes.end());
        ResourceGrid grid;
        grid.k_min = sizes.front();
        grid.k_max = sizes.back();
        grid.step = sizes.size() > 1 ? sizes[1] - sizes[0] : 1;
        for (std::size_t i = 1; i < sizes.size(); ++i)
            if (sizes[i] - sizes[i - 1] != grid.step)
                throw ParseError("profile for " + key.first +
                                 ": sizes do not form a uniform grid");
        grid.validate();

        std::vector<Millis> surface;
        surface.reserve(rows.values.size());
        for (int p : pct.values)
            for (Millicores k : sizes) {
                auto it = rows.values.find({p, k});
                if (it == rows.values.end())
                    throw ParseError("profile for " + key.first +
                                     ": missing surface point (p=" +
                                     std::to_string(p) + ", k=" +
                                     std::to_string(k) + ")");
                surface.push_back(it->second);
            }
        try {
            set.add(LatencyProfile(key.first, key.second, grid, pct,
                                   std::move(surface)));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what());
        }
    }
    return set;
}

/* ---- hints tables ------------------------------------------------ */

static const char* kHintsHeader =
    "workflow,suffix,weight,batch,t_start_ms,t_end_ms,head_millicores";

std::string hints_to_csv(const std::vector<HintsTable>& tables) {
    std::vector<const HintsTable*> sorted;
    sorted.reserve(tables.size());
    for (const auto& t : tables) sorted.push_back(&t);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const HintsTable* a, const HintsTable* b) {
                         return a->key < b->key;
                     });
    std::ostringstream os;
    os << kHintsHeader << '\n';
    for (const HintsTable* table : sorted)
        for (const HintRow& row : table->rows)
            os << table->key.workflow << ',' << table->key.suffix << ','
               << format_double(table->key.weight) << ',' << table->key.batch
               << ',' << row.t_start_ms << ',' << row.t_end_ms << ','
               << row.head_size << '\n';
    return os.str();
}

std::vector<HintsTable> hints_from_csv(const std::string& text) {
    const auto lines = split_lines(text);
    expect_header(lines, kHintsHeader);

    std::vector<HintsTable> tables;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_line(lines[i]);
        if (fields.size() != 7)
            fail(i + 1, "expected 7 fields, got " +
                            std::to_string(fields.size()));
        HintsKey key;
        key.workflow = identifier(fields[0], i + 1, "workflow id");
        key.suffix = static_cast<int>(parse_int(fields[1], i + 1, "suffix"));
        key.weight = parse_double(fields[2], i + 1, "weight");
        key.batch = static_cast<int>(parse_int(fields[3], i + 1, "batch"));
        HintRow row;
        row.t_start_ms = parse_int(fields[4], i + 1, "t_start_ms");
        row.t_end_ms = parse_int(fields[5], i + 1, "t_end_ms");
        row.head_size = static_cast<Millicores>(
            parse_int(fields[6], i + 1, "head_millicores"));
        if (row.t_start_ms > row.t_end_ms)
            fail(i + 1, "t_start_ms must be <= t_end_ms");
        if (key.suffix < 1) fail(i + 1, "suffix must be >= 1");

        if (tables.empty() || !(tables.back().key == key)) {
            if (!tables.empty() && key < tables.back().key)
                fail(i + 1, "tables must be sorted by "
                            "(workflow, suffix, weight, batch)");
            tables.push_back(HintsTable{key, {}, 1});
        }
        auto& rows = tables.back().rows;
        if (!rows.empty() && row.t_start_ms <= rows.back().t_end_ms)
            fail(i + 1, "rows of a table must be sorted and disjoint");
        rows.push_back(row);
    }
    if (tables.empty()) throw ParseError("no hint rows");

    // infer the budget ladder step from the row joints
    for (auto& table : tables) {
        Millis step = 1;
        bool have = false;
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            const Millis gap =
                table.rows[i].t_start_ms - table.rows[i - 1].t_end_ms;
            if (!have) {
                step = gap;
                have = true;
            } else if (gap != step) {
                throw ParseError("table " + table.key.to_string() +
                                 ": inconsistent budget ladder");
            }
        }
        table.step_ms = step;
    }
    return tables;
}

/* ---- file wrappers ------------------------------------------------ */

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

template <typename F>
auto with_path_context(const std::filesystem::path& path, F&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace

std::vector<LatencySamples> read_samples_csv(
    const std::filesystem::path& path) {
    return with_path_context(path,
                             [&] { return samples_from_csv(read_file(path)); });
}

void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<LatencySamples>& samples) {
    write_file_atomic(path, samples_to_csv(samples));
}

ProfileSet read_profiles_csv(const std::filesystem::path& path) {
    return with_path_context(
        path, [&] { return profiles_from_csv(read_file(path)); });
}

void write_profiles_csv(const std::filesystem::path& path,
                        const ProfileSet& profiles) {
    write_file_atomic(path, profiles_to_csv(profiles));
}

std::vector<HintsTable> read_hints_csv(const std::filesystem::path& path) {
    return with_path_context(path,
                             [&] { return hints_from_csv(read_file(path)); });
}

void write_hints_csv(const std::filesystem::path& path,
                     const std::vector<HintsTable>& tables) {
    write_file_atomic(path, hints_to_csv(tables));
}

/* ---- simulation reports ------------------------------------------ */

std::string requests_to_csv(const std::vector<SimReport>& reports) {
    std::size_t n_functions = 0;
    for (const auto& report : reports)
        for (const auto& trace : report.traces)
            n_functions = std::max(n_functions, trace.functions.size());

    std::ostringstream os;
    os << "policy,request,end_to_end_ms,slack,slo_met,total_millicore_ms";
    for (std::size_t i = 1; i <= n_functions; ++i)
        os << ",f" << i << "_millicores,f" << i << "_latency_ms,f" << i
           << "_source,f" << i << "_percentile";
    os << '\n';
    for (const auto& report : reports) {
        for (const auto& trace : report.traces) {
            os << report.policy << ',' << trace.request << ','
               << trace.end_to_end_ms << ',' << format_double(trace.slack)
               << ',' << (trace.slo_met ? 1 : 0) << ','
               << format_double(trace.total_millicore_ms);
            for (const auto& fo : trace.functions)
                os << ',' << fo.alloc << ',' << fo.latency_ms << ','
                   << to_string(fo.source) << ',' << fo.percentile;
            os << '\n';
        }
    }
    return os.str();
}

std::string summary_to_json(const std::vector<SimReport>& reports) {
    json root = json::object();
    if (!reports.empty()) {
        root["workflow"] = reports.front().workflow;
        root["slo_ms"] = reports.front().slo_ms;
        root["seed"] = reports.front().seed;
        root["n_requests"] = reports.front().traces.size();
    }
    double optimal_mean = 0.0;
    for (const auto& report : reports)
        if (report.policy == "Optimal")
            optimal_mean = report.aggregates.mean_millicore_ms;

    json policies = json::object();
    for (const auto& report : reports) {
        const PolicyAggregates& a = report.aggregates;
        json p;
        p["p50_ms"] = a.p50_ms;
        p["p95_ms"] = a.p95_ms;
        p["p99_ms"] = a.p99_ms;
        p["violation_rate"] = a.violation_rate;
        p["mean_millicore_ms"] = a.mean_millicore_ms;
        p["hits"] = a.hits;
        p["misses"] = a.misses;
        p["miss_rate"] = a.miss_rate;
        if (optimal_mean > 0.0)
            p["normalized_by_optimal"] = a.mean_millicore_ms / optimal_mean;
        policies[report.policy] = std::move(p);
    }
    root["policies"] = std::move(policies);
    return root.dump(2) + "\n";
}

std::string decision_log_line(std::uint64_t request, int suffix,
                              Millis budget_ms,
                              const AdaptationDecision& decision) {
    json line;
    line["request"] = request;
    line["suffix"] = suffix;
    line["budget_ms"] = budget_ms;
    line["head_millicores"] = decision.head_size;
    line["source"] = to_string(decision.source);
    line["lookup_latency_us"] = decision.lookup_latency_us;
    return line.dump();
}

} // namespace latebind
