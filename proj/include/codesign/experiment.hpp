#pragma once

// Experiment harness behind the command-line tool: configuration, instance files,
// per-run trace CSVs, and aggregate reports.
//
// Output layout under the output directory:
//   instances/<instance>.json                 oracle antichain and reference point
//   runs/<instance>__<method>__seed<k>.csv    one trace per (instance, method, seed)
//   runs/<...>.metrics.csv                    per-iteration HVD of that trace (report)
//   logs/<...>.log                            error message of a failed run
//   report/{runs,summary,table,recovery_table}.csv and report/curves/*.csv

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "codesign/benchmarks.hpp"
#include "codesign/graph.hpp"
#include "codesign/io.hpp"
#include "codesign/metrics.hpp"

namespace codesign {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int run_schema_version = 1;

// ---- configuration ----------------------------------------------------------

enum class Algorithm { alg1, alg2, halton };

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::alg1: return "alg1";
        case Algorithm::alg2: return "alg2";
        case Algorithm::halton: return "halton-baseline";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "alg1") return Algorithm::alg1;
    if (s == "alg2") return Algorithm::alg2;
    if (s == "halton-baseline" || s == "halton") return Algorithm::halton;
    throw configuration_error("unknown algorithm '" + s + "' (expected alg1, alg2 or halton-baseline)");
}

struct MethodSpec {
    std::string name;
    Algorithm algorithm = Algorithm::alg1;
    double delta = 0.0;
    std::size_t reject_cap = 50;
    Flavor flavor = Flavor::monotone;
    std::size_t relax_k = 1;
    double lipschitz = 1.0;
    std::optional<double> norm_p;
    bool clip_at_bottom = true;
    bool early_termination = true;

    // The pure-Halton baseline accepts every proposal untested.
    SamplerConfig sampler(std::size_t budget, std::uint64_t seed) const {
        SamplerConfig c;
        c.budget = budget;
        c.seed = seed;
        c.reject_cap = reject_cap;
        c.delta = algorithm == Algorithm::halton ? 1.0 : delta;
        c.evaluator.flavor = algorithm == Algorithm::halton ? Flavor::trivial : flavor;
        c.evaluator.relax_k = relax_k;
        c.evaluator.lipschitz = lipschitz;
        c.evaluator.norm_p = norm_p;
        c.evaluator.clip_at_bottom = clip_at_bottom;
        return c;
    }
};

struct ExperimentConfig {
    std::vector<std::string> instances;
    std::vector<MethodSpec> methods;
    std::vector<std::uint64_t> seeds;
    std::size_t budget = 100;
    double margin = 0.1;
    std::size_t grid_points = 1'000'000;
    std::string output_dir = "results";
};

// "1-100", "3", "1,4,9-12"
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream in(text);
    std::string part;
    static const std::regex range(R"(^\s*(\d+)\s*(?:-\s*(\d+))?\s*$)");
    while (std::getline(in, part, ',')) {
        std::smatch m;
        if (!std::regex_match(part, m, range)) throw configuration_error("bad seed list '" + text + "'");
        const std::uint64_t a = std::stoull(m[1]);
        const std::uint64_t b = m[2].matched ? std::stoull(m[2]) : a;
        if (b < a) throw configuration_error("descending seed range '" + part + "'");
        for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    }
    if (out.empty()) throw configuration_error("empty seed list");
    return out;
}

inline json method_to_json(const MethodSpec& m) {
    json e = {{"flavor", to_string(m.flavor)},
              {"relax_k", m.relax_k},
              {"lipschitz", m.lipschitz},
              {"clip_at_bottom", m.clip_at_bottom}};
    if (m.norm_p) e["norm_p"] = *m.norm_p;
    return {{"name", m.name},
            {"algorithm", to_string(m.algorithm)},
            {"delta", m.delta},
            {"reject_cap", m.reject_cap},
            {"early_termination", m.early_termination},
            {"evaluator", e}};
}

inline MethodSpec method_from_json(const json& j) {
    MethodSpec m;
    m.name = j.at("name").get<std::string>();
    if (m.name.empty() || m.name.find_first_of("/\\ ") != std::string::npos)
        throw configuration_error("method name '" + m.name + "' must be nonempty without spaces or slashes");
    m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    m.delta = j.value("delta", 0.0);
    m.reject_cap = j.value("reject_cap", std::size_t{50});
    m.early_termination = j.value("early_termination", true);
    if (j.contains("evaluator")) {
        const json& e = j.at("evaluator");
        m.flavor = parse_flavor(e.value("flavor", std::string("monotone")));
        m.relax_k = e.value("relax_k", std::size_t{1});
        m.lipschitz = e.value("lipschitz", 1.0);
        if (e.contains("norm_p")) m.norm_p = e.at("norm_p").get<double>();
        m.clip_at_bottom = e.value("clip_at_bottom", true);
    }
    if (m.flavor == Flavor::linear && m.algorithm != Algorithm::halton)
        throw configuration_error("method '" + m.name + "': linear evaluators need a feature model and are library-only");
    if (m.relax_k < 1) throw configuration_error("method '" + m.name + "': relax_k must be >= 1");
    m.sampler(1, 0).validate();
    return m;
}

inline json config_to_json(const ExperimentConfig& c) {
    json methods = json::array();
    for (const auto& m : c.methods) methods.push_back(method_to_json(m));
    return {{"version", 1},
            {"instances", c.instances},
            {"methods", methods},
            {"seeds", c.seeds},
            {"budget", c.budget},
            {"metric", {{"margin", c.margin}, {"grid_points", c.grid_points}}},
            {"output_dir", c.output_dir}};
}

inline ExperimentConfig config_from_json(const json& j) {
    if (j.value("version", 1) != 1) throw configuration_error("unsupported config version");
    ExperimentConfig c;
    c.instances = j.value("instances", std::vector<std::string>{});
    if (j.contains("methods"))
        for (const auto& m : j.at("methods")) c.methods.push_back(method_from_json(m));
    if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        c.seeds = s.is_string() ? parse_seed_list(s.get<std::string>()) : s.get<std::vector<std::uint64_t>>();
    }
    c.budget = j.value("budget", std::size_t{100});
    if (j.contains("metric")) {
        c.margin = j.at("metric").value("margin", 0.1);
        c.grid_points = j.at("metric").value("grid_points", std::size_t{1'000'000});
    }
    c.output_dir = j.value("output_dir", std::string("results"));

    std::set<std::string> names;
    for (const auto& m : c.methods)
        if (!names.insert(m.name).second) throw configuration_error("duplicate method name '" + m.name + "'");
    std::set<std::string> ids(c.instances.begin(), c.instances.end());
    if (ids.size() != c.instances.size()) throw configuration_error("duplicate instance id");
    std::set<std::uint64_t> seeds(c.seeds.begin(), c.seeds.end());
    if (seeds.size() != c.seeds.size()) throw configuration_error("duplicate seed");
    if (c.budget < 1) throw configuration_error("budget must be >= 1");
    if (!(c.margin >= 0)) throw configuration_error("metric margin must be nonnegative");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw configuration_error("cannot open config '" + path + "'");
    try {
        return config_from_json(json::parse(in, nullptr, true, true));
    } catch (const json::exception& e) {
        throw configuration_error("config '" + path + "': " + e.what());
    }
}

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// The output directory is where results go, not what they are, so it is left out.
inline std::string config_hash(const ExperimentConfig& c) {
    json j = config_to_json(c);
    j.erase("output_dir");
    return fnv1a_hex(j.dump());
}

// ---- instances --------------------------------------------------------------

// Single-problem ids are those accepted by instance_from_id. Graph ids:
//   graph:n<nodes>i<items>p<poset size>:seed<k>   generated random finite graph
//   graph-file:<path>                             graph description file
// Graph targets are the least system functionality.
struct ResolvedInstance {
    std::string id;
    std::optional<Dpi> problem;
    std::optional<CoDesignGraph> graph;
    Element target;
    Poset fun, res;

    bool is_graph() const { return graph.has_value(); }
};

inline ResolvedInstance resolve_instance(const std::string& id) {
    static const std::regex graph_re(R"(^graph:n(\d+)i(\d+)p(\d+):seed(\d+)$)");
    std::smatch m;
    auto from_graph = [&](CoDesignGraph g) {
        require_valid(g);
        auto sys = system_interface(g);
        return ResolvedInstance{id, std::nullopt, std::move(g), sys.fun->bottom(), sys.fun, sys.res};
    };
    if (std::regex_match(id, m, graph_re))
        return from_graph(gen_finite_random(std::stoul(m[1]), std::stoul(m[2]), std::stoul(m[3]), std::stoull(m[4])));
    if (id.rfind("graph-file:", 0) == 0) return from_graph(load_graph(id.substr(11)));
    Instance inst = instance_from_id(id);
    Poset f = inst.dpi.fun_poset(), r = inst.dpi.res_poset();
    return ResolvedInstance{id, inst.dpi, std::nullopt, inst.target, f, r};
}

inline std::string slug(const std::string& id) {
    std::string s = id;
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_') c = '_';
    return s;
}

struct Truth {
    Antichain antichain;
    std::vector<Impl> witnesses;
    std::string method;  // exhaustive, critical-points, grid
    std::optional<Point> reference;
};

inline Truth compute_truth(const ResolvedInstance& inst, const ExperimentConfig& cfg) {
    Truth t{Antichain(inst.res), {}, "exhaustive", std::nullopt};
    if (inst.is_graph()) {
        auto rg = presolve(*inst.graph);
        const auto plan = rg.plan(inst.target);
        const Dpi& q = rg.expensive_dpi();
        std::vector<std::pair<Element, Impl>> all;
        for (const auto& i : q.space().items())
            for (auto& w : rg.solve(i, q.prov(i), q.req(i), plan).witnesses)
                all.emplace_back(std::move(w.resource), std::move(w.implementation));
        for (const auto& [r, w] : all) t.antichain.insert(r);
        for (const auto& r : t.antichain.members())
            for (const auto& [r2, w] : all)
                if (r2 == r) {
                    t.witnesses.push_back(w);
                    break;
                }
    } else {
        const Dpi& d = *inst.problem;
        if (!d.space().is_finite()) t.method = d.critical_points() ? "critical-points" : "grid";
        auto o = fix_fun_min_res(d, inst.target, {cfg.grid_points});
        t.antichain = std::move(o.antichain);
        t.witnesses = std::move(o.witnesses);
    }
    if (inst.res->is_real() && !t.antichain.empty()) t.reference = reference_point(t.antichain, cfg.margin);
    return t;
}

inline json truth_to_json(const ResolvedInstance& inst, const Truth& t, const ExperimentConfig& cfg) {
    json members = json::array(), witnesses = json::array();
    for (const auto& r : t.antichain.members()) members.push_back(format_element(*inst.res, r));
    for (const auto& w : t.witnesses) witnesses.push_back(format_impl(w));
    json j = {{"schema", 1},
              {"config_hash", config_hash(cfg)},
              {"id", inst.id},
              {"kind", inst.is_graph() ? "graph" : "problem"},
              {"target", format_element(*inst.fun, inst.target)},
              {"oracle",
               {{"method", t.method}, {"grid_points", cfg.grid_points}, {"antichain", members}, {"witnesses", witnesses}}},
              {"reference_point", nullptr}};
    if (t.reference) j["reference_point"] = *t.reference;
    return j;
}

inline fs::path instance_path(const ExperimentConfig& cfg, const std::string& id) {
    return fs::path(cfg.output_dir) / "instances" / (slug(id) + ".json");
}

inline Truth load_truth(const ResolvedInstance& inst, const ExperimentConfig& cfg) {
    const fs::path p = instance_path(cfg, inst.id);
    std::ifstream in(p);
    if (!in) throw configuration_error("instance '" + inst.id + "' is not generated (missing " + p.string() + ")");
    const json j = json::parse(in);
    if (j.at("id") != inst.id) throw configuration_error(p.string() + " belongs to another instance");
    Truth t{Antichain(inst.res), {}, j.at("oracle").at("method"), std::nullopt};
    for (const auto& s : j.at("oracle").at("antichain")) t.antichain.insert(parse_element(*inst.res, s.get<std::string>()));
    for (const auto& s : j.at("oracle").at("witnesses")) t.witnesses.push_back(parse_impl(s.get<std::string>()));
    if (!j.at("reference_point").is_null()) t.reference = j.at("reference_point").get<Point>();
    return t;
}

// Writes through a temporary file so readers never see a partial file.
inline void write_atomically(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw configuration_error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.flush()) throw configuration_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

// Returns the instance files written.
inline std::vector<fs::path> cmd_generate(const ExperimentConfig& cfg) {
    std::vector<fs::path> out;
    for (const auto& id : cfg.instances) {
        auto inst = resolve_instance(id);
        auto truth = compute_truth(inst, cfg);
        const fs::path p = instance_path(cfg, id);
        write_atomically(p, truth_to_json(inst, truth, cfg).dump(2) + "\n");
        out.push_back(p);
    }
    return out;
}

// ---- runs -------------------------------------------------------------------

struct RunKey {
    std::string instance;
    const MethodSpec* method = nullptr;
    std::uint64_t seed = 0;

    std::string stem() const { return slug(instance) + "__" + method->name + "__seed" + std::to_string(seed); }
};

inline fs::path run_path(const ExperimentConfig& cfg, const RunKey& k) {
    return fs::path(cfg.output_dir) / "runs" / (k.stem() + ".csv");
}

// Identifies everything that determines a trace; a finished file with another key is rerun.
inline std::string run_fingerprint(const RunKey& k, std::size_t budget) {
    json j = {{"instance", k.instance}, {"method", method_to_json(*k.method)}, {"seed", k.seed}, {"budget", budget}};
    return fnv1a_hex(j.dump());
}

inline std::vector<RunKey> run_keys(const ExperimentConfig& cfg) {
    std::vector<RunKey> out;
    for (const auto& id : cfg.instances)
        for (const auto& m : cfg.methods)
            for (auto s : cfg.seeds) out.push_back({id, &m, s});
    return out;
}

inline RunTrace execute_run(const ResolvedInstance& inst, const MethodSpec& m, std::uint64_t seed, std::size_t budget) {
    const SamplerConfig sc = m.sampler(budget, seed);
    const bool graph_driver = inst.is_graph() || m.algorithm == Algorithm::alg2;
    if (!graph_driver) return run_elimination_sampler(*inst.problem, inst.target, sc);
    if (inst.is_graph()) {
        if (m.algorithm == Algorithm::alg1)
            throw configuration_error("method '" + m.name + "' runs alg1, which needs a single-problem instance");
        return run_propagated_sampler(*inst.graph, inst.target, sc, {}, m.early_termination);
    }
    CoDesignGraph g;
    g.add_node("q", *inst.problem);
    g.set_expensive("q");
    return run_propagated_sampler(g, inst.target, sc, {}, m.early_termination);
}

// Trace CSV. Rows of kind "step" are the expensive problem's queries; graph runs add
// "system" rows, one per witness completion. Target-infeasible rows log the greatest
// resource in logged_resource while resource keeps the true value.
inline std::string trace_csv(const ResolvedInstance& inst, const RunKey& k, const ExperimentConfig& cfg,
                             const RunTrace& tr) {
    std::ostringstream os;
    os << "# codesign-run schema " << run_schema_version << '\n'
       << "# config_hash " << config_hash(cfg) << '\n'
       << "# run_key " << run_fingerprint(k, cfg.budget) << '\n'
       << "# instance " << k.instance << '\n'
       << "# method " << k.method->name << '\n'
       << "# seed " << k.seed << '\n'
       << "# budget " << cfg.budget << '\n'
       << "kind,iteration,rejections,reason,target_feasible,implementation,functionality,resource,logged_resource\n";
    const History& local = tr.local_history ? *tr.local_history : tr.history;
    const PosetSpec& lf = *local.fun_poset();
    const PosetSpec& lr = *local.res_poset();
    auto row = [&](const char* kind, const Record& rec, const std::string& reason, const PosetSpec& F,
                   const PosetSpec& R, const std::optional<Element>& target) {
        std::string feasible = "", logged = "";
        if (target) {
            const bool ok = leq(F, *target, rec.functionality());
            feasible = ok ? "1" : "0";
            logged = ok ? format_element(R, rec.resource()) : "top";
        }
        os << kind << ',' << rec.iteration << ',' << rec.rejections << ',' << reason << ',' << feasible << ','
           << csv_field(format_impl(rec.implementation())) << ',' << csv_field(format_element(F, rec.functionality()))
           << ',' << csv_field(format_element(R, rec.resource())) << ',' << csv_field(logged) << '\n';
    };
    std::size_t next_system = 0;
    const std::optional<Element> local_target =
        tr.local_history ? std::nullopt : std::optional<Element>(inst.target);
    for (std::size_t s = 0; s < tr.steps.size(); ++s) {
        row("step", local[s], to_string(tr.steps[s].reason), lf, lr, local_target);
        if (!tr.local_history) continue;
        const std::size_t t = tr.steps[s].iteration;
        for (; next_system < tr.history.size() && tr.history[next_system].iteration == t; ++next_system)
            row("system", tr.history[next_system], "", *inst.fun, *inst.res, inst.target);
    }
    os << "# complete steps=" << tr.steps.size() << " evaluations=" << tr.evaluations
       << " exhausted=" << (tr.exhausted ? 1 : 0) << '\n';
    return os.str();
}

struct RunFile {
    std::map<std::string, std::string> header;
    History history;  // system-level records for graph runs, queries otherwise
    std::vector<std::string> reasons;
    bool complete = false;
    std::size_t steps = 0, evaluations = 0;
    bool exhausted = false;
};

inline RunFile read_run_csv(std::istream& in, const ResolvedInstance& inst) {
    RunFile rf{{}, History(inst.fun, inst.res, inst.target), {}, false, 0, 0, false};
    std::string line;
    bool columns = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "complete") {
                rf.complete = true;
                std::string kv;
                while (ls >> kv) {
                    const auto eq = kv.find('=');
                    const std::string name = kv.substr(0, eq), value = kv.substr(eq + 1);
                    if (name == "steps") rf.steps = std::stoul(value);
                    if (name == "evaluations") rf.evaluations = std::stoul(value);
                    if (name == "exhausted") rf.exhausted = value == "1";
                }
            } else {
                std::string rest;
                std::getline(ls >> std::ws, rest);
                rf.header[key] = rest;
            }
            continue;
        }
        if (!columns) {
            columns = true;
            continue;
        }
        const auto f = csv_split(line);
        if (f.size() != 9) throw parse_error("run CSV row has " + std::to_string(f.size()) + " fields");
        const bool system = f[0] == "system";
        if (!system) rf.reasons.push_back(f[3]);
        if (system != inst.is_graph()) continue;
        rf.history.append({parse_impl(f[5]), parse_element(*inst.fun, f[6]), parse_element(*inst.res, f[7])},
                          std::stoul(f[1]), std::stoul(f[2]));
    }
    return rf;
}

inline std::optional<RunFile> load_run(const fs::path& p, const ResolvedInstance& inst) {
    std::ifstream in(p);
    if (!in) return std::nullopt;
    return read_run_csv(in, inst);
}

inline bool run_is_current(const fs::path& p, const RunKey& k, std::size_t budget) {
    std::ifstream in(p);
    if (!in) return false;
    std::string line, key;
    bool complete = false;
    while (std::getline(in, line)) {
        if (line.rfind("# run_key ", 0) == 0) key = line.substr(10);
        if (line.rfind("# complete", 0) == 0) complete = true;
    }
    return complete && key == run_fingerprint(k, budget);
}

struct RunSummary {
    std::size_t executed = 0, skipped = 0, failed = 0;
};

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// Parallel map over (instance, method, seed); each worker owns its run state.
inline RunSummary cmd_run(const ExperimentConfig& cfg, unsigned jobs = 0, std::ostream* log = nullptr) {
    for (const auto& id : cfg.instances)
        if (!fs::exists(instance_path(cfg, id)))
            throw configuration_error("instance '" + id + "' is not generated; run 'generate' first");
    const auto keys = run_keys(cfg);
    RunSummary sum;
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t k = next++; k < keys.size(); k = next++) {
            const RunKey& key = keys[k];
            const fs::path p = run_path(cfg, key);
            const fs::path log_path = fs::path(cfg.output_dir) / "logs" / (key.stem() + ".log");
            if (run_is_current(p, key, cfg.budget)) {
                std::lock_guard lock(mu);
                ++sum.skipped;
                continue;
            }
            try {
                auto inst = resolve_instance(key.instance);
                auto tr = execute_run(inst, *key.method, key.seed, cfg.budget);
                write_atomically(p, trace_csv(inst, key, cfg, tr));
                std::error_code ec;
                fs::remove(log_path, ec);
                std::lock_guard lock(mu);
                ++sum.executed;
            } catch (const std::exception& e) {
                write_atomically(log_path, std::string(e.what()) + "\n");
                std::lock_guard lock(mu);
                ++sum.failed;
                if (log) *log << "run " << key.stem() << " failed: " << e.what() << '\n';
            }
        }
    };
    if (jobs == 0) jobs = default_jobs();
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < std::min<std::size_t>(jobs, keys.size()); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return sum;
}

// ---- report -----------------------------------------------------------------

struct Stats {
    double mean = 0, std = 0;
};

// Sample standard deviation; zero for a single value.
inline Stats mean_std(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= double(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / double(v.size() - 1));
    }
    return s;
}

struct RunMetrics {
    RunKey key;
    std::string status;  // complete, missing, failed, stale
    std::size_t steps = 0, evaluations = 0;
    std::optional<double> cumulative_hvd, final_hvd;
    std::vector<double> curve;
    bool recovered = false;
    std::optional<std::size_t> recovery_iteration;
};

struct GroupSummary {
    std::string instance, method;
    std::size_t runs = 0, complete = 0;
    std::optional<Stats> cumulative_hvd;
    double recovery_rate = 0;
    double mean_evaluations = 0;
    std::vector<Stats> curve;
};

struct Report {
    std::vector<RunMetrics> runs;
    std::vector<GroupSummary> groups;
};

inline std::string format_optional(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

inline Report cmd_report(const ExperimentConfig& cfg) {
    Report rep;
    const fs::path out = fs::path(cfg.output_dir);
    for (const auto& id : cfg.instances) {
        auto inst = resolve_instance(id);
        Truth truth = load_truth(inst, cfg);
        std::vector<RunMetrics> local;
        std::vector<std::optional<RunFile>> files;
        for (const auto& m : cfg.methods)
            for (auto s : cfg.seeds) {
                RunMetrics rm;
                rm.key = {id, &m, s};
                const fs::path p = run_path(cfg, rm.key);
                std::optional<RunFile> rf;
                if (fs::exists(fs::path(cfg.output_dir) / "logs" / (rm.key.stem() + ".log")))
                    rm.status = "failed";
                else if (!fs::exists(p))
                    rm.status = "missing";
                else if (!run_is_current(p, rm.key, cfg.budget))
                    rm.status = "stale";
                else {
                    rf = load_run(p, inst);
                    rm.status = "complete";
                    rm.steps = rf->steps;
                    rm.evaluations = rf->evaluations;
                }
                local.push_back(std::move(rm));
                files.push_back(std::move(rf));
            }

        // A grid oracle can miss points a run finds; the truth for continuous problems is
        // the minimal set of the oracle and every observed target-feasible resource.
        Antichain reference_truth = truth.antichain;
        if (truth.method == "grid")
            for (const auto& rf : files)
                if (rf)
                    for (const auto& r : rf->history.tracked_antichain().members()) reference_truth.insert(r);

        for (std::size_t k = 0; k < local.size(); ++k) {
            if (!files[k]) continue;
            RunMetrics& rm = local[k];
            const History& h = files[k]->history;
            if (truth.reference) {
                rm.curve = hvd_curve(h, inst.target, reference_truth, *truth.reference, cfg.budget);
                double s = 0;
                for (double d : rm.curve) s += d;
                rm.cumulative_hvd = s;
                rm.final_hvd = rm.curve.empty() ? 0.0 : rm.curve.back();
            }
            rm.recovery_iteration = recovery_iteration(h, inst.target, reference_truth);
            rm.recovered = exact_recovery(reference_truth, h.tracked_antichain());

            std::ostringstream mc;
            mc << "# codesign-metrics schema " << run_schema_version << '\n'
               << "# config_hash " << config_hash(cfg) << '\n'
               << "iteration,hvd\n";
            for (std::size_t t = 0; t < rm.curve.size(); ++t) mc << t + 1 << ',' << format_real(rm.curve[t]) << '\n';
            fs::path mp = run_path(cfg, rm.key);
            mp.replace_extension(".metrics.csv");
            if (truth.reference) write_atomically(mp, mc.str());
        }

        for (const auto& m : cfg.methods) {
            GroupSummary g{id, m.name, 0, 0, std::nullopt, 0, 0, {}};
            std::vector<double> cum, evals;
            std::vector<const RunMetrics*> done;
            std::size_t recovered = 0;
            for (const auto& rm : local) {
                if (rm.key.method != &m) continue;
                ++g.runs;
                if (rm.status != "complete") continue;
                ++g.complete;
                done.push_back(&rm);
                if (rm.cumulative_hvd) cum.push_back(*rm.cumulative_hvd);
                evals.push_back(double(rm.evaluations));
                if (rm.recovered) ++recovered;
            }
            if (!cum.empty()) g.cumulative_hvd = mean_std(cum);
            if (g.complete) {
                g.recovery_rate = double(recovered) / double(g.complete);
                g.mean_evaluations = mean_std(evals).mean;
            }
            if (!done.empty() && !done[0]->curve.empty())
                for (std::size_t t = 0; t < cfg.budget; ++t) {
                    std::vector<double> col;
                    for (const auto* rm : done) col.push_back(rm->curve[t]);
                    g.curve.push_back(mean_std(col));
                }
            rep.groups.push_back(std::move(g));
        }
        for (auto& rm : local) rep.runs.push_back(std::move(rm));
    }

    const std::string hash = config_hash(cfg);
    auto preamble = [&](const char* what) {
        return "# codesign-" + std::string(what) + " schema " + std::to_string(run_schema_version) + "\n# config_hash " +
               hash + "\n";
    };
    std::ostringstream runs;
    runs << preamble("runs")
         << "instance,method,seed,status,steps,evaluations,cumulative_hvd,final_hvd,recovered,recovery_iteration\n";
    for (const auto& rm : rep.runs)
        runs << csv_field(rm.key.instance) << ',' << rm.key.method->name << ',' << rm.key.seed << ',' << rm.status
             << ',' << rm.steps << ',' << rm.evaluations << ',' << format_optional(rm.cumulative_hvd) << ','
             << format_optional(rm.final_hvd) << ',' << (rm.recovered ? 1 : 0) << ','
             << (rm.recovery_iteration ? std::to_string(*rm.recovery_iteration) : "") << '\n';
    write_atomically(out / "report" / "runs.csv", runs.str());

    std::ostringstream summary;
    summary << preamble("summary")
            << "instance,method,runs,complete,incomplete,mean_cumulative_hvd,std_cumulative_hvd,recovery_rate,"
               "mean_evaluations\n";
    for (const auto& g : rep.groups)
        summary << csv_field(g.instance) << ',' << g.method << ',' << g.runs << ',' << g.complete << ','
                << (g.complete < g.runs ? 1 : 0) << ','
                << format_optional(g.cumulative_hvd ? std::optional(g.cumulative_hvd->mean) : std::nullopt) << ','
                << format_optional(g.cumulative_hvd ? std::optional(g.cumulative_hvd->std) : std::nullopt) << ','
                << format_real(g.recovery_rate) << ',' << format_real(g.mean_evaluations) << '\n';
    write_atomically(out / "report" / "summary.csv", summary.str());

    auto find_group = [&](const std::string& inst, const std::string& method) -> const GroupSummary& {
        for (const auto& g : rep.groups)
            if (g.instance == inst && g.method == method) return g;
        throw internal_error("report group missing");
    };
    std::ostringstream table, recovery;
    table << preamble("table") << "instance";
    recovery << preamble("recovery-table") << "method";
    for (const auto& m : cfg.methods) table << ',' << m.name;
    for (const auto& id : cfg.instances) recovery << ',' << csv_field(id);
    table << '\n';
    recovery << '\n';
    for (const auto& id : cfg.instances) {
        table << csv_field(id);
        for (const auto& m : cfg.methods) {
            const auto& g = find_group(id, m.name);
            table << ',' << format_optional(g.cumulative_hvd ? std::optional(g.cumulative_hvd->mean) : std::nullopt);
        }
        table << '\n';
    }
    for (const auto& m : cfg.methods) {
        recovery << m.name;
        for (const auto& id : cfg.instances) recovery << ',' << format_real(find_group(id, m.name).recovery_rate);
        recovery << '\n';
    }
    write_atomically(out / "report" / "table.csv", table.str());
    write_atomically(out / "report" / "recovery_table.csv", recovery.str());

    for (const auto& g : rep.groups) {
        if (g.curve.empty()) continue;
        std::ostringstream c;
        c << preamble("curve") << "iteration,mean,half_std\n";
        for (std::size_t t = 0; t < g.curve.size(); ++t)
            c << t + 1 << ',' << format_real(g.curve[t].mean) << ',' << format_real(g.curve[t].std / 2) << '\n';
        write_atomically(out / "report" / "curves" / (slug(g.instance) + "__" + g.method + ".csv"), c.str());
    }
    return rep;
}

}  // namespace codesign
