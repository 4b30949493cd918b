// codesign: experiment driver.
//
//   codesign generate --config exp.json
//   codesign run      --config exp.json --jobs 4
//   codesign report   --config exp.json
//   codesign verify   [--scale 0.1] [--only kleene,hypervolume]
//   codesign validate-graph FILE

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "codesign/experiment.hpp"
#include "codesign/verification.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string seeds;
    std::size_t budget = 0;
    std::string out;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "experiment config (JSON, comments allowed)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seeds", o.seeds, "override the seed list, e.g. 1-100 or 1,4,9-12");
    cmd->add_option("--budget", o.budget, "override the evaluation budget N");
    cmd->add_option("--out", o.out, "override the output directory");
}

codesign::ExperimentConfig resolve(const Overrides& o) {
    auto cfg = codesign::load_config(o.config);
    if (!o.seeds.empty()) cfg.seeds = codesign::parse_seed_list(o.seeds);
    if (o.budget > 0) cfg.budget = o.budget;
    if (!o.out.empty()) cfg.output_dir = o.out;
    return codesign::config_from_json(codesign::config_to_json(cfg));  // revalidate
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ','))
        if (!part.empty()) out.push_back(part);
    return out;
}

int verify(double scale, const std::string& only) {
    const auto wanted = split_list(only);
    auto criteria = codesign::verify::all_criteria();
    for (const auto& w : wanted) {
        bool known = false;
        for (const auto& c : criteria) known = known || c.key == w;
        if (!known) throw codesign::configuration_error("unknown criterion '" + w + "'");
    }
    int failed = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.key) == wanted.end()) continue;
        const auto o = c.run({scale});
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.key << ": " << o.name << ": " << o.detail << " ["
                  << o.seconds << " s]" << std::endl;
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online co-design experiments: generate instances, run samplers, report metrics"};
    app.require_subcommand(1);

    Overrides gen_o, run_o, rep_o;
    auto* gen = app.add_subcommand("generate", "write instance files with their oracle antichains");
    add_common(gen, gen_o);

    auto* run = app.add_subcommand("run", "run every (instance, method, seed) triple, skipping finished ones");
    add_common(run, run_o);
    unsigned jobs = 0;
    run->add_option("--jobs", jobs, "worker threads (default: available cores)");

    auto* rep = app.add_subcommand("report", "aggregate run traces into tables and curves");
    add_common(rep, rep_o);

    auto* ver = app.add_subcommand("verify", "run the property suites behind the acceptance criteria");
    double scale = 1.0;
    std::string only;
    ver->add_option("--scale", scale, "fraction of the full instance and seed counts")->check(CLI::Range(0.001, 1.0));
    ver->add_flag_callback("--quick", [&] { scale = 0.1; }, "same as --scale 0.1");
    ver->add_option("--only", only, "comma-separated criterion keys");

    auto* vg = app.add_subcommand("validate-graph", "check a graph description file");
    std::string graph_file;
    vg->add_option("file", graph_file, "graph file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto cfg = resolve(gen_o);
            for (const auto& p : codesign::cmd_generate(cfg)) std::cout << "wrote " << p.string() << '\n';
        } else if (run->parsed()) {
            const auto cfg = resolve(run_o);
            const auto s = codesign::cmd_run(cfg, jobs, &std::cerr);
            std::cout << s.executed << " executed, " << s.skipped << " skipped, " << s.failed << " failed\n";
            return s.failed == 0 ? 0 : 1;
        } else if (rep->parsed()) {
            const auto cfg = resolve(rep_o);
            const auto r = codesign::cmd_report(cfg);
            std::size_t incomplete = 0;
            for (const auto& m : r.runs)
                if (m.status != "complete") {
                    ++incomplete;
                    std::cerr << "incomplete: " << m.key.stem() << " (" << m.status << ")\n";
                }
            std::cout << r.runs.size() - incomplete << "/" << r.runs.size() << " runs complete; report in "
                      << (std::filesystem::path(cfg.output_dir) / "report").string() << '\n';
            return incomplete == 0 ? 0 : 2;
        } else if (ver->parsed()) {
            return verify(scale, only);
        } else if (vg->parsed()) {
            const auto g = codesign::load_graph(graph_file);
            const auto v = codesign::validate(g);
            if (!v.ok()) {
                for (const auto& p : v.problems) std::cerr << p << '\n';
                return 1;
            }
            std::cout << g.size() << " nodes, " << g.edges().size() << " edges: ok\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
