// rbshadow: run randomized-measurement experiments from JSON configs and compare runs.
//   rbshadow run CONFIG [--out DIR] [--exact] [--workers N]
//   rbshadow compare SUMMARY_A SUMMARY_B [--out FILE] [--tolerance T]
// Exit codes: 0 ok (fit warnings are flagged in summary.json), 1 runtime error,
// 2 config/schema error, 3 cap violation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "rbshadow/experiment.hpp"

using namespace rbshadow;

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + " is not valid JSON: " + e.what());
    }
}

int cmd_run(const std::string& config, const std::string& out, bool exact, int workers) {
    Config cfg = load_config(config);
    if (exact) {
        cfg.exact = true;
        cfg.resolved["exact"] = true;
    }
    if (workers > 0) cfg.plan.workers = workers;
    const auto result = run_experiment(cfg);
    for (const auto& f : write_outputs(cfg, result, out)) std::cout << f.string() << '\n';
    for (const auto& p : result.points)
        for (const auto& w : p.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out, double tolerance) {
    const auto rows = compare_summaries(read_json(a), read_json(b), tolerance);
    const auto csv = compare_csv(rows);
    if (out.empty()) std::cout << csv;
    else write_file(out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise-robust classical shadows: RB calibration, shadow estimation and local gate-set runs"};
    app.require_subcommand(1);

    std::string config, out = "out";
    bool exact = false;
    int workers = 0;
    auto* run = app.add_subcommand("run", "run an experiment (or a sweep) from a JSON config");
    run->add_option("config", config, "config file")->required();
    run->add_option("--out", out, "output directory");
    run->add_flag("--exact", exact, "use exact expectation signals instead of sampling");
    run->add_option("--workers", workers, "worker threads (overrides config)")->check(CLI::PositiveNumber);

    std::string sa, sb, cout_path;
    double tolerance = 3.0;
    auto* cmp = app.add_subcommand("compare", "bias table between two runs' summary.json files");
    cmp->add_option("a", sa, "summary.json of run A")->required();
    cmp->add_option("b", sb, "summary.json of run B")->required();
    cmp->add_option("--out", cout_path, "write CSV here instead of stdout");
    cmp->add_option("--tolerance", tolerance, "pass threshold in combined sigmas");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(config, out, exact, workers);
        return cmd_compare(sa, sb, cout_path, tolerance);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CapError& e) {
        std::cerr << "cap violation: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
