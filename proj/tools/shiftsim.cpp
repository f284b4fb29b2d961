// shiftsim CLI: runs the canned experiment kinds from a config file and
// renders stored reports. Exit code 0 only when every theorem check passed.

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "shiftsim/harness/experiments.hpp"
#include "shiftsim/harness/report.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--jobs", args.jobs,
                    "worker threads (does not affect output bytes)");
    cmd->add_flag("--strict", args.strict, "treat warnings as errors");
}

int run_kind(const CommonArgs& args, const std::string& expected_kind) {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    shiftsim::ExperimentConfig cfg = shiftsim::load_config(args.config_path);
    if (cfg.kind != expected_kind) {
        std::cerr << "error: config kind '" << cfg.kind
                  << "' does not match subcommand (expected '" << expected_kind
                  << "')\n";
        return 2;
    }
    shiftsim::RunOptions opts;
    opts.jobs = args.jobs;
    opts.strict = args.strict;
    if (args.seed_set) opts.seed_override = args.seed;
    if (!args.out_dir.empty()) opts.out_override = args.out_dir;

    const shiftsim::RunOutcome outcome = shiftsim::run_experiment(cfg, opts);
    for (const auto& chk : outcome.checks)
        std::cout << (chk.pass ? "PASS " : "FAIL ") << chk.name << ": "
                  << chk.statement << " (margin " << chk.margin << ")\n";
    std::cout << "report: " << (outcome.out_dir / "report.json").string() << "\n";
    const double secs =
        std::chrono::duration<double>(Clock::now() - t0).count();
    std::fprintf(stderr, "wall time: %.2fs (jobs=%d)\n", secs, args.jobs);
    return outcome.checks_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distribution-shift robustness simulation toolkit"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* kind;
        const char* help;
    };
    static const Sub kSubs[] = {
        {"simulate", "line_sweep", "accuracy-on-the-line sweep over n and xi"},
        {"mix-sweep", "mix_sweep", "mixture slope interpolation sweep"},
        {"ensemble-check", "ensemble_check",
         "input/output mixing equivalence check"},
        {"filter-exp", "filter_experiment",
         "pretrained-model filtering slope ordering"},
        {"residual-scan", "residual_scaling",
         "probit residual scaling across dimensions"},
        {"fit", "ingest_fit", "ingest an accuracy table and fit its trend"},
    };

    CommonArgs args[6];
    CLI::App* cmds[6];
    for (int i = 0; i < 6; ++i) {
        cmds[i] = app.add_subcommand(kSubs[i].name, kSubs[i].help);
        add_common(cmds[i], args[i]);
    }

    std::string report_path;
    CLI::App* report_cmd = app.add_subcommand("report", "render a stored report");
    report_cmd->add_option("--in", report_path, "report.json to render")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (report_cmd->parsed()) {
            std::cout << shiftsim::render_report_text(
                shiftsim::read_report(report_path));
            return 0;
        }
        for (int i = 0; i < 6; ++i)
            if (cmds[i]->parsed()) return run_kind(args[i], kSubs[i].kind);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
