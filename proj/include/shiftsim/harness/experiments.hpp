#ifndef SHIFTSIM_HARNESS_EXPERIMENTS_HPP
#define SHIFTSIM_HARNESS_EXPERIMENTS_HPP

#include <filesystem>
#include <optional>
#include <vector>

#include "shiftsim/harness/config.hpp"
#include "shiftsim/harness/report.hpp"

namespace shiftsim {

struct RunOptions {
    int jobs = 0;  // OpenMP thread count; 0 = library default. Never
                   // changes emitted bytes, only wall time.
    bool strict = false;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
};

struct RunOutcome {
    nlohmann::ordered_json report;
    std::filesystem::path out_dir;
    std::vector<CheckResult> checks;
    bool checks_passed = true;
};

// Executes the experiment, writes per-kind CSV results plus report.json
// under the resolved output directory, returns the report. Identical
// (config, options affecting semantics) produce byte-identical files.
RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Output directory resolution: options override > SHIFTSIM_OUT env
// > config "output" > runs/<kind>.
std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg,
                                      const RunOptions& opts);

}  // namespace shiftsim

#endif
