#ifndef SHIFTSIM_HARNESS_CONFIG_HPP
#define SHIFTSIM_HARNESS_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "shiftsim/model_types.hpp"
#include "shiftsim/prng.hpp"

namespace shiftsim {

// Config validation failure; carries one message per offending field.
struct ConfigError : std::runtime_error {
    std::vector<std::string> issues;
    explicit ConfigError(std::vector<std::string> list);
};

// A direction in R^d, given by axis index, the canonical spread vector,
// explicit coordinates, or an in-plane angle. "plane": [i, j] rotates in a
// coordinate plane; the default plane is spanned by the spread vector and
// its orthogonal partner. Optional "norm" scales the unit direction.
struct DirectionSpec {
    enum class Kind { axis, spread, coords, angle };
    Kind kind = Kind::spread;
    std::size_t axis = 0;
    std::vector<double> coords;
    double angle_deg = 0.0;
    std::optional<std::pair<std::size_t, std::size_t>> plane;
    double norm = 1.0;

    std::vector<double> realize(std::size_t dim) const;
};

struct DistConfig {
    DirectionSpec direction;
    double rho = 1.0;
    std::optional<NoiseFamily> noise;  // defaults to the experiment family

    DistributionSpec realize(std::size_t dim, NoiseFamily fallback) const;
};

struct EvalConfig {
    enum class Mode { mc, exact };
    Mode mode = Mode::mc;
    std::uint64_t samples = 10000;
};

struct LineChecks {
    std::optional<double> slope_rel_tol;
    std::optional<double> intercept_abs_tol;
    std::optional<double> closed_form_abs_tol;
    std::optional<double> family_agreement_sigma;
};

struct LineSweepConfig {
    std::size_t dimension = 0;
    DistConfig train, test_ref, test_shift;
    std::vector<std::uint64_t> n_grid;
    std::vector<double> xi_grid;
    std::uint64_t trials = 1;
    EvalConfig eval;
    std::vector<NoiseFamily> families;  // default: train family only
    LineChecks checks;
};

struct MixMcConfig {
    std::vector<double> alphas;
    std::vector<std::uint64_t> n_grid;
    std::uint64_t trials = 1;
    std::uint64_t samples = 10000;
    double slope_rel_tol = 0.05;
};

struct MixSweepConfig {
    std::size_t dimension = 0;
    std::uint64_t n_total = 0;
    std::vector<double> alphas;
    DistConfig source1, source2, test_ref, test_shift;
    std::uint64_t random_geometries = 0;
    std::optional<MixMcConfig> mc;
};

struct EnsembleCheckConfig {
    std::size_t dimension = 0;
    std::uint64_t pairs = 1;
    std::uint64_t n_min = 1, n_max = 1;
    double tolerance = 1e-12;
};

struct FilterRuleConfig {
    std::string kind;  // hard_threshold | logistic | top_quantile
    double tau = 0.0;
    double beta = 1.0;
    double q = 1.0;
};

struct FilterExperimentConfig {
    std::size_t dimension = 0;
    std::uint64_t n = 1;
    std::uint64_t trials = 1;
    DistConfig test_id, test_ood, train;
    DirectionSpec pretrained;
    FilterRuleConfig filter;
    std::optional<FilterRuleConfig> control;
    double min_sigma = 3.0;
    double control_max_sigma = 1.0;
};

struct ResidualScalingConfig {
    std::vector<std::size_t> dims;
    double n_over_d = 0.5;
    std::uint64_t trials = 100;
    double xi = 1.0;
    double rho_train = 1.0, rho_ref = 1.0, rho_shift = 1.0;
    double shift_angle_deg = 0.0;
    bool inject_perfect = false;
};

struct IngestFitConfig {
    std::filesystem::path input;
    std::string filter;
    std::string fit_mode = "free";  // free | through_origin
    bool exclude_clamped = false;
};

using ExperimentPayload =
    std::variant<LineSweepConfig, MixSweepConfig, EnsembleCheckConfig,
                 FilterExperimentConfig, ResidualScalingConfig, IngestFitConfig>;

struct ExperimentConfig {
    int version = 1;
    std::string kind;
    SeedSpec seed;
    std::string output;  // may be empty; resolved by the runner
    ExperimentPayload payload;
    nlohmann::ordered_json raw;  // echoed into the report
};

ExperimentConfig parse_config(const nlohmann::ordered_json& j,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace shiftsim

#endif
