#ifndef SHIFTSIM_TREND_HPP
#define SHIFTSIM_TREND_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shiftsim/model_types.hpp"
#include "shiftsim/normal.hpp"
#include "shiftsim/prng.hpp"

namespace shiftsim {

// One model's (reference accuracy, shifted accuracy) pair with the
// evaluation counts needed for principled clamping.
struct AccuracyRecord {
    std::string model_id;
    std::string ref_dataset;
    Probability ref_accuracy;
    std::string shift_name;
    Probability shift_accuracy;
    std::uint64_t m_ref = 1;
    std::uint64_t m_shift = 1;
    std::map<std::string, std::string> metadata;
};

enum class FitMode { free, through_origin };

struct TrendFit {
    double slope = 0.0;
    double intercept = 0.0;  // exactly 0 in through_origin mode
    FitMode mode = FitMode::free;
    std::size_t n_points = 0;
    double rms_residual = 0.0;
    double r_squared = 0.0;
};

// (probit(clamped ref accuracy), probit(clamped shift accuracy)).
std::pair<double, double> to_probit_point(const AccuracyRecord& rec);

// Least squares of v on u. free mode needs >= 2 points with non-identical u;
// through_origin needs >= 1 point with sum(u^2) > 0.
TrendFit fit_trend(std::span<const std::pair<double, double>> points, FitMode mode);

// Vertical displacement above the baseline trend in probit space.
double effective_robustness(const AccuracyRecord& rec, const TrendFit& baseline);

// Same displacement expressed in raw accuracy space: shift accuracy minus
// the baseline's predicted shift accuracy. Cross-check variant.
double effective_robustness_accuracy_space(const AccuracyRecord& rec,
                                           const TrendFit& baseline);

struct ResidualScanConfig {
    std::vector<std::size_t> dims;  // ascending
    double n_over_d = 0.5;
    std::uint64_t trials = 100;
    double xi = 1.0;
    double rho_train = 1.0;
    double rho_ref = 1.0;
    double rho_shift = 1.0;
    double shift_angle_rad = 0.0;  // angle of the shifted test direction
    // diagnostic mode: score points taken from the first-order formula
    // itself instead of sampled models (residuals must vanish)
    bool inject_perfect = false;
};

struct ResidualRow {
    std::size_t dim = 0;
    double mean_abs_residual = 0.0;
};

// For each d: draw trained models at n = n_over_d * d, compute
// |probit(Acc_shift) - slope * probit(Acc_ref)| against the theoretical
// slope (exact per-model accuracies, gaussian tests), average over trials.
std::vector<ResidualRow> residual_scaling_report(const ResidualScanConfig& config,
                                                 Stream stream);

}  // namespace shiftsim

#endif
