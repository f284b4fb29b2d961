#include "shiftsim/trend.hpp"

#include <cmath>
#include <stdexcept>

#include "shiftsim/mixing.hpp"
#include "shiftsim/synthetic.hpp"
#include "shiftsim/vec.hpp"

namespace shiftsim {

std::pair<double, double> to_probit_point(const AccuracyRecord& rec) {
    const double u = probit(clamp_accuracy(rec.ref_accuracy, rec.m_ref).value);
    const double v = probit(clamp_accuracy(rec.shift_accuracy, rec.m_shift).value);
    return {u, v};
}

TrendFit fit_trend(std::span<const std::pair<double, double>> points, FitMode mode) {
    TrendFit fit;
    fit.mode = mode;
    fit.n_points = points.size();

    long double su = 0, sv = 0, suu = 0, suv = 0, svv = 0;
    for (const auto& [u, v] : points) {
        su += u;
        sv += v;
        suu += static_cast<long double>(u) * u;
        suv += static_cast<long double>(u) * v;
        svv += static_cast<long double>(v) * v;
    }
    const long double n = static_cast<long double>(points.size());

    if (mode == FitMode::through_origin) {
        if (points.empty())
            throw std::domain_error("fit_trend: through-origin fit needs >= 1 point");
        if (suu <= 0.0L)
            throw std::domain_error(
                "fit_trend: all u values are zero, through-origin slope undefined");
        fit.slope = static_cast<double>(suv / suu);
        fit.intercept = 0.0;
    } else {
        if (points.size() < 2)
            throw std::domain_error("fit_trend: free fit needs >= 2 points");
        const long double det = n * suu - su * su;
        if (det <= 0.0L)
            throw std::domain_error(
                "fit_trend: all u values identical, free slope undefined");
        fit.slope = static_cast<double>((n * suv - su * sv) / det);
        fit.intercept = static_cast<double>((sv - fit.slope * su) / n);
    }

    long double ss_res = 0;
    for (const auto& [u, v] : points) {
        const long double r = v - (fit.slope * u + fit.intercept);
        ss_res += r * r;
    }
    fit.rms_residual = static_cast<double>(std::sqrt(static_cast<double>(ss_res / n)));

    // centered total SS for the free fit, uncentered for through-origin
    const long double ss_tot =
        (mode == FitMode::through_origin) ? svv : (svv - sv * sv / n);
    fit.r_squared =
        (ss_tot > 0.0L) ? static_cast<double>(1.0L - ss_res / ss_tot) : 1.0;
    return fit;
}

double effective_robustness(const AccuracyRecord& rec, const TrendFit& baseline) {
    const auto [u, v] = to_probit_point(rec);
    return v - (baseline.slope * u + baseline.intercept);
}

double effective_robustness_accuracy_space(const AccuracyRecord& rec,
                                           const TrendFit& baseline) {
    const auto [u, v] = to_probit_point(rec);
    (void)v;
    const double predicted = phi(baseline.slope * u + baseline.intercept);
    return clamp_accuracy(rec.shift_accuracy, rec.m_shift).value - predicted;
}

std::vector<ResidualRow> residual_scaling_report(const ResidualScanConfig& config,
                                                 Stream stream) {
    if (config.dims.empty())
        throw std::domain_error("residual_scaling_report: empty dimension list");
    for (std::size_t i = 1; i < config.dims.size(); ++i)
        if (config.dims[i] <= config.dims[i - 1])
            throw std::domain_error(
                "residual_scaling_report: dimensions must be ascending");
    if (!(config.n_over_d > 0.0))
        throw std::domain_error("residual_scaling_report: n_over_d must be positive");
    if (config.trials < 1)
        throw std::domain_error("residual_scaling_report: trials must be >= 1");

    std::vector<ResidualRow> rows;
    rows.reserve(config.dims.size());
    for (std::size_t di = 0; di < config.dims.size(); ++di) {
        const std::size_t d = config.dims[di];
        const std::uint64_t n = static_cast<std::uint64_t>(
            std::llround(config.n_over_d * static_cast<double>(d)));
        const std::vector<double> b1 = unit_spread(d);
        const std::vector<double> b2 = unit_spread_partner(d);

        DistributionSpec train{b1, config.rho_train, NoiseFamily::gaussian};
        DistributionSpec test_ref{b1, config.rho_ref, NoiseFamily::gaussian};
        DistributionSpec test_shift{rotate_in_plane(b1, b2, config.shift_angle_rad),
                                    config.rho_shift, NoiseFamily::gaussian};
        const double slope = theoretical_slope(train.theta, test_ref, test_shift);
        const TrainedModelSpec mspec{train, n, config.xi};

        double acc_abs = 0.0;
        for (std::uint64_t t = 0; t < config.trials; ++t) {
            double u, v;
            if (config.inject_perfect) {
                u = probit(closed_form_accuracy(mspec, test_ref).value);
                v = probit(closed_form_accuracy(mspec, test_shift).value);
            } else {
                const LinearModel w =
                    sample_trained_model(mspec, stream.substream(di * 1000003 + t));
                u = probit(exact_gaussian_accuracy(w, test_ref).value);
                v = probit(exact_gaussian_accuracy(w, test_shift).value);
            }
            acc_abs += std::fabs(v - slope * u);
        }
        rows.push_back(
            ResidualRow{d, acc_abs / static_cast<double>(config.trials)});
    }
    return rows;
}

}  // namespace shiftsim
