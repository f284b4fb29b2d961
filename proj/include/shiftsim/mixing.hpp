#ifndef SHIFTSIM_MIXING_HPP
#define SHIFTSIM_MIXING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shiftsim/model_types.hpp"
#include "shiftsim/prng.hpp"

namespace shiftsim {

struct MixtureComponent {
    DistributionSpec spec;
    std::uint64_t count = 0;
};

// Components may number k >= 2; all dimensions equal; total count >= 1.
struct MixtureSpec {
    std::vector<MixtureComponent> components;
    void validate() const;
};

// Training distribution equivalent to the canonical estimator on the mixed
// dataset: theta_bar is the count-weighted mean direction, rho_bar the SNR
// that reproduces its per-coordinate weight-noise std at xi = 1.
struct EffectiveTrainSpec {
    std::vector<double> theta_bar;
    double rho_bar = 0.0;
    std::uint64_t n_total = 0;
};

enum class EffectiveSpecMode {
    // rho_bar = |theta_bar| * sqrt(N) / sqrt(sum_i n_i |theta_i|^2 / rho_i^2);
    // reduces to the single-source spec exactly and matches the canonical
    // estimator's noise std. Default.
    canonical,
    // rho_bar without the sqrt(N) factor; kept for diagnostics only.
    printed,
};

EffectiveTrainSpec effective_spec(const MixtureSpec& mix,
                                  EffectiveSpecMode mode = EffectiveSpecMode::canonical);

// Uniform subsample without replacement of n1p rows from a and n2p from b,
// concatenated; provenance lists both sources with their counts.
LabeledDataset mix_datasets(const LabeledDataset& a, const LabeledDataset& b,
                            std::uint64_t n1p, std::uint64_t n2p, Stream stream);

// Probit-space trend slope induced by training direction `train_theta`:
// cos(theta2, t)*rho2 / (cos(theta1, t)*rho1). Scale-invariant in t.
// Domain error when cos(theta1, t) == 0 (undefined slope).
double theoretical_slope(std::span<const double> train_theta,
                         const DistributionSpec& test1, const DistributionSpec& test2);

struct SweepPoint {
    double alpha = 0.0;
    std::uint64_t n1 = 0, n2 = 0;
    std::optional<double> slope;
    std::string error;  // non-empty when the point is degenerate
};

// Slope of the mixed training distribution at each alpha; counts are
// round-half-away-from-zero of alpha*n_total so the endpoints are exact.
std::vector<SweepPoint> mixture_slope_sweep(const DistributionSpec& source1,
                                            const DistributionSpec& source2,
                                            std::uint64_t n_total,
                                            std::span<const double> alphas,
                                            const DistributionSpec& test1,
                                            const DistributionSpec& test2);

// Weight-normalized average of the model vectors. For canonical estimators
// with count weights this equals the estimator on the concatenated data.
LinearModel ensemble_models(std::span<const LinearModel> models,
                            std::span<const double> weights);

}  // namespace shiftsim

#endif
