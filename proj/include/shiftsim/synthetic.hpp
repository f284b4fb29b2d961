#ifndef SHIFTSIM_SYNTHETIC_HPP
#define SHIFTSIM_SYNTHETIC_HPP

#include <cstdint>
#include <string>

#include "shiftsim/model_types.hpp"
#include "shiftsim/normal.hpp"
#include "shiftsim/prng.hpp"

namespace shiftsim {

// n i.i.d. samples from the distribution; provenance records the stream key.
LabeledDataset sample_dataset(const DistributionSpec& spec, std::uint64_t n,
                              Stream stream, const std::string& source_id = "");

// Canonical estimator: mean of y_i * x_i. Domain error on an empty dataset.
LinearModel train_linear(const LabeledDataset& dataset);

// One draw of the trained-model distribution:
// w = theta + (xi*|theta|/(rho*sqrt(n))) * z, z per the train noise family.
LinearModel sample_trained_model(const TrainedModelSpec& m, Stream stream);

// First-order probit formula for the accuracy of a model from `m` on `test`:
// phi(cos(theta_test, theta_train) * rho_test * rho_train * sqrt(n/d) / xi).
// Treats the weight noise as dominating the weight-vector norm; exact only
// when xi >> rho*sqrt(n/d). See limit_accuracy for the full expression.
Probability closed_form_accuracy(const TrainedModelSpec& m,
                                 const DistributionSpec& test);

// Large-d limit of the accuracy of a model drawn from `m`, accounting for
// the full norm of the noisy weight vector:
// phi(cos * rho_test * rho*alpha / sqrt(rho^2*alpha^2 + xi^2)), alpha=sqrt(n/d).
// Averaged Monte Carlo accuracy converges to this value as d grows.
Probability limit_accuracy(const TrainedModelSpec& m, const DistributionSpec& test);

// Exact accuracy of a concrete weight vector under Gaussian test noise:
// phi(cos(theta_test, w) * rho_test). Domain error for non-Gaussian tests.
Probability exact_gaussian_accuracy(const LinearModel& model,
                                    const DistributionSpec& test);

struct McAccuracy {
    Probability accuracy;
    double stderr_ = 0.0;  // binomial: sqrt(p(1-p)/m)
    std::uint64_t samples = 0;
};

// Draw m test samples and score sign(<x, w>) against y; a tie (inner product
// exactly zero) counts as an error.
McAccuracy mc_accuracy(const LinearModel& model, const DistributionSpec& test,
                       std::uint64_t m, Stream stream);

}  // namespace shiftsim

#endif
