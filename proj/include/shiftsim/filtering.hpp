#ifndef SHIFTSIM_FILTERING_HPP
#define SHIFTSIM_FILTERING_HPP

#include <cstdint>
#include <span>
#include <stdexcept>

#include "shiftsim/model_types.hpp"
#include "shiftsim/prng.hpp"

namespace shiftsim {

// Acceptance rules keyed on the correlation score <x*y, w_pretrained>.
// hard_threshold: keep iff score >= tau.
// logistic:       keep with probability 1/(1+exp(-beta*(score-tau))).
// top_quantile:   keep exactly ceil(q*n) highest scores, ties by index.
struct FilterRule {
    enum class Kind { hard_threshold, logistic, top_quantile };
    Kind kind = Kind::hard_threshold;
    double tau = 0.0;
    double beta = 1.0;  // logistic only, > 0
    double q = 1.0;     // top_quantile only, in (0, 1]

    void validate() const;
    double acceptance_probability(double score) const;  // h(s) in [0,1]
};

struct FilterSpec {
    FilterRule rule;
    LinearModel pretrained;

    void validate() const;
};

double score(std::span<const double> x, double y, const LinearModel& pretrained);

// Keep each sample per the filter rule. May return an empty dataset for the
// probabilistic kinds; callers decide how to handle that.
LabeledDataset apply_filter(const LabeledDataset& dataset, const FilterSpec& f,
                            Stream stream);

// Thrown when a probabilistic filter rejects every sample of a trial.
struct EmptyFilterResult : std::domain_error {
    EmptyFilterResult() : std::domain_error("filter kept no samples") {}
};

// Sample a dataset, filter it, train on the survivors.
LinearModel filtered_model_trial(const DistributionSpec& train, std::uint64_t n,
                                 const FilterSpec& f, Stream stream);

struct SlopeTriple {
    double unfiltered = 0.0;
    double filtered = 0.0;
    double pretrained = 0.0;
};

struct FilterGeometry {
    DistributionSpec test_id;   // in-distribution test
    DistributionSpec test_ood;  // shifted test
    DistributionSpec train;     // training distribution (gaussian only)
    LinearModel pretrained;

    void validate() const;
};

struct SlopeOrderingResult {
    SlopeTriple slopes;
    double filtered_se = 0.0;        // jackknife SE of the plug-in slope
    double shift_coefficient = 0.0;  // c in mean_filtered ~ theta_train + c*pre
    std::uint64_t trials = 0;
    std::uint64_t rejected_trials = 0;
};

// Runs `trials` filtered-model draws, estimates E[model] by the trial mean
// (deterministic pairwise merge), and evaluates the three slopes.
// Preconditions: Slope(train) < Slope(pretrained) <= 1, gaussian train noise;
// violations raise a configuration error naming the failed inequality.
// Empty-filter trials retry on derived streams (at most 100 attempts each).
SlopeOrderingResult slope_ordering_experiment(const FilterGeometry& geometry,
                                              std::uint64_t n, std::uint64_t trials,
                                              const FilterRule& rule, Stream stream);

}  // namespace shiftsim

#endif
