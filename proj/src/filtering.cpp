#include "shiftsim/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shiftsim/kernels.hpp"
#include "shiftsim/mixing.hpp"
#include "shiftsim/synthetic.hpp"
#include "shiftsim/vec.hpp"

namespace shiftsim {

void FilterRule::validate() const {
    switch (kind) {
        case Kind::hard_threshold:
            if (std::isnan(tau)) throw std::domain_error("filter: tau is NaN");
            break;
        case Kind::logistic:
            if (!(beta > 0.0) || !std::isfinite(beta))
                throw std::domain_error("filter: logistic beta must be positive");
            if (!std::isfinite(tau)) throw std::domain_error("filter: non-finite tau");
            break;
        case Kind::top_quantile:
            if (!(q > 0.0 && q <= 1.0))
                throw std::domain_error("filter: top_quantile q must be in (0,1]");
            break;
    }
}

double FilterRule::acceptance_probability(double s) const {
    switch (kind) {
        case Kind::hard_threshold:
            return s >= tau ? 1.0 : 0.0;
        case Kind::logistic:
            return 1.0 / (1.0 + std::exp(-beta * (s - tau)));
        case Kind::top_quantile:
            throw std::domain_error(
                "top_quantile has no per-sample acceptance probability");
    }
    return 0.0;
}

void FilterSpec::validate() const {
    rule.validate();
    pretrained.validate();
}

double score(std::span<const double> x, double y, const LinearModel& pretrained) {
    if (x.size() != pretrained.dim())
        throw std::domain_error("score: dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * pretrained.weights[j];
    return y * s;
}

LabeledDataset apply_filter(const LabeledDataset& dataset, const FilterSpec& f,
                            Stream stream) {
    f.validate();
    if (dataset.size() == 0) throw std::domain_error("apply_filter: empty dataset");
    if (dataset.dim != f.pretrained.dim())
        throw std::domain_error("apply_filter: dimension mismatch");

    const std::size_t n = dataset.size();
    std::vector<double> scores(n);
    kernels::label_scores_omp(dataset.xs, dataset.labels, dataset.dim,
                              f.pretrained.weights, scores);

    std::vector<std::size_t> kept;
    if (f.rule.kind == FilterRule::Kind::top_quantile) {
        const std::size_t k = static_cast<std::size_t>(
            std::ceil(f.rule.q * static_cast<double>(n)));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        // highest score first; ties broken by original index
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[a] > scores[b];
        });
        kept.assign(order.begin(), order.begin() + std::min(k, n));
        std::sort(kept.begin(), kept.end());
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double h = f.rule.acceptance_probability(scores[i]);
            bool keep;
            if (h >= 1.0)
                keep = true;
            else if (h <= 0.0)
                keep = false;
            else
                keep = stream.substream(i).next_uniform01() < h;
            if (keep) kept.push_back(i);
        }
    }

    LabeledDataset out;
    out.dim = dataset.dim;
    out.xs.reserve(kept.size() * dataset.dim);
    out.labels.reserve(kept.size());
    for (std::size_t i : kept) {
        const auto row = dataset.sample(i);
        out.xs.insert(out.xs.end(), row.begin(), row.end());
        out.labels.push_back(dataset.labels[i]);
    }
    const std::string src =
        dataset.provenance.empty() ? "" : dataset.provenance.front().source_id;
    out.provenance.push_back(
        Provenance{src + "/filtered", kept.size(), stream.key()});
    return out;
}

LinearModel filtered_model_trial(const DistributionSpec& train, std::uint64_t n,
                                 const FilterSpec& f, Stream stream) {
    const LabeledDataset data =
        sample_dataset(train, n, stream.substream(0), "trial");
    const LabeledDataset kept = apply_filter(data, f, stream.substream(1));
    if (kept.size() == 0) throw EmptyFilterResult{};
    return train_linear(kept);
}

void FilterGeometry::validate() const {
    test_id.validate();
    test_ood.validate();
    train.validate();
    pretrained.validate();
    const std::size_t d = train.dim();
    if (test_id.dim() != d || test_ood.dim() != d || pretrained.dim() != d)
        throw std::domain_error("FilterGeometry: dimension mismatch");
    if (train.noise != NoiseFamily::gaussian)
        throw std::domain_error(
            "FilterGeometry: filtering analysis requires gaussian train noise");
}

namespace {

double slope_of(const FilterGeometry& g, std::span<const double> direction) {
    return theoretical_slope(direction, g.test_id, g.test_ood);
}

}  // namespace

SlopeOrderingResult slope_ordering_experiment(const FilterGeometry& geometry,
                                              std::uint64_t n, std::uint64_t trials,
                                              const FilterRule& rule, Stream stream) {
    geometry.validate();
    rule.validate();
    if (trials < 1)
        throw std::domain_error("slope_ordering_experiment: trials must be >= 1");

    const double slope_train = slope_of(geometry, geometry.train.theta);
    const double slope_pre = slope_of(geometry, geometry.pretrained.weights);
    if (!(slope_train < slope_pre))
        throw std::domain_error(
            "slope_ordering_experiment: precondition Slope(train) < Slope(pretrained) "
            "violated: " +
            std::to_string(slope_train) + " >= " + std::to_string(slope_pre));
    if (!(slope_pre <= 1.0))
        throw std::domain_error(
            "slope_ordering_experiment: precondition Slope(pretrained) <= 1 violated: " +
            std::to_string(slope_pre));

    FilterSpec f{rule, geometry.pretrained};
    constexpr std::uint64_t kMaxAttempts = 100;
    std::vector<std::vector<double>> models(trials);
    std::uint64_t rejected = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        bool done = false;
        for (std::uint64_t attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
            try {
                models[t] = filtered_model_trial(
                                geometry.train, n, f,
                                stream.substream(t * kMaxAttempts + attempt))
                                .weights;
                done = true;
            } catch (const EmptyFilterResult&) {
                ++rejected;
            }
        }
        if (!done)
            throw std::runtime_error(
                "slope_ordering_experiment: trial rejected 100 times in a row");
    }

    const std::vector<double> mean_model = kernels::mean_of_rows(models);

    SlopeOrderingResult out;
    out.trials = trials;
    out.rejected_trials = rejected;
    out.slopes.unfiltered = slope_train;
    out.slopes.pretrained = slope_pre;
    out.slopes.filtered = slope_of(geometry, mean_model);

    // c in  mean_filtered ~ theta_train + c * pretrained  (projection onto
    // the pretrained direction of the mean shift)
    const double pre_norm2 = dot(geometry.pretrained.weights, geometry.pretrained.weights);
    double shift_dot = 0.0;
    for (std::size_t j = 0; j < mean_model.size(); ++j)
        shift_dot +=
            (mean_model[j] - geometry.train.theta[j]) * geometry.pretrained.weights[j];
    out.shift_coefficient = shift_dot / pre_norm2;

    // jackknife SE of the plug-in slope estimate
    if (trials < 2) return out;
    const std::size_t d = mean_model.size();
    std::vector<double> total(d, 0.0);
    for (const auto& w : models)
        for (std::size_t j = 0; j < d; ++j) total[j] += w[j];
    std::vector<double> loo(d);
    std::vector<double> jk(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
        for (std::size_t j = 0; j < d; ++j)
            loo[j] = (total[j] - models[t][j]) / static_cast<double>(trials - 1);
        jk[t] = slope_of(geometry, loo);
    }
    double jk_mean = 0.0;
    for (double v : jk) jk_mean += v;
    jk_mean /= static_cast<double>(trials);
    double ss = 0.0;
    for (double v : jk) ss += (v - jk_mean) * (v - jk_mean);
    out.filtered_se = std::sqrt(ss * static_cast<double>(trials - 1) /
                                static_cast<double>(trials));
    return out;
}

}  // namespace shiftsim
