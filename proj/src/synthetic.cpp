#include "shiftsim/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "shiftsim/kernels.hpp"
#include "shiftsim/vec.hpp"

namespace shiftsim {

LabeledDataset sample_dataset(const DistributionSpec& spec, std::uint64_t n,
                              Stream stream, const std::string& source_id) {
    spec.validate();
    if (n < 1) throw std::domain_error("sample_dataset: n must be >= 1");
    LabeledDataset out;
    out.dim = spec.dim();
    out.xs.resize(n * spec.dim());
    out.labels.resize(n);
    const double noise_scale = norm(spec.theta) / spec.rho;
    kernels::sample_rows_omp(spec.theta, noise_scale, spec.noise, n, stream, out.xs,
                             out.labels);
    out.provenance.push_back(Provenance{source_id, n, stream.key()});
    return out;
}

LinearModel train_linear(const LabeledDataset& dataset) {
    if (dataset.size() == 0) throw std::domain_error("train_linear: empty dataset");
    LinearModel model;
    model.weights.resize(dataset.dim);
    kernels::label_weighted_mean_omp(dataset.xs, dataset.labels, dataset.dim,
                                     model.weights);
    return model;
}

LinearModel sample_trained_model(const TrainedModelSpec& m, Stream stream) {
    m.validate();
    const std::size_t d = m.train.dim();
    const double scale = m.xi * norm(m.train.theta) /
                         (m.train.rho * std::sqrt(static_cast<double>(m.n)));
    LinearModel model;
    model.weights.resize(d);
    for (std::size_t j = 0; j < d; ++j)
        model.weights[j] =
            m.train.theta[j] + scale * kernels::draw_noise(m.train.noise, stream);
    return model;
}

namespace {

double check_pair(const TrainedModelSpec& m, const DistributionSpec& test) {
    m.validate();
    test.validate();
    if (test.dim() != m.train.dim())
        throw std::domain_error("accuracy: train/test dimension mismatch");
    return cosine(test.theta, m.train.theta);
}

}  // namespace

Probability closed_form_accuracy(const TrainedModelSpec& m,
                                 const DistributionSpec& test) {
    const double cos_tt = check_pair(m, test);
    const double alpha =
        std::sqrt(static_cast<double>(m.n) / static_cast<double>(m.train.dim()));
    return Probability{phi(cos_tt * test.rho * m.train.rho * alpha / m.xi)};
}

Probability limit_accuracy(const TrainedModelSpec& m, const DistributionSpec& test) {
    const double cos_tt = check_pair(m, test);
    const double alpha =
        std::sqrt(static_cast<double>(m.n) / static_cast<double>(m.train.dim()));
    const double ra = m.train.rho * alpha;
    return Probability{phi(cos_tt * test.rho * ra / std::hypot(ra, m.xi))};
}

Probability exact_gaussian_accuracy(const LinearModel& model,
                                    const DistributionSpec& test) {
    model.validate();
    test.validate();
    if (test.dim() != model.dim())
        throw std::domain_error("exact_gaussian_accuracy: dimension mismatch");
    if (test.noise != NoiseFamily::gaussian)
        throw std::domain_error(
            "exact_gaussian_accuracy: only defined for gaussian test noise");
    return Probability{phi(cosine(test.theta, model.weights) * test.rho)};
}

McAccuracy mc_accuracy(const LinearModel& model, const DistributionSpec& test,
                       std::uint64_t m, Stream stream) {
    model.validate();
    test.validate();
    if (test.dim() != model.dim())
        throw std::domain_error("mc_accuracy: dimension mismatch");
    if (m < 1) throw std::domain_error("mc_accuracy: m must be >= 1");
    const double tw = dot(test.theta, model.weights);
    const double noise_scale = norm(test.theta) / test.rho;
    const std::uint64_t correct = kernels::mc_correct_count_omp(
        tw, noise_scale, model.weights, test.noise, m, stream);
    const double p = static_cast<double>(correct) / static_cast<double>(m);
    McAccuracy out;
    out.accuracy = Probability{p};
    out.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(m));
    out.samples = m;
    return out;
}

}  // namespace shiftsim
