#ifndef SHIFTSIM_MODEL_TYPES_HPP
#define SHIFTSIM_MODEL_TYPES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shiftsim {

// Zero-mean, unit-variance-per-coordinate noise laws.
enum class NoiseFamily { gaussian, rademacher, uniform };

const char* to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& name);

// A test/train distribution: label y = +/-1 uniform, observation
// x = y*theta + (|theta|/rho) * z with z drawn per the noise family.
struct DistributionSpec {
    std::vector<double> theta;
    double rho = 1.0;
    NoiseFamily noise = NoiseFamily::gaussian;

    std::size_t dim() const { return theta.size(); }
    void validate() const;  // |theta| > 0, rho > 0, d >= 1
};

// Distribution of a model trained on n samples of `train`, with xi scaling
// the spread of the weight noise relative to the canonical estimator.
struct TrainedModelSpec {
    DistributionSpec train;
    std::uint64_t n = 1;
    double xi = 1.0;

    void validate() const;
};

struct LinearModel {
    std::vector<double> weights;

    std::size_t dim() const { return weights.size(); }
    void validate() const;  // finite entries, nonzero norm
};

struct Provenance {
    std::string source_id;
    std::uint64_t count = 0;
    std::uint64_t stream_key = 0;
};

// Row-major sample matrix plus labels; provenance counts sum to size().
struct LabeledDataset {
    std::size_t dim = 0;
    std::vector<double> xs;      // size() * dim
    std::vector<double> labels;  // +/-1
    std::vector<Provenance> provenance;

    std::size_t size() const { return labels.size(); }
    std::span<const double> sample(std::size_t i) const {
        return {xs.data() + i * dim, dim};
    }
    void validate() const;
};

}  // namespace shiftsim

#endif
