#include "shiftsim/model_types.hpp"

#include <cmath>
#include <stdexcept>

#include "shiftsim/vec.hpp"

namespace shiftsim {

const char* to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::gaussian: return "gaussian";
        case NoiseFamily::rademacher: return "rademacher";
        case NoiseFamily::uniform: return "uniform";
    }
    return "?";
}

NoiseFamily noise_family_from_string(const std::string& name) {
    if (name == "gaussian") return NoiseFamily::gaussian;
    if (name == "rademacher") return NoiseFamily::rademacher;
    if (name == "uniform") return NoiseFamily::uniform;
    throw std::invalid_argument("unknown noise family: " + name);
}

void DistributionSpec::validate() const {
    if (theta.empty()) throw std::domain_error("DistributionSpec: d must be >= 1");
    for (double v : theta)
        if (!std::isfinite(v))
            throw std::domain_error("DistributionSpec: non-finite theta entry");
    if (norm(theta) <= 0.0)
        throw std::domain_error("DistributionSpec: |theta| must be > 0");
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw std::domain_error("DistributionSpec: rho must be positive");
}

void TrainedModelSpec::validate() const {
    train.validate();
    if (n < 1) throw std::domain_error("TrainedModelSpec: n must be >= 1");
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw std::domain_error("TrainedModelSpec: xi must be positive");
}

void LinearModel::validate() const {
    if (weights.empty()) throw std::domain_error("LinearModel: empty weights");
    for (double v : weights)
        if (!std::isfinite(v)) throw std::domain_error("LinearModel: non-finite weight");
    if (norm(weights) <= 0.0)
        throw std::domain_error("LinearModel: zero weight vector");
}

void LabeledDataset::validate() const {
    if (xs.size() != size() * dim)
        throw std::domain_error("LabeledDataset: sample matrix shape mismatch");
    for (double y : labels)
        if (y != 1.0 && y != -1.0)
            throw std::domain_error("LabeledDataset: labels must be +/-1");
    std::uint64_t total = 0;
    for (const auto& p : provenance) total += p.count;
    if (total != size())
        throw std::domain_error("LabeledDataset: provenance counts do not sum to size");
}

}  // namespace shiftsim
