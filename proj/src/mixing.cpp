#include "shiftsim/mixing.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "shiftsim/vec.hpp"

namespace shiftsim {

void MixtureSpec::validate() const {
    if (components.empty())
        throw std::domain_error("MixtureSpec: no components");
    const std::size_t d = components.front().spec.dim();
    std::uint64_t total = 0;
    for (const auto& c : components) {
        c.spec.validate();
        if (c.spec.dim() != d)
            throw std::domain_error("MixtureSpec: component dimension mismatch");
        total += c.count;
    }
    if (total < 1) throw std::domain_error("MixtureSpec: total count must be >= 1");
}

EffectiveTrainSpec effective_spec(const MixtureSpec& mix, EffectiveSpecMode mode) {
    mix.validate();
    const std::size_t d = mix.components.front().spec.dim();
    // single live component: reduce exactly (endpoints of a sweep must
    // reproduce the single-source slope bit for bit)
    const MixtureComponent* live = nullptr;
    std::size_t live_count = 0;
    for (const auto& c : mix.components)
        if (c.count > 0) {
            live = &c;
            ++live_count;
        }
    if (live_count == 1) {
        EffectiveTrainSpec single;
        single.theta_bar = live->spec.theta;
        single.n_total = live->count;
        single.rho_bar = (mode == EffectiveSpecMode::canonical)
                             ? live->spec.rho
                             : live->spec.rho / std::sqrt(static_cast<double>(live->count));
        return single;
    }
    EffectiveTrainSpec out;
    out.theta_bar.assign(d, 0.0);
    std::uint64_t n_total = 0;
    double noise_power = 0.0;  // sum_i n_i |theta_i|^2 / rho_i^2
    for (const auto& c : mix.components) {
        n_total += c.count;
        const double w = static_cast<double>(c.count);
        for (std::size_t j = 0; j < d; ++j) out.theta_bar[j] += w * c.spec.theta[j];
        const double nt = norm(c.spec.theta);
        noise_power += w * nt * nt / (c.spec.rho * c.spec.rho);
    }
    const double inv_n = 1.0 / static_cast<double>(n_total);
    for (double& v : out.theta_bar) v *= inv_n;
    out.n_total = n_total;
    const double nbar = norm(out.theta_bar);
    if (nbar == 0.0)
        throw std::domain_error("effective_spec: degenerate mixture, |theta_bar| = 0");
    const double root = std::sqrt(noise_power);
    out.rho_bar = (mode == EffectiveSpecMode::canonical)
                      ? nbar * std::sqrt(static_cast<double>(n_total)) / root
                      : nbar / root;
    return out;
}

namespace {

// first k indices of a partial Fisher-Yates shuffle of [0, n)
std::vector<std::size_t> pick_without_replacement(std::size_t n, std::size_t k,
                                                  Stream& stream) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(stream.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

void append_rows(const LabeledDataset& src, const std::vector<std::size_t>& rows,
                 LabeledDataset& dst) {
    for (std::size_t i : rows) {
        const auto row = src.sample(i);
        dst.xs.insert(dst.xs.end(), row.begin(), row.end());
        dst.labels.push_back(src.labels[i]);
    }
}

}  // namespace

LabeledDataset mix_datasets(const LabeledDataset& a, const LabeledDataset& b,
                            std::uint64_t n1p, std::uint64_t n2p, Stream stream) {
    if (a.dim != b.dim) throw std::domain_error("mix_datasets: dimension mismatch");
    if (n1p > a.size() || n2p > b.size())
        throw std::domain_error("mix_datasets: subsample count exceeds source size");
    if (n1p + n2p < 1) throw std::domain_error("mix_datasets: empty mixture");
    LabeledDataset out;
    out.dim = a.dim;
    out.xs.reserve((n1p + n2p) * a.dim);
    out.labels.reserve(n1p + n2p);
    Stream pick1 = stream.substream(0);
    Stream pick2 = stream.substream(1);
    append_rows(a, pick_without_replacement(a.size(), n1p, pick1), out);
    append_rows(b, pick_without_replacement(b.size(), n2p, pick2), out);
    const std::string id_a = a.provenance.empty() ? "a" : a.provenance.front().source_id;
    const std::string id_b = b.provenance.empty() ? "b" : b.provenance.front().source_id;
    out.provenance.push_back(Provenance{id_a, n1p, pick1.key()});
    out.provenance.push_back(Provenance{id_b, n2p, pick2.key()});
    return out;
}

double theoretical_slope(std::span<const double> train_theta,
                         const DistributionSpec& test1, const DistributionSpec& test2) {
    test1.validate();
    test2.validate();
    if (test1.dim() != train_theta.size() || test2.dim() != train_theta.size())
        throw std::domain_error("theoretical_slope: dimension mismatch");
    const double c1 = cosine(test1.theta, train_theta);
    const double c2 = cosine(test2.theta, train_theta);
    if (c1 == 0.0)
        throw std::domain_error(
            "theoretical_slope: cos(theta1, train) = 0, slope undefined");
    const double slope = c2 * test2.rho / (c1 * test1.rho);
    if (!std::isfinite(slope))
        throw std::domain_error("theoretical_slope: non-finite slope");
    return slope;
}

namespace {

std::uint64_t round_half_away(double x) {
    return static_cast<std::uint64_t>(std::llround(x));
}

}  // namespace

std::vector<SweepPoint> mixture_slope_sweep(const DistributionSpec& source1,
                                            const DistributionSpec& source2,
                                            std::uint64_t n_total,
                                            std::span<const double> alphas,
                                            const DistributionSpec& test1,
                                            const DistributionSpec& test2) {
    source1.validate();
    source2.validate();
    if (n_total < 1)
        throw std::domain_error("mixture_slope_sweep: n_total must be >= 1");
    for (std::size_t i = 1; i < alphas.size(); ++i)
        if (alphas[i] < alphas[i - 1])
            throw std::domain_error("mixture_slope_sweep: alphas must be sorted");
    std::vector<SweepPoint> out;
    out.reserve(alphas.size());
    for (double alpha : alphas) {
        if (alpha < 0.0 || alpha > 1.0)
            throw std::domain_error("mixture_slope_sweep: alpha outside [0,1]");
        SweepPoint pt;
        pt.alpha = alpha;
        pt.n1 = round_half_away(alpha * static_cast<double>(n_total));
        pt.n2 = n_total - pt.n1;
        try {
            MixtureSpec mix{{{source1, pt.n1}, {source2, pt.n2}}};
            const EffectiveTrainSpec eff = effective_spec(mix);
            pt.slope = theoretical_slope(eff.theta_bar, test1, test2);
        } catch (const std::exception& e) {
            pt.error = e.what();  // degenerate point; sweep continues
        }
        out.push_back(std::move(pt));
    }
    return out;
}

LinearModel ensemble_models(std::span<const LinearModel> models,
                            std::span<const double> weights) {
    if (models.empty()) throw std::domain_error("ensemble_models: empty model list");
    if (models.size() != weights.size())
        throw std::domain_error("ensemble_models: weight count mismatch");
    const std::size_t d = models.front().dim();
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::domain_error("ensemble_models: negative weight");
        total += w;
    }
    if (total <= 0.0) throw std::domain_error("ensemble_models: weights sum to zero");
    LinearModel out;
    out.weights.assign(d, 0.0);
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (models[k].dim() != d)
            throw std::domain_error("ensemble_models: dimension mismatch");
        const double w = weights[k] / total;
        for (std::size_t j = 0; j < d; ++j) out.weights[j] += w * models[k].weights[j];
    }
    return out;
}

}  // namespace shiftsim
