#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "shiftsim/synthetic.hpp"
#include "shiftsim/vec.hpp"
#include "support/normal_oracle.hpp"

using namespace shiftsim;

namespace {
const SeedSpec kSeed{2024};

DistributionSpec axis_spec(std::size_t d, double rho,
                           NoiseFamily fam = NoiseFamily::gaussian) {
    return DistributionSpec{unit_axis(d, 0), rho, fam};
}
}  // namespace

TEST_CASE("sample_dataset: huge SNR pins the sign of the signal coordinate") {
    DistributionSpec spec{{1, 0, 0, 0}, 1e9, NoiseFamily::gaussian};
    const auto data = sample_dataset(spec, 3, derive_stream(kSeed, "sd-snr", 0));
    REQUIRE(data.size() == 3);
    for (std::size_t i = 0; i < data.size(); ++i)
        CHECK(std::copysign(1.0, data.sample(i)[0]) == data.labels[i]);
    CHECK(data.provenance.size() == 1);
    CHECK(data.provenance[0].count == 3);
}

TEST_CASE("sample_dataset: labels are balanced") {
    const auto data = sample_dataset(axis_spec(1000, 1.0), 100000,
                                     derive_stream(kSeed, "sd-bal", 0));
    double plus = 0;
    for (double y : data.labels) plus += y > 0;
    const double frac = plus / double(data.size());
    CHECK(frac >= 0.495);
    CHECK(frac <= 0.505);
}

TEST_CASE("sample_dataset: unit per-coordinate noise variance, all families") {
    const std::size_t d = 1000;
    const std::uint64_t n = 10000;
    for (NoiseFamily fam :
         {NoiseFamily::gaussian, NoiseFamily::rademacher, NoiseFamily::uniform}) {
        const auto data = sample_dataset(axis_spec(d, 1.0, fam), n,
                                         derive_stream(kSeed, "sd-var", static_cast<std::uint64_t>(fam)));
        // pooled variance of x*y - theta across all coordinates
        long double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = data.sample(i);
            const double y = data.labels[i];
            for (std::size_t j = 0; j < d; ++j) {
                const double r = x[j] * y - (j == 0 ? 1.0 : 0.0);
                ss += static_cast<long double>(r) * r;
            }
        }
        const double var = static_cast<double>(ss / (n * d));
        CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("train_linear on hand-built datasets") {
    LabeledDataset d1;
    d1.dim = 2;
    d1.xs = {0.3, -0.4, -0.3, 0.4};
    d1.labels = {1, -1};
    d1.provenance = {{"", 2, 0}};
    const auto m1 = train_linear(d1);
    CHECK(m1.weights[0] == doctest::Approx(0.3));
    CHECK(m1.weights[1] == doctest::Approx(-0.4));

    LabeledDataset d2;
    d2.dim = 2;
    d2.xs = {2, 0, 0, 2};
    d2.labels = {1, 1};
    d2.provenance = {{"", 2, 0}};
    const auto m2 = train_linear(d2);
    CHECK(m2.weights[0] == doctest::Approx(1.0));
    CHECK(m2.weights[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(train_linear(LabeledDataset{}), std::domain_error);
}

TEST_CASE("train_linear error norm scales as |theta| sqrt(d/n)") {
    const std::size_t d = 1000;
    const std::uint64_t n = 10000;
    const auto data = sample_dataset(axis_spec(d, 1.0), n,
                                     derive_stream(kSeed, "tl-norm", 0));
    const auto model = train_linear(data);
    std::vector<double> err(model.weights);
    err[0] -= 1.0;
    const double ratio = norm(err) / std::sqrt(double(d) / double(n));
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);
}

TEST_CASE("sample_trained_model: zero-variation limit returns theta") {
    TrainedModelSpec spec{axis_spec(64, 1.0), 100, 1e-12};
    const auto m = sample_trained_model(spec, derive_stream(kSeed, "tm-xi0", 0));
    for (std::size_t j = 0; j < 64; ++j)
        CHECK(std::fabs(m.weights[j] - (j == 0 ? 1.0 : 0.0)) <= 1e-9);
}

TEST_CASE("sample_trained_model: unbiased with the stated coordinate spread") {
    const std::size_t d = 100;
    const TrainedModelSpec spec{axis_spec(d, 1.0), 100, 1.0};
    const std::uint64_t draws = 10000;
    std::vector<double> mean(d, 0.0), m2(d, 0.0);
    Stream base = derive_stream(kSeed, "tm-mom", 0);
    for (std::uint64_t t = 0; t < draws; ++t) {
        const auto m = sample_trained_model(spec, base.substream(t));
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += m.weights[j];
            m2[j] += m.weights[j] * m.weights[j];
        }
    }
    const double pred_std = 1.0 / std::sqrt(100.0);  // xi*|theta|/(rho sqrt n)
    const double se = pred_std / std::sqrt(double(draws));
    double pooled_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        mean[j] /= double(draws);
        const double target = j == 0 ? 1.0 : 0.0;
        CHECK(std::fabs(mean[j] - target) <= 3.0 * se);
        pooled_var += m2[j] / double(draws) - mean[j] * mean[j];
    }
    const double emp_std = std::sqrt(pooled_var / double(d));
    CHECK(emp_std == doctest::Approx(pred_std).epsilon(0.05));
}

TEST_CASE("closed_form_accuracy frozen values") {
    const std::size_t d = 4096;
    // orthogonal test direction: accuracy is chance
    TrainedModelSpec spec{axis_spec(d, 1.0), 2048, 1.0};
    DistributionSpec ortho{unit_axis(d, 1), 1.0, NoiseFamily::gaussian};
    CHECK(closed_form_accuracy(spec, ortho).value == doctest::Approx(0.5));

    // aligned, n/d = 1/2: the first-order formula gives Phi(sqrt(0.5))
    DistributionSpec aligned = axis_spec(d, 1.0);
    CHECK(std::fabs(closed_form_accuracy(spec, aligned).value - 0.76025) <= 1e-5);
    CHECK(std::fabs(closed_form_accuracy(spec, aligned).value -
                    0.7602499389065233) <= 1e-12);

    // enormous training variation drives accuracy to chance
    TrainedModelSpec noisy{axis_spec(d, 1.0), 2048, 1e6};
    CHECK(std::fabs(closed_form_accuracy(noisy, aligned).value - 0.5) <= 1e-6);

    DistributionSpec wrong_dim{unit_axis(d / 2, 0), 1.0, NoiseFamily::gaussian};
    CHECK_THROWS_AS(closed_form_accuracy(spec, wrong_dim), std::domain_error);
}

TEST_CASE("limit_accuracy accounts for the weight-vector norm") {
    const std::size_t d = 4096;
    TrainedModelSpec spec{axis_spec(d, 1.0), 2048, 1.0};
    DistributionSpec aligned = axis_spec(d, 1.0);
    // Phi(sqrt(0.5)/sqrt(1.5)) = Phi(1/sqrt(3))
    const double expected =
        static_cast<double>(oracle::normal_cdf(1.0L / std::sqrt(3.0L)));
    CHECK(limit_accuracy(spec, aligned).value ==
          doctest::Approx(expected).epsilon(1e-12));
    // with dominant training variation the two formulas agree
    TrainedModelSpec noisy{axis_spec(d, 1.0), 2048, 1e6};
    CHECK(limit_accuracy(noisy, aligned).value ==
          doctest::Approx(closed_form_accuracy(noisy, aligned).value)
              .epsilon(1e-9));
}

TEST_CASE("scale invariance of the closed form and of MC predictions") {
    const std::size_t d = 512;
    TrainedModelSpec spec{axis_spec(d, 1.3), 300, 0.7};
    DistributionSpec test = axis_spec(d, 0.9);
    const double base = closed_form_accuracy(spec, test).value;

    TrainedModelSpec scaled = spec;
    DistributionSpec test_scaled = test;
    for (auto& v : scaled.train.theta) v *= 4.0;  // power of two: exact
    for (auto& v : test_scaled.theta) v *= 4.0;
    CHECK(closed_form_accuracy(scaled, test_scaled).value == base);

    LinearModel w{unit_spread(d)};
    const auto a1 = mc_accuracy(w, test, 20000, derive_stream(kSeed, "mc-scale", 0));
    LinearModel w2 = w;
    for (auto& v : w2.weights) v *= 2.0;
    const auto a2 =
        mc_accuracy(w2, test_scaled, 20000, derive_stream(kSeed, "mc-scale", 0));
    CHECK(a1.accuracy.value == a2.accuracy.value);  // sign-identical predictions
}

TEST_CASE("mc_accuracy basics") {
    const std::size_t d = 128;
    DistributionSpec clean = axis_spec(d, 1e9);
    LinearModel aligned{clean.theta};
    const auto acc =
        mc_accuracy(aligned, clean, 5000, derive_stream(kSeed, "mc-clean", 0));
    CHECK(acc.accuracy.value >= 0.999);

    DistributionSpec test = axis_spec(d, 1.0);
    LinearModel ortho{unit_axis(d, 1)};
    const auto acc2 =
        mc_accuracy(ortho, test, 40000, derive_stream(kSeed, "mc-ortho", 0));
    CHECK(std::fabs(acc2.accuracy.value - 0.5) <= 4.0 * acc2.stderr_);

    CHECK_THROWS_AS(
        mc_accuracy(LinearModel{unit_axis(3, 0)}, test, 10,
                    derive_stream(kSeed, "mc-dim", 0)),
        std::domain_error);
}

TEST_CASE("mc_accuracy counts exact ties as errors") {
    // rademacher noise, theta = e1, weights = e1: <x,w> = y + z1 which is 0
    // half the time and 2y the rest: accuracy must land near 1/2, not 3/4
    DistributionSpec spec{{1.0, 0.0}, 1.0, NoiseFamily::rademacher};
    LinearModel w{{1.0, 0.0}};
    const auto acc = mc_accuracy(w, spec, 40000, derive_stream(kSeed, "mc-tie", 0));
    CHECK(std::fabs(acc.accuracy.value - 0.5) <= 5.0 * acc.stderr_);
}

TEST_CASE("averaged MC accuracy converges to limit_accuracy as d grows") {
    const double xi = 1.0;
    double gaps[2];
    int gi = 0;
    for (std::size_t d : {std::size_t(256), std::size_t(2048)}) {
        const std::uint64_t n = d / 2;
        DistributionSpec train{unit_spread(d), 1.0, NoiseFamily::gaussian};
        const TrainedModelSpec spec{train, n, xi};
        const double lim = limit_accuracy(spec, train).value;
        const std::uint64_t draws = 100, m = 10000;
        double sum = 0;
        for (std::uint64_t t = 0; t < draws; ++t) {
            const auto w = sample_trained_model(
                spec, derive_stream(kSeed, "mc-conv-model", d).substream(t));
            sum += mc_accuracy(w, train, m,
                               derive_stream(kSeed, "mc-conv-eval", d).substream(t))
                       .accuracy.value;
        }
        gaps[gi++] = std::fabs(sum / double(draws) - lim);
    }
    CHECK(gaps[1] < gaps[0]);  // Berry-Esseen direction
    CHECK(gaps[1] < 0.003);
}

TEST_CASE("universality: the three noise families agree at moderate dimension") {
    const std::size_t d = 1024;
    const std::uint64_t n = 512, draws = 60, m = 10000;
    double means[3];
    double ses[3];
    int fi = 0;
    for (NoiseFamily fam :
         {NoiseFamily::gaussian, NoiseFamily::rademacher, NoiseFamily::uniform}) {
        DistributionSpec train{unit_spread(d), 1.0, fam};
        const TrainedModelSpec spec{train, n, 1.0};
        std::vector<double> accs;
        for (std::uint64_t t = 0; t < draws; ++t) {
            const auto w = sample_trained_model(
                spec, derive_stream(kSeed, "uni-model", fi).substream(t));
            accs.push_back(
                mc_accuracy(w, train, m,
                            derive_stream(kSeed, "uni-eval", fi).substream(t))
                    .accuracy.value);
        }
        double mu = 0;
        for (double a : accs) mu += a;
        mu /= accs.size();
        double ss = 0;
        for (double a : accs) ss += (a - mu) * (a - mu);
        means[fi] = mu;
        ses[fi] = std::sqrt(ss / (accs.size() - 1) / accs.size());
        ++fi;
    }
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            CHECK(std::fabs(means[a] - means[b]) <=
                  3.0 * std::hypot(ses[a], ses[b]));
}

TEST_CASE("exact_gaussian_accuracy matches the cosine rule") {
    const std::size_t d = 256;
    DistributionSpec test{unit_spread(d), 1.4, NoiseFamily::gaussian};
    LinearModel w{unit_spread_partner(d)};
    for (std::size_t j = 0; j < d; ++j) w.weights[j] += test.theta[j];
    const double expected = phi(cosine(test.theta, w.weights) * test.rho);
    CHECK(exact_gaussian_accuracy(w, test).value == doctest::Approx(expected));
    DistributionSpec rad{unit_spread(d), 1.0, NoiseFamily::rademacher};
    CHECK_THROWS_AS(exact_gaussian_accuracy(w, rad), std::domain_error);
}
