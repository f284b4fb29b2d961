#include "shiftsim/kernels.hpp"

#include <algorithm>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shiftsim::kernels {

namespace {
constexpr std::size_t kRowBlock = 1024;  // rows per accumulation block
}

void set_threads(int n) {
#ifdef _OPENMP
    if (n <= 0)
        omp_set_num_threads(omp_get_num_procs());
    else
        omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

// four independent accumulators so the FP add chain does not serialize
template <typename Draw>
inline double noise_dot(std::span<const double> weights, std::uint64_t& st,
                        Draw draw) {
    const std::size_t d = weights.size();
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= d; j += 4) {
        a0 += draw(st) * weights[j];
        a1 += draw(st) * weights[j + 1];
        a2 += draw(st) * weights[j + 2];
        a3 += draw(st) * weights[j + 3];
    }
    for (; j < d; ++j) a0 += draw(st) * weights[j];
    return (a0 + a1) + (a2 + a3);
}

inline std::uint64_t correct_one(double theta_dot_w, double noise_scale,
                                 std::span<const double> weights, NoiseFamily family,
                                 const Stream& sub) {
    std::uint64_t st = sub.bulk_state();
    const double y = detail::rademacher_from_state(st);
    double zdotw = 0.0;
    switch (family) {
        case NoiseFamily::gaussian:
            zdotw = noise_dot(weights, st, [](std::uint64_t& s) {
                return detail::normal_from_state(s);
            });
            break;
        case NoiseFamily::rademacher:
            zdotw = noise_dot(weights, st, [](std::uint64_t& s) {
                return detail::rademacher_from_state(s);
            });
            break;
        case NoiseFamily::uniform:
            zdotw = noise_dot(weights, st, [](std::uint64_t& s) {
                return detail::uniformpm_from_state(s);
            });
            break;
    }
    const double ip = y * theta_dot_w + noise_scale * zdotw;
    return (y * ip > 0.0) ? 1u : 0u;
}

}  // namespace

std::uint64_t mc_correct_count_serial(double theta_dot_w, double noise_scale,
                                      std::span<const double> weights,
                                      NoiseFamily family, std::uint64_t m,
                                      const Stream& base) {
    std::uint64_t correct = 0;
    for (std::uint64_t i = 0; i < m; ++i)
        correct += correct_one(theta_dot_w, noise_scale, weights, family,
                               base.substream(i));
    return correct;
}

std::uint64_t mc_correct_count_omp(double theta_dot_w, double noise_scale,
                                   std::span<const double> weights,
                                   NoiseFamily family, std::uint64_t m,
                                   const Stream& base) {
    std::int64_t correct = 0;
    const std::int64_t im = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) reduction(+ : correct)
    for (std::int64_t i = 0; i < im; ++i)
        correct += static_cast<std::int64_t>(correct_one(
            theta_dot_w, noise_scale, weights, family,
            base.substream(static_cast<std::uint64_t>(i))));
    return static_cast<std::uint64_t>(correct);
}

void label_weighted_mean_serial(std::span<const double> xs,
                                std::span<const double> labels, std::size_t dim,
                                std::span<double> out) {
    const std::size_t n = labels.size();
    if (n == 0) throw std::domain_error("label_weighted_mean: empty dataset");
    if (xs.size() != n * dim || out.size() != dim)
        throw std::invalid_argument("label_weighted_mean: shape mismatch");
    for (std::size_t j = 0; j < dim; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = labels[i];
        const double* row = xs.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) out[j] += y * row[j];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < dim; ++j) out[j] *= inv;
}

void label_weighted_mean_omp(std::span<const double> xs,
                             std::span<const double> labels, std::size_t dim,
                             std::span<double> out) {
    const std::size_t n = labels.size();
    if (n == 0) throw std::domain_error("label_weighted_mean: empty dataset");
    if (xs.size() != n * dim || out.size() != dim)
        throw std::invalid_argument("label_weighted_mean: shape mismatch");
    const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
    std::vector<std::vector<double>> partial(blocks);
    const std::int64_t ib = static_cast<std::int64_t>(blocks);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < ib; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kRowBlock;
        const std::size_t hi = std::min(lo + kRowBlock, n);
        std::vector<double> acc(dim, 0.0);
        for (std::size_t i = lo; i < hi; ++i) {
            const double y = labels[i];
            const double* row = xs.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) acc[j] += y * row[j];
        }
        partial[static_cast<std::size_t>(b)] = std::move(acc);
    }
    // merge in block order: result does not depend on the thread count
    for (std::size_t j = 0; j < dim; ++j) out[j] = 0.0;
    for (const auto& acc : partial)
        for (std::size_t j = 0; j < dim; ++j) out[j] += acc[j];
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < dim; ++j) out[j] *= inv;
}

void label_scores_serial(std::span<const double> xs, std::span<const double> labels,
                         std::size_t dim, std::span<const double> w,
                         std::span<double> scores) {
    const std::size_t n = labels.size();
    if (xs.size() != n * dim || w.size() != dim || scores.size() != n)
        throw std::invalid_argument("label_scores: shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = xs.data() + i * dim;
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += row[j] * w[j];
        scores[i] = labels[i] * s;
    }
}

void label_scores_omp(std::span<const double> xs, std::span<const double> labels,
                      std::size_t dim, std::span<const double> w,
                      std::span<double> scores) {
    const std::size_t n = labels.size();
    if (xs.size() != n * dim || w.size() != dim || scores.size() != n)
        throw std::invalid_argument("label_scores: shape mismatch");
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < in; ++i) {
        const double* row = xs.data() + static_cast<std::size_t>(i) * dim;
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += row[j] * w[j];
        scores[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] * s;
    }
}

namespace {

inline void sample_one_row(std::span<const double> theta, double noise_scale,
                           NoiseFamily family, const Stream& sub, double* row,
                           double* label) {
    std::uint64_t st = sub.bulk_state();
    const double y = detail::rademacher_from_state(st);
    *label = y;
    const std::size_t d = theta.size();
    switch (family) {
        case NoiseFamily::gaussian:
            for (std::size_t j = 0; j < d; ++j)
                row[j] = y * theta[j] +
                         noise_scale * detail::normal_from_state(st);
            break;
        case NoiseFamily::rademacher:
            for (std::size_t j = 0; j < d; ++j)
                row[j] = y * theta[j] +
                         noise_scale * detail::rademacher_from_state(st);
            break;
        case NoiseFamily::uniform:
            for (std::size_t j = 0; j < d; ++j)
                row[j] = y * theta[j] +
                         noise_scale * detail::uniformpm_from_state(st);
            break;
    }
}

}  // namespace

void sample_rows_serial(std::span<const double> theta, double noise_scale,
                        NoiseFamily family, std::uint64_t n, const Stream& base,
                        std::span<double> xs, std::span<double> labels) {
    const std::size_t d = theta.size();
    if (xs.size() != n * d || labels.size() != n)
        throw std::invalid_argument("sample_rows: shape mismatch");
    for (std::uint64_t i = 0; i < n; ++i)
        sample_one_row(theta, noise_scale, family, base.substream(i),
                       xs.data() + i * d, &labels[i]);
}

void sample_rows_omp(std::span<const double> theta, double noise_scale,
                     NoiseFamily family, std::uint64_t n, const Stream& base,
                     std::span<double> xs, std::span<double> labels) {
    const std::size_t d = theta.size();
    if (xs.size() != n * d || labels.size() != n)
        throw std::invalid_argument("sample_rows: shape mismatch");
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < in; ++i)
        sample_one_row(theta, noise_scale, family,
                       base.substream(static_cast<std::uint64_t>(i)),
                       xs.data() + static_cast<std::size_t>(i) * d,
                       &labels[static_cast<std::size_t>(i)]);
}

std::vector<double> mean_of_rows(std::span<const std::vector<double>> rows) {
    if (rows.empty()) throw std::domain_error("mean_of_rows: no rows");
    const std::size_t dim = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != dim) throw std::invalid_argument("mean_of_rows: ragged rows");
    // pairwise merge over the row index; fixed recursion order
    struct Merger {
        std::span<const std::vector<double>> rows;
        std::size_t dim;
        std::vector<double> sum(std::size_t lo, std::size_t hi) const {
            if (hi - lo == 1) return rows[lo];
            const std::size_t mid = lo + (hi - lo) / 2;
            std::vector<double> left = sum(lo, mid);
            const std::vector<double> right = sum(mid, hi);
            for (std::size_t j = 0; j < dim; ++j) left[j] += right[j];
            return left;
        }
    };
    std::vector<double> total = Merger{rows, dim}.sum(0, rows.size());
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& v : total) v *= inv;
    return total;
}

}  // namespace shiftsim::kernels
