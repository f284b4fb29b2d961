#ifndef SHIFTSIM_KERNELS_HPP
#define SHIFTSIM_KERNELS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "shiftsim/model_types.hpp"
#include "shiftsim/prng.hpp"

// Data-parallel inner loops. Every kernel comes in a _serial reference
// version (straight loop, used by tests and the benchmark) and an _omp
// version used in production. The _omp versions are thread-count invariant:
// each sample draws from its own counter-derived substream, counts reduce
// over integers, and float accumulation runs over fixed-size blocks merged
// in block order.
namespace shiftsim::kernels {

void set_threads(int n);  // <=0 resets to the OpenMP default
int thread_count();

// One draw of coordinate noise per the family.
inline double draw_noise(NoiseFamily f, Stream& s) {
    switch (f) {
        case NoiseFamily::gaussian: return s.next_normal();
        case NoiseFamily::rademacher: return s.next_rademacher();
        case NoiseFamily::uniform: return s.next_uniform_pm();
    }
    return 0.0;
}

// Count of test samples classified correctly by a model with
// theta_dot_w = <theta_test, w> and noise_scale = |theta_test|/rho_test.
// Sample i uses base.substream(i): draw y, then d noise coordinates.
// An inner product of exactly zero counts as an error.
std::uint64_t mc_correct_count_serial(double theta_dot_w, double noise_scale,
                                      std::span<const double> weights,
                                      NoiseFamily family, std::uint64_t m,
                                      const Stream& base);
std::uint64_t mc_correct_count_omp(double theta_dot_w, double noise_scale,
                                   std::span<const double> weights,
                                   NoiseFamily family, std::uint64_t m,
                                   const Stream& base);

// out[j] = (1/n) sum_i y_i * x_ij  (the canonical estimator).
void label_weighted_mean_serial(std::span<const double> xs,
                                std::span<const double> labels, std::size_t dim,
                                std::span<double> out);
void label_weighted_mean_omp(std::span<const double> xs,
                             std::span<const double> labels, std::size_t dim,
                             std::span<double> out);

// scores[i] = <x_i * y_i, w>.
void label_scores_serial(std::span<const double> xs, std::span<const double> labels,
                         std::size_t dim, std::span<const double> w,
                         std::span<double> scores);
void label_scores_omp(std::span<const double> xs, std::span<const double> labels,
                      std::size_t dim, std::span<const double> w,
                      std::span<double> scores);

// Fill dataset rows [0, n) in place: labels[i] = +/-1,
// xs[i*d + j] = y_i*theta[j] + noise_scale*z_ij. Row i uses base.substream(i).
void sample_rows_serial(std::span<const double> theta, double noise_scale,
                        NoiseFamily family, std::uint64_t n, const Stream& base,
                        std::span<double> xs, std::span<double> labels);
void sample_rows_omp(std::span<const double> theta, double noise_scale,
                     NoiseFamily family, std::uint64_t n, const Stream& base,
                     std::span<double> xs, std::span<double> labels);

// Column-wise mean of a list of equally sized vectors, merged in fixed
// pairwise order (deterministic across thread counts and runs).
std::vector<double> mean_of_rows(std::span<const std::vector<double>> rows);

}  // namespace shiftsim::kernels

#endif
