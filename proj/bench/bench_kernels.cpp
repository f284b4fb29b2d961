// Compares the serial reference kernels against the OpenMP versions and
// reports throughput. Run with OMP_NUM_THREADS to vary the thread count.

#include <chrono>
#include <cstdio>
#include <vector>

#include "shiftsim/kernels.hpp"
#include "shiftsim/prng.hpp"
#include "shiftsim/vec.hpp"

using namespace shiftsim;

namespace {

template <typename F>
double timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

int main() {
    const std::size_t d = 2048;
    const std::uint64_t m = 20000;
    const std::uint64_t n = 8192;

    std::vector<double> theta = unit_spread(d);
    std::vector<double> w(theta);
    const Stream base = derive_stream(SeedSpec{42}, "bench", 0);
    const double tw = dot(theta, w);

    std::printf("threads available: %d\n", kernels::thread_count());
    std::printf("%-34s %10s %10s %8s\n", "kernel", "serial", "omp", "speedup");

    for (NoiseFamily fam :
         {NoiseFamily::gaussian, NoiseFamily::rademacher, NoiseFamily::uniform}) {
        std::uint64_t c1 = 0, c2 = 0;
        const double ts = timed([&] {
            c1 = kernels::mc_correct_count_serial(tw, 1.0, w, fam, m, base);
        });
        const double tp = timed([&] {
            c2 = kernels::mc_correct_count_omp(tw, 1.0, w, fam, m, base);
        });
        std::printf("mc_correct_count/%-17s %9.3fs %9.3fs %7.2fx  (%.2f ns/coord)%s\n",
                    to_string(fam), ts, tp, ts / tp,
                    1e9 * ts / (double(m) * double(d)),
                    c1 == c2 ? "" : "  MISMATCH");
    }

    {
        std::vector<double> xs(n * d), labels(n);
        kernels::sample_rows_omp(theta, 1.0, NoiseFamily::gaussian, n, base, xs,
                                 labels);
        std::vector<double> o1(d), o2(d);
        const double ts = timed(
            [&] { kernels::label_weighted_mean_serial(xs, labels, d, o1); });
        const double tp =
            timed([&] { kernels::label_weighted_mean_omp(xs, labels, d, o2); });
        std::printf("label_weighted_mean                %9.3fs %9.3fs %7.2fx\n", ts,
                    tp, ts / tp);

        std::vector<double> s1(n), s2(n);
        const double ts2 =
            timed([&] { kernels::label_scores_serial(xs, labels, d, w, s1); });
        const double tp2 =
            timed([&] { kernels::label_scores_omp(xs, labels, d, w, s2); });
        std::printf("label_scores                       %9.3fs %9.3fs %7.2fx\n", ts2,
                    tp2, ts2 / tp2);

        std::vector<double> xs2(n * d), lab2(n);
        const double ts3 = timed([&] {
            kernels::sample_rows_serial(theta, 1.0, NoiseFamily::gaussian, n, base,
                                        xs2, lab2);
        });
        const double tp3 = timed([&] {
            kernels::sample_rows_omp(theta, 1.0, NoiseFamily::gaussian, n, base, xs2,
                                     lab2);
        });
        std::printf("sample_rows/gaussian               %9.3fs %9.3fs %7.2fx\n", ts3,
                    tp3, ts3 / tp3);
    }
    return 0;
}
