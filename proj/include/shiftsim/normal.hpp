#ifndef SHIFTSIM_NORMAL_HPP
#define SHIFTSIM_NORMAL_HPP

#include <cstdint>

namespace shiftsim {

// A value in [0, 1]. Constructed through make_probability so out-of-range
// values fail loudly at the boundary instead of deep inside a fit.
struct Probability {
    double value = 0.0;
};

Probability make_probability(double value);

// Standard normal CDF. Domain error on non-finite input.
double phi(double t);

// Standard normal density.
double normal_pdf(double t);

// Inverse standard normal CDF (the probit). Requires 0 < p < 1; callers
// holding empirical accuracies clamp first (clamp_accuracy).
double probit(double p);

// Pull an empirical accuracy away from {0,1} so the probit stays finite:
// min(max(p, 1/(2m)), 1 - 1/(2m)) for an evaluation sample count m >= 1.
Probability clamp_accuracy(Probability p, std::uint64_t m);

}  // namespace shiftsim

#endif
