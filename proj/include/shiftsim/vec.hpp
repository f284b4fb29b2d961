#ifndef SHIFTSIM_VEC_HPP
#define SHIFTSIM_VEC_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace shiftsim {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// cos of the angle between a and b; domain error if either has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

// Deterministic pairwise sum (fixed recursion, independent of call site).
double pairwise_sum(std::span<const double> values);

// e_i scaled to unit norm.
std::vector<double> unit_axis(std::size_t dim, std::size_t axis);

// (1,...,1)/sqrt(d): a direction with no heavy coordinate. The canonical
// in-plane partner is orthogonal to it and likewise spread.
std::vector<double> unit_spread(std::size_t dim);
std::vector<double> unit_spread_partner(std::size_t dim);

// cos(angle)*b1 + sin(angle)*b2 for unit vectors b1, b2.
std::vector<double> rotate_in_plane(std::span<const double> b1,
                                    std::span<const double> b2, double angle_rad);

}  // namespace shiftsim

#endif
