#include "shiftsim/vec.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftsim {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0)
        throw std::domain_error("cosine: zero-norm vector");
    return dot(a, b) / (na * nb);
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> unit_axis(std::size_t dim, std::size_t axis) {
    if (axis >= dim) throw std::invalid_argument("unit_axis: axis out of range");
    std::vector<double> v(dim, 0.0);
    v[axis] = 1.0;
    return v;
}

std::vector<double> unit_spread(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("unit_spread: empty dimension");
    std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    return v;
}

std::vector<double> unit_spread_partner(std::size_t dim) {
    if (dim < 2) throw std::invalid_argument("unit_spread_partner: need dim >= 2");
    // alternating +1/-1 pattern; exactly orthogonal to unit_spread for even
    // dim, re-orthogonalized otherwise
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
    if (dim % 2 != 0) {
        const std::vector<double> b1 = unit_spread(dim);
        const double proj = dot(v, b1);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * b1[i];
    }
    const double nv = norm(v);
    for (double& x : v) x /= nv;
    return v;
}

std::vector<double> rotate_in_plane(std::span<const double> b1,
                                    std::span<const double> b2, double angle_rad) {
    if (b1.size() != b2.size())
        throw std::invalid_argument("rotate_in_plane: dimension mismatch");
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    std::vector<double> v(b1.size());
    for (std::size_t i = 0; i < b1.size(); ++i) v[i] = c * b1[i] + s * b2[i];
    return v;
}

}  // namespace shiftsim
