#include "shiftsim/prng.hpp"

#include <limits>
#include <stdexcept>

namespace shiftsim {

namespace detail {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

ZigguratTable::ZigguratTable() {
    r = 3.6541528853610088;
    const double fr = std::exp(-0.5 * r * r);
    // area of one layer = r*f(r) + upper tail mass (unnormalized density)
    const double tail =
        std::sqrt(3.14159265358979323846 / 2.0) * std::erfc(r / std::sqrt(2.0));
    const double v = r * fr + tail;
    x[0] = v / fr;
    x[1] = r;
    f[0] = 1.0;  // sentinel, the base layer never reads it
    f[1] = fr;
    for (int i = 2; i < kLayers; ++i) {
        const double y = std::exp(-0.5 * x[i - 1] * x[i - 1]) + v / x[i - 1];
        x[i] = std::sqrt(-2.0 * std::log(y));
        f[i] = y;
    }
    x[kLayers] = 0.0;
    f[kLayers] = 1.0;
    // with the canonical R the strip stack must close at f(0) = 1
    const double closure =
        std::exp(-0.5 * x[kLayers - 1] * x[kLayers - 1]) + v / x[kLayers - 1];
    if (std::fabs(closure - 1.0) > 1e-6)
        throw std::logic_error("ziggurat table failed to close");
}

const ZigguratTable kZiggurat;

[[gnu::cold, gnu::noinline]] double normal_slow_path(std::uint64_t& s, int layer,
                                                     double ax, double sign) {
    const ZigguratTable& t = kZiggurat;
    if (layer == 0) {
        // Marsaglia tail beyond R
        double xx, yy;
        do {
            xx = -std::log(u01_open_from(state_next(s))) / t.r;
            yy = -std::log(u01_open_from(state_next(s)));
        } while (yy + yy < xx * xx);
        return sign * (t.r + xx);
    }
    const double y0 = t.f[layer];      // density at the wide edge (lower)
    const double y1 = t.f[layer + 1];  // density at the narrow edge (upper)
    if (y0 + u01_from(state_next(s)) * (y1 - y0) < std::exp(-0.5 * ax * ax))
        return sign * ax;
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

std::uint64_t Stream::next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be >= 1");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
        const std::uint64_t u = next_u64();
        if (u < limit) return u % bound;
    }
}

Stream Stream::substream(std::uint64_t index) const {
    return Stream(detail::mix64((key_ + 0x5851F42D4C957F2Dull) ^
                                detail::mix64(index + detail::kGolden)));
}

Stream derive_stream(SeedSpec seed, std::string_view purpose, std::uint64_t trial) {
    using detail::kGolden;
    using detail::mix64;
    std::uint64_t h = mix64(seed.base_seed + kGolden);
    h = mix64(h ^ detail::fnv1a64(purpose));
    h = mix64(h + (trial + 1) * kGolden);
    return Stream(h);
}

}  // namespace shiftsim
