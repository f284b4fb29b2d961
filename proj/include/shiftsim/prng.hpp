#ifndef SHIFTSIM_PRNG_HPP
#define SHIFTSIM_PRNG_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace shiftsim {

// Base seed all derived streams hang off. A stream is identified by
// (base_seed, purpose tag, trial index) and nothing else, so re-running an
// experiment reproduces every draw regardless of thread count or schedule.
struct SeedSpec {
    std::uint64_t base_seed = 0;
};

namespace detail {

// splitmix64 finalizer (Vigna); also used as the generic 64-bit avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// multiplicative inverse of kGolden mod 2^64 (kGolden is odd)
consteval std::uint64_t golden_inverse() {
    std::uint64_t inv = kGolden;
    for (int i = 0; i < 6; ++i) inv *= 2ull - kGolden * inv;
    return inv;
}
inline constexpr std::uint64_t kGoldenInv = golden_inverse();

std::uint64_t fnv1a64(std::string_view s);

// draw i of a stream with key k is mix64(k + (i+1)*kGolden); the bulk
// samplers walk the same sequence through an incremental state word
inline std::uint64_t state_next(std::uint64_t& s) { return mix64(s += kGolden); }

inline double u01_from(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;  // [0,1)
}

inline double u01_open_from(std::uint64_t u) {
    return static_cast<double>((u >> 11) + 1) * 0x1.0p-53;  // (0,1]
}

// +/-1.0 with the sign taken from the top bit, branchless
inline double signed_unit(std::uint64_t u) {
    return std::bit_cast<double>(0x3FF0000000000000ull |
                                 (u & 0x8000000000000000ull));
}

// 256-layer ziggurat for the standard normal.
struct ZigguratTable {
    static constexpr int kLayers = 256;
    double x[kLayers + 1];  // x[0] > R = x[1] > ... > x[kLayers] = 0
    double f[kLayers + 1];  // exp(-x^2/2) at the boundaries
    double r;
    ZigguratTable();
};
extern const ZigguratTable kZiggurat;

// tail / wedge handling; returns NaN to request another round trip.
// Out of line so the hot path below stays free of calls.
double normal_slow_path(std::uint64_t& s, int layer, double ax, double sign);

inline double normal_from_state(std::uint64_t& s) {
    const ZigguratTable& t = kZiggurat;
    for (;;) {
        const std::uint64_t u = state_next(s);
        const int i = static_cast<int>(u & 255u);
        const double a = u01_from(u);
        const double sign = signed_unit(u << 55);  // bit 8
        const double ax = a * t.x[i];
        if (ax < t.x[i + 1]) return sign * ax;
        const double slow = normal_slow_path(s, i, ax, sign);
        if (!std::isnan(slow)) return slow;
    }
}

inline double rademacher_from_state(std::uint64_t& s) {
    return signed_unit(state_next(s));
}

inline constexpr double kSqrt3 = 1.7320508075688772;

inline double uniformpm_from_state(std::uint64_t& s) {
    return (2.0 * u01_from(state_next(s)) - 1.0) * kSqrt3;
}

}  // namespace detail

// Counter-based generator: draw i of a stream is a pure function of
// (key, i). Random access makes per-sample substreams cheap, which is what
// keeps the parallel kernels schedule-independent.
class Stream {
  public:
    Stream() = default;
    explicit Stream(std::uint64_t key) : key_(key), state_(key) {}

    std::uint64_t key() const { return key_; }
    std::uint64_t position() const {
        return (state_ - key_) * detail::kGoldenInv;
    }

    std::uint64_t next_u64() { return detail::state_next(state_); }
    double next_uniform01() { return detail::u01_from(next_u64()); }
    double next_uniform01_open() { return detail::u01_open_from(next_u64()); }
    double next_normal() { return detail::normal_from_state(state_); }
    double next_rademacher() { return detail::rademacher_from_state(state_); }
    double next_uniform_pm() { return detail::uniformpm_from_state(state_); }

    // Uniform integer in [0, bound), bound >= 1. Unbiased (rejection).
    std::uint64_t next_below(std::uint64_t bound);

    // Independent child stream; used to give each sample / trial / attempt
    // its own draw space.
    Stream substream(std::uint64_t index) const;

    // raw state word for the bulk samplers; draws made through it continue
    // this stream's sequence
    std::uint64_t bulk_state() const { return state_; }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t state_ = 0;
};

Stream derive_stream(SeedSpec seed, std::string_view purpose, std::uint64_t trial);

}  // namespace shiftsim

#endif
