#pragma once

#include <cmath>
#include <cstdint>

namespace cfaudit {

// Counter-based pseudorandom primitives. Every draw is a pure function of
// (key, counter), so substreams keyed by (seed, patient, field tag) can be
// consumed in any order, including from parallel workers, without changing
// the values drawn.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Combines a diffused hash with a structured value (stream index, tag).
// The multiplicative spread keeps nearby values from producing related
// keys, so distinct seeds yield unrelated substream families rather than
// permutations of one another.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a + 0x9e3779b97f4a7c15ULL * (b + 1));
}

class SubRng {
  public:
    SubRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag)
        : key_(mix64(mix64(splitmix64(seed), stream), tag)) {}

    std::uint64_t next_u64() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // standard normal via Box-Muller; consumes two draws
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // number of failures before first success, P(X=k) = (1-q)^k q
    std::uint32_t geometric(double q) {
        const double u = uniform();
        if (q >= 1.0) return 0;
        const double g = std::floor(std::log1p(-u) / std::log1p(-q));
        return g < 0.0 ? 0u : static_cast<std::uint32_t>(g);
    }

  private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace cfaudit
