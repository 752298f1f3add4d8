#ifndef LATEBIND_RNG_HPP
#define LATEBIND_RNG_HPP

#include <cstdint>

// Deterministic, stdlib-independent random primitives. Every stochastic
// component in the project draws through these so that a single seed fully
// determines all outputs, independent of platform or standard library.

namespace latebind {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform in (0,1): 53 mantissa bits, never exactly 0 or 1.
inline double bits_to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0xd1b54a32d192ed03ULL) {
        // warm up so that small/sequential seeds decorrelate
        splitmix64(state_);
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }
    double next_unit() { return bits_to_unit(next_u64()); }

    /// Standard normal via Box-Muller (first value of the pair).
    double next_normal();

  private:
    std::uint64_t state_;
};

/// FNV-1a over a byte string; stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(const char* data, std::size_t size) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ULL;
    }
    return h;
}

/// Stateless mix of a seed with salts; the basis for common-random-number
/// streams keyed by (seed, invocation, function, purpose).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = seed;
    s ^= splitmix64(a) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    s ^= splitmix64(b) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    s ^= splitmix64(c) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    return s;
}

} // namespace latebind

#endif // LATEBIND_RNG_HPP
