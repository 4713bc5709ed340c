#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace palmmap {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stateless mix of up to four keys into one 64-bit value. Used wherever a
// noise draw must depend only on (seed, stream, counter), never on call order.
inline uint64_t hash_mix(uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) {
    uint64_t s = a;
    uint64_t h = splitmix64(s);
    s ^= b + 0x9E3779B97F4A7C15ull;
    h ^= splitmix64(s);
    s ^= c + 0xC2B2AE3D27D4EB4Full;
    h ^= splitmix64(s);
    s ^= d + 0x165667B19E3779F9ull;
    h ^= splitmix64(s);
    return h;
}

// Uniform double in (0,1), 53-bit resolution.
inline double u64_to_unit(uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double hash_uniform(uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) {
    return u64_to_unit(hash_mix(a, b, c, d));
}

// Standard normal via Box-Muller on two counter-hashed uniforms.
inline double hash_normal(uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) {
    double u1 = u64_to_unit(hash_mix(a, b, c, d));
    double u2 = u64_to_unit(hash_mix(a ^ 0x5851F42D4C957F2Dull, b, c, d));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Engine helpers. Distribution classes from <random> are not pinned by the
// standard, so anything that must be reproducible uses these instead.
inline double uniform_unit(std::mt19937_64& eng) { return u64_to_unit(eng()); }

inline uint64_t uniform_index(std::mt19937_64& eng, uint64_t n) {
    // Bounded rejection sampling; unbiased.
    if (n == 0) return 0;
    uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
        v = eng();
    } while (v >= lim);
    return v % n;
}

inline double normal(std::mt19937_64& eng) {
    double u1 = uniform_unit(eng);
    double u2 = uniform_unit(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline std::mt19937_64 make_engine(uint64_t seed, uint64_t stream = 0) {
    return std::mt19937_64(hash_mix(seed, stream, 0x52455047ull));
}

}  // namespace palmmap
