#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace chosim {

// splitmix64 step; also used as the stateless mixer for substream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One-shot mix of a key into a well-spread 64-bit value.
inline std::uint64_t mix64(std::uint64_t key) {
    std::uint64_t s = key;
    return splitmix64(s);
}

// Derive a substream key from (master seed, purpose tag, up to three ids).
// Every random decision in a run draws from a named substream so that
// toggling one feature never perturbs another's randomness.
inline std::uint64_t substream_key(std::uint64_t master, std::string_view purpose,
                                   std::uint64_t a = 0, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a over the tag
    for (char ch : purpose) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = master;
    s = splitmix64(s) ^ h;
    s = splitmix64(s) ^ mix64(a * 0x9e3779b97f4a7c15ULL + 1);
    s = splitmix64(s) ^ mix64(b * 0xd1b54a32d192ed03ULL + 2);
    s = splitmix64(s) ^ mix64(c * 0x8cb92ba72f3d8dd7ULL + 3);
    return splitmix64(s);
}

// xoshiro256++ with hand-rolled real-valued draws, so streams are
// reproducible byte-for-byte regardless of standard library.
class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; the pair partner is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * kPi_ * u2);
        have_cached_ = true;
        return r * std::cos(2.0 * kPi_ * u2);
    }

private:
    static constexpr double kPi_ = 3.14159265358979323846;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

inline Rng make_substream(std::uint64_t master, std::string_view purpose,
                          std::uint64_t a = 0, std::uint64_t b = 0,
                          std::uint64_t c = 0) {
    return Rng(substream_key(master, purpose, a, b, c));
}

// Stateless uniform in [0,1) for a fixed key; used where per-(entity) phases
// are needed without storing them.
inline double hash01(std::uint64_t key) {
    return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

} // namespace chosim
