#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace roadkit {

// Deterministic, counter-based randomness. Every consumer derives its own
// stream from a key tuple, so outputs do not depend on call order, thread
// scheduling, or platform library internals.

// splitmix64 finalizer (Vigna). Fixed-width integer ops only.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t combine64(std::uint64_t h, std::uint64_t k) {
    return mix64(h ^ (k + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// FNV-1a, for keying streams by string ids.
constexpr std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Keyed pseudo-random stream. Construct from any tuple of integer/string
/// keys; identical keys give identical streams everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

    template <typename... Keys>
    static Rng keyed(std::uint64_t seed, const Keys&... keys) {
        std::uint64_t h = mix64(seed);
        ((h = combine64(h, key_of(keys))), ...);
        return Rng(raw_tag{}, h);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection sampling; exact for any n > 0.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    struct raw_tag {};
    Rng(raw_tag, std::uint64_t state) : state_(state) {}

    static std::uint64_t key_of(std::uint64_t k) { return k; }
    static std::uint64_t key_of(std::int64_t k) { return static_cast<std::uint64_t>(k); }
    static std::uint64_t key_of(int k) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(k)); }
    static std::uint64_t key_of(unsigned k) { return k; }
    static std::uint64_t key_of(std::string_view s) { return hash_str(s); }
    static std::uint64_t key_of(const std::string& s) { return hash_str(s); }
    static std::uint64_t key_of(const char* s) { return hash_str(s); }

    std::uint64_t state_;
};

/// One hash-derived uniform double in [0, 1) for a key tuple. Used for
/// per-pixel noise where a stream would force an evaluation order.
template <typename... Keys>
double keyed_unit(std::uint64_t seed, const Keys&... keys) {
    return Rng::keyed(seed, keys...).next_double();
}

}  // namespace roadkit
