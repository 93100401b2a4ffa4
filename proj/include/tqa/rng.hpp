#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tqa {

// FNV-1a. std::hash is implementation-defined, so seed derivation uses this
// instead to keep pipelines replayable across toolchains.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Every stage/group gets its own stream named after what it is for, so stages
// can be re-run independently and output does not depend on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
    return splitmix64(master ^ fnv1a64(name));
}

// Deterministic RNG. mt19937_64 output is bit-exact per the standard; the
// bounded draws below avoid std::uniform_int_distribution and std::shuffle,
// whose results differ across standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [lo, hi], both ends inclusive. Unbiased via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        std::uint64_t n = static_cast<std::uint64_t>(hi - lo) + 1;
        if (n == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
        std::uint64_t threshold = (0 - n) % n;                 // 2^64 mod n
        std::uint64_t x;
        do {
            x = next();
        } while (x < threshold);
        return lo + static_cast<std::int64_t>(x % n);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices out of [0, n), returned in ascending order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = static_cast<std::size_t>(
                uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n) - 1));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace tqa
