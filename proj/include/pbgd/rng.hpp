#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pbgd {

// All randomness in the project flows from one root seed split into named
// streams, so adding a stream never perturbs existing ones.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (root, name, index).
inline std::uint64_t derive_stream(std::uint64_t root, std::string_view name,
                                   std::uint64_t index = 0) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the stream name
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::uint64_t s = root ^ h;
    std::uint64_t mixed = splitmix64(s);
    s ^= index + 0x632BE59BD9B4E019ull;
    return mixed ^ splitmix64(s);
}

// Deterministic generator. mt19937_64 output is pinned by the standard, and
// all value mappings below are hand-rolled so results do not depend on the
// standard library's distribution implementations.
class Rng {
public:
    Rng() : engine_(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Strictly inside (0,1); never returns an endpoint, so it is safe to feed
    // into inverse-CDF transforms.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n) via bitmask rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> __builtin_clzll(n - 1);
        std::uint64_t v;
        do {
            v = next_u64() & mask;
        } while (v >= n);
        return v;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pbgd
