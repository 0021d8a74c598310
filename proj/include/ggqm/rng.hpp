#pragma once

#include <cstdint>
#include <random>

namespace ggqm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-sample stream: depends only on (master seed, stream index).
class Rng {
public:
    Rng(std::uint64_t master, std::uint64_t stream) : eng_(splitmix64(master ^ splitmix64(stream + 1))) {}
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // uniform in [0,1) with 53 random bits; identical on every platform
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t bits() { return eng_(); }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace ggqm
