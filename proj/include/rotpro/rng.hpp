#pragma once

#include <cstdint>
#include <random>

namespace rotpro {

// Deterministic RNG wrapper. std::mt19937_64 has a standardized output
// sequence, and the mappings below avoid the implementation-defined
// std::uniform_*_distribution, so identical seeds give identical draws on
// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // [lo, hi)
    double uniform(double lo, double hi) {
        return lo + uniform() * (hi - lo);
    }

    // [0, n); n must be > 0. Modulo bias is < 2^-40 for any n below 2^24.
    std::uint64_t uniform_int(std::uint64_t n) {
        return gen_() % n;
    }

    bool coin() { return (gen_() >> 63) != 0; }

private:
    std::mt19937_64 gen_;
};

// splitmix64 step; used to derive independent per-purpose seeds from the
// single run seed recorded in the manifest.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace rotpro
