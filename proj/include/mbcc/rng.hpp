// Reproducible random number generation.
//
// Every stochastic operation in the toolkit draws from this wrapper around
// std::mt19937_64. The mt19937_64 output sequence is fully specified by the
// C++ standard, and all value mappings below are written against the raw
// 64-bit words (never std::uniform_*_distribution, whose output is
// implementation defined), so identical seeds give identical results on
// every platform.
//
// Per-dataset / per-frame sub-seeds are derived with splitmix64 so the
// streams are independent of scheduling order.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace mbcc {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic sub-stream seed: hash the base seed together with one or
// more stream identifiers.
inline std::uint64_t derive_seed(std::uint64_t base) { return splitmix64(base); }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t id, Rest... rest) {
    return derive_seed(splitmix64(base ^ splitmix64(id + 0x517cc1b727220a95ULL)), rest...);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // Uniform in [0, 1), 53-bit mantissa.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n) by rejection, unbiased.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0)
            return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit)
            v = engine_();
        return v % n;
    }

    // Standard normal via Box-Muller (deterministic, unlike
    // std::normal_distribution).
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0)
            u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly symmetric complex normal with E|z|^2 = 1.
    std::complex<double> gauss_complex() {
        const double re = gauss();
        const double im = gauss();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace mbcc
