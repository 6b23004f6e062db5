// Test-only reference implementations, kept independent of the library's
// FFT path: naive O(N^2) transforms and direct formula evaluation.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using cvec = std::vector<std::complex<double>>;

inline cvec naive_dft(const cvec& x) {
    const std::size_t n = x.size();
    cvec out(n, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t m = 0; m < n; ++m) {
            const double ph = -2.0 * M_PI * static_cast<double>(k * m) / static_cast<double>(n);
            out[k] += x[m] * std::complex<double>(std::cos(ph), std::sin(ph));
        }
    return out;
}

inline cvec naive_idft(const cvec& x) {
    const std::size_t n = x.size();
    cvec out(n, {0.0, 0.0});
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t k = 0; k < n; ++k) {
            const double ph = 2.0 * M_PI * static_cast<double>(k * m) / static_cast<double>(n);
            out[m] += x[k] * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        out[m] /= static_cast<double>(n);
    }
    return out;
}

inline cvec circular_convolve(const cvec& x, const cvec& h) {
    const std::size_t n = x.size();
    cvec out(n, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t m = 0; m < n; ++m)
            out[i] += x[m] * h[(i + n - m) % n];
    return out;
}

inline double energy(const cvec& x) {
    double e = 0.0;
    for (const auto& v : x)
        e += std::norm(v);
    return e;
}

inline double rel_error(const cvec& got, const cvec& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += std::norm(got[i] - want[i]);
        den += std::norm(want[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

} // namespace oracle
