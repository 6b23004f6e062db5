// Thin FFTW3 front end pinning the DFT conventions used everywhere:
//   forward:  X[k] = sum_n x[n] e^{-j 2 pi k n / N}
//   inverse:  x[n] = (1/N) sum_k X[k] e^{+j 2 pi k n / N}
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace mbcc {

// Out-of-place transforms; in and out must have the same length and may
// alias. Plans are cached per length and shared across threads (execution
// uses the thread-safe new-array interface).
void dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
void idft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

std::vector<std::complex<double>> dft(std::span<const std::complex<double>> in);
std::vector<std::complex<double>> idft(std::span<const std::complex<double>> in);

} // namespace mbcc
