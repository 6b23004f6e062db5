#include "mbcc/sounding.hpp"

#include <cmath>

#include "mbcc/errors.hpp"
#include "mbcc/fft.hpp"
#include "mbcc/rng.hpp"

namespace mbcc {

void SoundingConfig::validate() const {
    if (fft_size == 0 || (fft_size & (fft_size - 1)) != 0)
        throw ConfigError("fft_size must be a power of two");
    if (n_on == 0)
        throw ConfigError("n_on must be positive");
    if (n_on > fft_size)
        throw ConfigError("n_on exceeds fft_size");
    if (n_on % 2 == 0 && n_on != fft_size)
        throw ConfigError("n_on must be odd (or equal to fft_size for full allocation)");
    if (sample_rate_hz <= 0.0)
        throw ConfigError("sample_rate_hz must be positive");
    if (frames == 0)
        throw ConfigError("frames must be at least 1");
    if (hw_averages == 0)
        throw ConfigError("hw_averages must be at least 1");
    if (carriers_hz.empty())
        throw ConfigError("at least one carrier frequency required");
}

std::vector<int> subcarrier_indices(std::size_t n_on) {
    std::vector<int> ks(n_on);
    const int n = static_cast<int>(n_on);
    const int k_min = (n_on % 2 == 1) ? -(n - 1) / 2 : -n / 2 + 1;
    for (int i = 0; i < n; ++i)
        ks[static_cast<std::size_t>(i)] = k_min + i;
    return ks;
}

AllocatedSpectrum gen_qpsk(std::uint64_t seed, std::size_t n_on) {
    if (n_on == 0 || n_on % 2 == 0)
        throw ConfigError("gen_qpsk: n_on must be odd and positive");
    Rng rng(seed);
    AllocatedSpectrum x;
    x.values.resize(n_on);
    for (auto& v : x.values) {
        const std::uint64_t bits = rng.bits();
        const double re = (bits & 1u) ? -M_SQRT1_2 : M_SQRT1_2;
        const double im = (bits & 2u) ? -M_SQRT1_2 : M_SQRT1_2;
        v = {re, im};
    }
    return x;
}

AllocatedSpectrum derive_orthogonal(const AllocatedSpectrum& x_a) {
    const auto ks = subcarrier_indices(x_a.size());
    AllocatedSpectrum x_b;
    x_b.values.resize(x_a.size());
    for (std::size_t i = 0; i < x_a.size(); ++i)
        x_b.values[i] = (ks[i] & 1) ? -x_a.values[i] : x_a.values[i];
    return x_b;
}

std::vector<std::complex<double>> allocated_to_grid(std::span<const std::complex<double>> values,
                                                    std::size_t n_on, std::size_t fft_size) {
    if (values.size() != n_on)
        throw ConfigError("allocated_to_grid: value count does not match n_on");
    if (n_on > fft_size)
        throw ConfigError("allocated_to_grid: allocation does not fit the FFT grid");
    const auto ks = subcarrier_indices(n_on);
    std::vector<std::complex<double>> grid(fft_size, {0.0, 0.0});
    const int n = static_cast<int>(fft_size);
    for (std::size_t i = 0; i < n_on; ++i) {
        const int bin = ((ks[i] % n) + n) % n;
        grid[static_cast<std::size_t>(bin)] = values[i];
    }
    return grid;
}

std::vector<std::complex<double>> grid_to_allocated(std::span<const std::complex<double>> grid,
                                                    std::size_t n_on, std::size_t fft_size) {
    if (grid.size() != fft_size)
        throw ConfigError("grid_to_allocated: spectrum length does not match fft_size");
    const auto ks = subcarrier_indices(n_on);
    std::vector<std::complex<double>> values(n_on);
    const int n = static_cast<int>(fft_size);
    for (std::size_t i = 0; i < n_on; ++i) {
        const int bin = ((ks[i] % n) + n) % n;
        values[i] = grid[static_cast<std::size_t>(bin)];
    }
    return values;
}

TimeSequence to_time(const AllocatedSpectrum& x, const SoundingConfig& cfg) {
    if (x.size() > cfg.fft_size)
        throw ConfigError("to_time: allocation does not fit the FFT grid");
    const auto grid = allocated_to_grid(x.values, x.size(), cfg.fft_size);
    TimeSequence t;
    t.samples = idft(grid);
    double energy = 0.0;
    for (const auto& v : t.samples)
        energy += std::norm(v);
    if (energy > 0.0) {
        const double scale = 1.0 / std::sqrt(energy);
        for (auto& v : t.samples)
            v *= scale;
    }
    return t;
}

} // namespace mbcc
