// MISO sounding signals: grid configuration, QPSK allocated spectra and
// their time-domain counterparts.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mbcc {

// Seed of the standard sounding pair. Fixed so independently invoked
// pipeline stages (simulate, estimate) regenerate identical sequences, the
// way a measured system shares one pilot definition.
inline constexpr std::uint64_t kSoundingSeed = 0x5eedULL;

// Single source of truth for the sounding grid arithmetic.
struct SoundingConfig {
    std::size_t fft_size = 1024;               // N
    std::size_t n_on = 521;                    // allocated subcarriers, centered
    double sample_rate_hz = 983.04e6;          // B
    std::vector<double> carriers_hz = {6.5e9, 8.75e9};
    std::size_t frames = 100;                  // retained channel estimates per dataset
    std::size_t hw_averages = 100;             // coherent averages per retained frame
    std::optional<double> snr_db = 30.0;       // simulation only; nullopt = noiseless

    // Throws ConfigError unless: fft_size is a power of two, n_on <= fft_size,
    // and n_on is odd (symmetric center allocation) or equal to fft_size
    // (fully allocated diagnostic grids).
    void validate() const;

    double occupied_bandwidth_hz() const {
        return static_cast<double>(n_on) * sample_rate_hz / static_cast<double>(fft_size);
    }
    double bin_spacing_hz() const { return sample_rate_hz / static_cast<double>(fft_size); }
    std::size_t window_len() const { return fft_size / 4; }
};

// Signed subcarrier indices of a centered allocation: [-(n-1)/2, (n-1)/2]
// for odd n, [-n/2+1, n/2] for the fully allocated case.
std::vector<int> subcarrier_indices(std::size_t n_on);

// Complex values on the allocated subcarriers, ordered by ascending index k.
struct AllocatedSpectrum {
    std::vector<std::complex<double>> values;

    std::size_t size() const { return values.size(); }
};

struct TimeSequence {
    std::vector<std::complex<double>> samples; // length fft_size
};

// QPSK sequence: two fair bits per carrier from mt19937_64(seed), bit 0
// selecting the real sign, bit 1 the imaginary sign, each value
// (+-1 +-j)/sqrt(2). Same seed, same sequence.
AllocatedSpectrum gen_qpsk(std::uint64_t seed, std::size_t n_on);

// Second-antenna sequence X_b[k] = X_a[k] (-1)^k; its time sequence is the
// fft_size/2 circular shift of antenna a's. Involution up to the sign
// pattern: applying it twice returns the input.
AllocatedSpectrum derive_orthogonal(const AllocatedSpectrum& x_a);

// Places the allocation on the DFT grid (bin k mod N), zero elsewhere,
// inverse transforms, and normalizes to unit energy.
TimeSequence to_time(const AllocatedSpectrum& x, const SoundingConfig& cfg);

// Scatters allocated values onto the length-N DFT grid (k mod N mapping).
std::vector<std::complex<double>> allocated_to_grid(std::span<const std::complex<double>> values,
                                                    std::size_t n_on, std::size_t fft_size);

// Gathers the allocated bins back out of a length-N spectrum.
std::vector<std::complex<double>> grid_to_allocated(std::span<const std::complex<double>> grid,
                                                    std::size_t n_on, std::size_t fft_size);

} // namespace mbcc
