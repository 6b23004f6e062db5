// Per-antenna CIR and allocated-carrier response recovery from received
// frames: per-carrier division, first-path alignment, and the N/4
// time-window split that separates the two transmit antennas.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "mbcc/channel.hpp"
#include "mbcc/sounding.hpp"

namespace mbcc {

struct CirEstimate {
    std::vector<std::complex<double>> taps; // length fft_size / 4
    double carrier_hz = 0.0;
};

// Matrix of per-frame allocated-carrier channel estimates for one
// (carrier, antenna, target-state, placement) tuple. Rows are frames.
struct FrameSet {
    Eigen::MatrixXcd rows; // frames x n_on
    double carrier_hz = 0.0;
    std::size_t fft_size = 0;
    double sample_rate_hz = 0.0;
    std::string antenna;    // "a" or "b"
    std::string placement;
    std::string orientation;
    bool target = false;

    double leakage = 0.0;          // out-of-window energy fraction
    bool leakage_warning = false;
    int align_shift = 0;           // common first-path shift, in samples

    std::size_t frame_count() const { return static_cast<std::size_t>(rows.rows()); }
    std::size_t n_on() const { return static_cast<std::size_t>(rows.cols()); }
    Eigen::VectorXcd mean_response() const;
};

// R[k] = Y[k] / X_a[k] on the allocated carriers. y_spectrum is the full
// length-N DFT of a received frame.
std::vector<std::complex<double>> freq_divide(std::span<const std::complex<double>> y_spectrum,
                                              const AllocatedSpectrum& x_a,
                                              const SoundingConfig& cfg);

struct MisoSplit {
    CirEstimate a;
    CirEstimate b;
    double leakage = 0.0; // energy fraction outside both antenna windows
};

// Zero-fills the unallocated bins, inverse transforms, and windows:
// h_a[n] = r[n] and h_b[n] = r[(n + N/2) mod N] for 0 <= n < N/4.
MisoSplit separate_miso(std::span<const std::complex<double>> r_allocated,
                        const SoundingConfig& cfg, double carrier_hz = 0.0);

struct AlignResult {
    std::vector<std::complex<double>> response; // aligned allocated response
    int shift = 0;                              // samples removed from the front
};

// Detects the first bin whose power exceeds beta * max power of the
// time-domain response and rotates it to bin 0.
AlignResult align_first_path(std::span<const std::complex<double>> r_allocated,
                             const SoundingConfig& cfg, double beta = 0.1);

struct FrameSetPair {
    FrameSet a;
    FrameSet b;
};

struct EstimatorOptions {
    double align_beta = 0.1;
    double leakage_warn_threshold = 0.05;
    bool align = true; // one common shift per dataset, from the frame-mean CIR
};

// Full per-dataset chain: divide, align (common shift from the frame mean),
// window-split, and re-extract the allocated carriers of each windowed CIR.
FrameSetPair build_frameset(const std::vector<RxFrame>& frames, const AllocatedSpectrum& x_a,
                            const SoundingConfig& cfg, const EstimatorOptions& opts = {});

} // namespace mbcc
