// Subspace pipeline: sample covariance, frequency smoothing, second-order
// elbow model-order selection, the MUSIC pseudo-spectrum over delay, peak
// picking, and least-squares gain inversion.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "mbcc/estimator.hpp"

namespace mbcc {

struct CovarianceEstimate {
    Eigen::MatrixXcd matrix;       // Hermitian, subarray_len x subarray_len
    std::size_t sample_count = 0;  // outer products averaged
    bool smoothed = false;
    std::size_t subarray_len = 0;  // N~ (equals n_on when unsmoothed)
    double bin_spacing_hz = 0.0;   // subcarrier spacing B / N
};

// C = (1/F) sum_f H_f H_f^H over the full allocation, Hermitian-symmetrized.
CovarianceEstimate sample_covariance(const FrameSet& fs);

// Forward frequency smoothing: average the covariances of all
// M = n_on - n_sub + 1 contiguous length-n_sub subcarrier windows across
// all frames. Restores the rank collapsed by coherent multipath.
CovarianceEstimate freq_smooth(const FrameSet& fs, std::size_t n_sub);

struct EigenSplit {
    Eigen::VectorXd eigenvalues;  // descending
    Eigen::MatrixXcd signal_basis;
    Eigen::MatrixXcd noise_basis;
};

// Dense Hermitian EVD; eigenvalues clamped at zero. order selects the
// signal-basis column count.
EigenSplit eigen_split(const CovarianceEstimate& cov, std::size_t order);

Eigen::VectorXd covariance_eigenvalues(const CovarianceEstimate& cov);

// Second-order elbow on dB-scale eigenvalues: argmax of the discrete second
// difference over 1 <= i <= l_max; falls back to 1 when the maximum
// curvature is below tol_db. Scale invariant.
std::size_t elbow_order(const Eigen::VectorXd& eigenvalues_desc, std::size_t l_max,
                        double tol_db = 1.0);

// Delay grid [0, N/(4B)) with step 1/(B * oversample).
std::vector<double> make_delay_grid(const SoundingConfig& cfg, std::size_t oversample = 16);

struct MusicResult {
    std::vector<double> grid_s;     // delay grid, seconds
    std::vector<double> spectrum;   // P(tau), linear scale, > 0
    Eigen::VectorXd eigenvalues;    // of the smoothed covariance, descending
    std::size_t order = 0;          // L hat
    std::vector<double> peaks_s;    // ascending
    bool peak_shortfall = false;
    std::vector<std::complex<double>> gains;
    double gain_residual = 0.0;
    bool gain_ill_conditioned = false;

    // labels carried through for grouping in the analysis stage
    double carrier_hz = 0.0;
    std::string antenna;
    std::string placement;
    std::string orientation;
    bool target = false;
};

// P(tau) = || b^H(tau) U_noise ||^{-2} with steering b(tau)[m] =
// e^{-j 2 pi m (B/N) tau} / sqrt(N~) over the subarray carriers.
MusicResult music_spectrum(const CovarianceEstimate& cov, std::size_t order,
                           std::span<const double> grid);

struct PeakPick {
    std::vector<double> delays_s; // ascending
    bool shortfall = false;       // fewer strict local maxima than requested
};

// The `count` largest strict local maxima, each refined by 3-point parabolic
// interpolation on the linear spectrum.
PeakPick pick_peaks(std::span<const double> grid, std::span<const double> spectrum,
                    std::size_t count);

struct GainFit {
    std::vector<std::complex<double>> gains;
    double residual_norm = 0.0;
    double condition = 0.0;
    bool ill_conditioned = false; // condition > 1e8; minimum-norm solution returned
};

// Least-squares fit of the frame-mean allocated response onto steering
// columns at the given delays (minimum-norm via a rank-revealing
// factorization).
GainFit estimate_gains(const FrameSet& fs, std::span<const double> delays_s);

// Convenience composition used by the CLI and bindings: smooth, elbow,
// spectrum, peaks, gains.
struct MusicParams {
    std::size_t n_sub = 0;         // 0 = ceil(n_on / 2)
    std::size_t l_max = 8;
    std::size_t oversample = 16;
    double elbow_tol_db = 1.0;
    std::size_t force_order = 0;   // 0 = use the elbow estimate
};

MusicResult run_music(const FrameSet& fs, const MusicParams& params = {});

} // namespace mbcc
