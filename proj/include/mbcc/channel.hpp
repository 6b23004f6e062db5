// Multipath channel simulation: frequency-dependent tap gains over shared
// geometric delays, a target overlay, and noisy received frames. Serves as
// the ground-truth oracle for the estimation and subspace stages.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "mbcc/sounding.hpp"

namespace mbcc {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct Tap {
    double delay_s = 0.0;
    std::vector<std::complex<double>> gains; // one per carrier, same order as config
};

struct AntennaChannel {
    std::vector<Tap> taps; // sorted by delay
};

// Delays are shared across carriers (environmental geometry); gains are
// carrier dependent. Time invariant.
struct MultipathChannel {
    std::vector<double> carriers_hz;
    AntennaChannel a;
    AntennaChannel b;

    // Checks delay ordering/bounds against the config window; throws
    // ConfigError on violation.
    void validate(const SoundingConfig& cfg) const;
};

enum class AntennaSel { A, B, Both };

struct AddedPath {
    double delay_s = 0.0;
    std::vector<std::complex<double>> gains; // per carrier
    AntennaSel antenna = AntennaSel::Both;
};

struct BlockedTap {
    AntennaSel antenna = AntennaSel::Both;
    std::size_t tap_index = 0;
    double factor = 0.0; // attenuation in [0, 1]; 0 = full blockage
};

// Synthetic stand-in for a physical target: new reflections plus blocked
// clutter taps.
struct TargetOverlay {
    std::vector<AddedPath> added;
    std::vector<BlockedTap> blocked;

    bool empty() const { return added.empty() && blocked.empty(); }
};

// Random channel specification for sample_channel.
struct ChannelSpec {
    std::size_t l_min = 3;
    std::size_t l_max = 5;
    double delay_spread_s = 0.0;   // upper bound on the last tap delay
    double min_spacing_s = 0.0;    // minimum tap separation
    double decay_s = 0.0;          // exponential power decay constant; 0 = flat profile
    double rho = 1.0;              // cross-carrier gain correlation in [0, 1]
};

// Draws per-antenna taps with shared delays across carriers. Gains follow
// alpha = sqrt(p) * (rho * shared + sqrt(1 - rho^2) * independent) with
// shared/independent unit complex Gaussians, so rho = 1 gives identical
// per-carrier gain vectors and rho = 0 independent ones.
MultipathChannel sample_channel(const ChannelSpec& spec, const SoundingConfig& cfg,
                                std::uint64_t seed);

// Applies blockage scaling and merges added paths (re-sorted); the input
// channel is not modified.
MultipathChannel apply_target(const MultipathChannel& ch, const TargetOverlay& overlay);

// H[k] = sum_l alpha_l e^{-j 2 pi f_k tau_l} with f_k = k * B / N evaluated
// on the allocated subcarriers. Fractional delays are exact here.
std::vector<std::complex<double>> antenna_response(const AntennaChannel& ant,
                                                   std::size_t carrier_idx,
                                                   const SoundingConfig& cfg);

struct RxFrame {
    std::vector<std::complex<double>> samples; // length fft_size, time domain
    double carrier_hz = 0.0;
    double true_snr_db = 0.0; // +inf when noiseless
};

// Per frame: Y[k] = X_a[k] H_a[k] + X_b[k] H_b[k] + W[k] on the allocated
// carriers, inverse transformed to time. Noise is white across allocated
// carriers with variance set so that the mean allocated-carrier SNR equals
// cfg.snr_db (reference power 1.0 when the channel is exactly zero).
// Produces cfg.frames frames for the selected carrier.
std::vector<RxFrame> synthesize_rx(const MultipathChannel& ch, const AllocatedSpectrum& x_a,
                                   const AllocatedSpectrum& x_b, const SoundingConfig& cfg,
                                   std::size_t carrier_idx, std::uint64_t seed);

// Coherent mean of m consecutive frames per retained frame; the signal part
// is unchanged (time-invariant channel), noise variance drops by m.
std::vector<RxFrame> hw_average(const std::vector<RxFrame>& frames, std::size_t m);

} // namespace mbcc
