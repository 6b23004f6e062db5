#include "mbcc/estimator.hpp"

#include <cmath>

#include "mbcc/errors.hpp"
#include "mbcc/fft.hpp"

namespace mbcc {
namespace {

// Scatter an allocated response onto the N-grid and inverse transform.
std::vector<std::complex<double>> allocated_to_cir(std::span<const std::complex<double>> r,
                                                   const SoundingConfig& cfg) {
    return idft(allocated_to_grid(r, cfg.n_on, cfg.fft_size));
}

int detect_first_path(std::span<const std::complex<double>> time_r, double beta) {
    double max_pow = 0.0;
    for (const auto& v : time_r)
        max_pow = std::max(max_pow, std::norm(v));
    if (max_pow <= 0.0)
        throw NumericalError("align_first_path: all-zero input");
    const double thresh = beta * max_pow;
    for (std::size_t n = 0; n < time_r.size(); ++n)
        if (std::norm(time_r[n]) >= thresh)
            return static_cast<int>(n);
    return 0;
}

std::vector<std::complex<double>> apply_shift(std::span<const std::complex<double>> r_allocated,
                                              const SoundingConfig& cfg, int shift) {
    const auto ks = subcarrier_indices(cfg.n_on);
    std::vector<std::complex<double>> out(r_allocated.size());
    const double step = 2.0 * M_PI * static_cast<double>(shift) / static_cast<double>(cfg.fft_size);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double phase = step * ks[i];
        out[i] = r_allocated[i] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return out;
}

} // namespace

Eigen::VectorXcd FrameSet::mean_response() const {
    if (rows.rows() == 0)
        throw ConfigError("FrameSet: empty");
    return rows.colwise().mean();
}

std::vector<std::complex<double>> freq_divide(std::span<const std::complex<double>> y_spectrum,
                                              const AllocatedSpectrum& x_a,
                                              const SoundingConfig& cfg) {
    if (y_spectrum.size() != cfg.fft_size)
        throw ConfigError("freq_divide: spectrum length does not match fft_size");
    if (x_a.size() != cfg.n_on)
        throw ConfigError("freq_divide: reference length does not match n_on");
    const auto y_alloc = grid_to_allocated(y_spectrum, cfg.n_on, cfg.fft_size);
    std::vector<std::complex<double>> r(cfg.n_on);
    for (std::size_t i = 0; i < cfg.n_on; ++i) {
        const double mag = std::abs(x_a.values[i]);
        if (mag < 1e-12)
            throw NumericalError("freq_divide: zero-magnitude reference symbol");
        r[i] = y_alloc[i] / x_a.values[i];
    }
    return r;
}

MisoSplit separate_miso(std::span<const std::complex<double>> r_allocated,
                        const SoundingConfig& cfg, double carrier_hz) {
    if (r_allocated.size() != cfg.n_on)
        throw ConfigError("separate_miso: response length does not match n_on");
    const auto r = allocated_to_cir(r_allocated, cfg);
    const std::size_t n = cfg.fft_size;
    const std::size_t w = cfg.window_len();

    MisoSplit split;
    split.a.carrier_hz = carrier_hz;
    split.b.carrier_hz = carrier_hz;
    split.a.taps.assign(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(w));
    split.b.taps.resize(w);
    for (std::size_t i = 0; i < w; ++i)
        split.b.taps[i] = r[(i + n / 2) % n];

    double total = 0.0;
    double outside = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(r[i]);
        total += p;
        const bool in_a = i < w;
        const bool in_b = i >= n / 2 && i < n / 2 + w;
        if (!in_a && !in_b)
            outside += p;
    }
    split.leakage = total > 0.0 ? outside / total : 0.0;
    return split;
}

AlignResult align_first_path(std::span<const std::complex<double>> r_allocated,
                             const SoundingConfig& cfg, double beta) {
    if (r_allocated.size() != cfg.n_on)
        throw ConfigError("align_first_path: response length does not match n_on");
    const auto time_r = allocated_to_cir(r_allocated, cfg);
    const int shift = detect_first_path(time_r, beta);
    AlignResult out;
    out.shift = shift;
    out.response = shift == 0
                       ? std::vector<std::complex<double>>(r_allocated.begin(), r_allocated.end())
                       : apply_shift(r_allocated, cfg, shift);
    return out;
}

FrameSetPair build_frameset(const std::vector<RxFrame>& frames, const AllocatedSpectrum& x_a,
                            const SoundingConfig& cfg, const EstimatorOptions& opts) {
    if (frames.empty())
        throw ConfigError("build_frameset: no frames");

    const std::size_t f_count = frames.size();
    const double carrier = frames.front().carrier_hz;
    std::vector<std::vector<std::complex<double>>> responses(f_count);
    std::vector<std::complex<double>> mean_r(cfg.n_on, {0.0, 0.0});
    for (std::size_t f = 0; f < f_count; ++f) {
        if (frames[f].samples.size() != cfg.fft_size)
            throw ConfigError("build_frameset: frame length does not match fft_size");
        if (frames[f].carrier_hz != carrier)
            throw ConfigError("build_frameset: mixed carriers in one dataset");
        responses[f] = freq_divide(dft(frames[f].samples), x_a, cfg);
        for (std::size_t i = 0; i < cfg.n_on; ++i)
            mean_r[i] += responses[f][i];
    }
    for (auto& v : mean_r)
        v /= static_cast<double>(f_count);

    int shift = 0;
    if (opts.align)
        shift = align_first_path(mean_r, cfg, opts.align_beta).shift;

    FrameSetPair pair;
    for (FrameSet* fs : {&pair.a, &pair.b}) {
        fs->rows.resize(static_cast<Eigen::Index>(f_count), static_cast<Eigen::Index>(cfg.n_on));
        fs->carrier_hz = carrier;
        fs->fft_size = cfg.fft_size;
        fs->sample_rate_hz = cfg.sample_rate_hz;
        fs->align_shift = shift;
    }
    pair.a.antenna = "a";
    pair.b.antenna = "b";

    double leakage_sum = 0.0;
    std::vector<std::complex<double>> padded(cfg.fft_size, {0.0, 0.0});
    for (std::size_t f = 0; f < f_count; ++f) {
        auto r = shift != 0 ? apply_shift(responses[f], cfg, shift) : std::move(responses[f]);
        const auto split = separate_miso(r, cfg, carrier);
        leakage_sum += split.leakage;
        for (int which = 0; which < 2; ++which) {
            const auto& taps = which == 0 ? split.a.taps : split.b.taps;
            std::fill(padded.begin(), padded.end(), std::complex<double>{0.0, 0.0});
            std::copy(taps.begin(), taps.end(), padded.begin());
            const auto h = grid_to_allocated(dft(padded), cfg.n_on, cfg.fft_size);
            auto& fs = which == 0 ? pair.a : pair.b;
            for (std::size_t i = 0; i < cfg.n_on; ++i)
                fs.rows(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i)) = h[i];
        }
    }
    const double leakage = leakage_sum / static_cast<double>(f_count);
    for (FrameSet* fs : {&pair.a, &pair.b}) {
        fs->leakage = leakage;
        fs->leakage_warning = leakage > opts.leakage_warn_threshold;
    }
    return pair;
}

} // namespace mbcc
