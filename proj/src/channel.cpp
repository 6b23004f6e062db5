#include "mbcc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbcc/errors.hpp"
#include "mbcc/fft.hpp"
#include "mbcc/rng.hpp"

namespace mbcc {
namespace {

void validate_antenna(const AntennaChannel& ant, const SoundingConfig& cfg, const char* name) {
    const double max_delay =
        static_cast<double>(cfg.window_len()) / cfg.sample_rate_hz;
    double prev = -1.0;
    for (const auto& tap : ant.taps) {
        if (tap.delay_s < 0.0)
            throw ConfigError(std::string("channel ") + name + ": negative tap delay");
        if (tap.delay_s < prev)
            throw ConfigError(std::string("channel ") + name + ": delays not sorted");
        if (tap.delay_s >= max_delay)
            throw ConfigError(std::string("channel ") + name +
                              ": tap delay exceeds the N/4 estimation window");
        prev = tap.delay_s;
    }
    // First-arrival alignment (tau_0 < 1/B) is a convention enforced by
    // sample_channel and restored by align_first_path, not a hard bound:
    // hand-built channels and target overlays may start later.
}

void block_tap(AntennaChannel& ant, std::size_t index, double factor, const char* name) {
    if (index >= ant.taps.size())
        throw ConfigError(std::string("apply_target: blocked tap index out of range for antenna ") +
                          name);
    for (auto& g : ant.taps[index].gains)
        g *= factor;
}

void add_path(AntennaChannel& ant, const AddedPath& p) {
    Tap tap;
    tap.delay_s = p.delay_s;
    tap.gains = p.gains;
    ant.taps.push_back(std::move(tap));
}

void sort_taps(AntennaChannel& ant) {
    std::stable_sort(ant.taps.begin(), ant.taps.end(),
                     [](const Tap& x, const Tap& y) { return x.delay_s < y.delay_s; });
}

AntennaChannel draw_antenna(const ChannelSpec& spec, const SoundingConfig& cfg, Rng& rng,
                            std::size_t n_carriers) {
    const std::size_t count =
        spec.l_min + static_cast<std::size_t>(rng.uniform_index(spec.l_max - spec.l_min + 1));
    AntennaChannel ant;
    ant.taps.resize(count);

    // First arrival inside one sample period, the rest inside the spread with
    // the requested minimum separation (rejection sampling).
    const double t_sample = 1.0 / cfg.sample_rate_hz;
    std::vector<double> delays;
    delays.push_back(rng.uniform(0.0, t_sample));
    int guard = 0;
    while (delays.size() < count) {
        const double cand = rng.uniform(0.0, spec.delay_spread_s);
        bool ok = true;
        for (double d : delays)
            if (std::abs(cand - d) < spec.min_spacing_s)
                ok = false;
        if (ok)
            delays.push_back(cand);
        else if (++guard > 100000)
            throw ConfigError("sample_channel: cannot satisfy min_spacing_s within delay spread");
    }
    std::sort(delays.begin(), delays.end());

    for (std::size_t l = 0; l < count; ++l) {
        auto& tap = ant.taps[l];
        tap.delay_s = delays[l];
        const double power =
            spec.decay_s > 0.0 ? std::exp(-delays[l] / spec.decay_s) : 1.0;
        const double amp = std::sqrt(power);
        const auto shared = rng.gauss_complex();
        tap.gains.resize(n_carriers);
        const double rho = spec.rho;
        const double indep = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        for (std::size_t c = 0; c < n_carriers; ++c)
            tap.gains[c] = amp * (rho * shared + indep * rng.gauss_complex());
    }
    return ant;
}

} // namespace

void MultipathChannel::validate(const SoundingConfig& cfg) const {
    if (carriers_hz.size() != cfg.carriers_hz.size())
        throw ConfigError("channel carrier list does not match config");
    validate_antenna(a, cfg, "a");
    validate_antenna(b, cfg, "b");
    for (const auto* ant : {&a, &b})
        for (const auto& tap : ant->taps)
            if (tap.gains.size() != carriers_hz.size())
                throw ConfigError("tap gain count does not match carrier count");
}

MultipathChannel sample_channel(const ChannelSpec& spec, const SoundingConfig& cfg,
                                std::uint64_t seed) {
    if (spec.l_min < 1 || spec.l_max < spec.l_min)
        throw ConfigError("sample_channel: invalid tap count range");
    const double window_s = static_cast<double>(cfg.window_len()) / cfg.sample_rate_hz;
    if (spec.delay_spread_s >= window_s)
        throw ConfigError("sample_channel: delay spread exceeds the N/4 estimation window");
    if (spec.rho < 0.0 || spec.rho > 1.0)
        throw ConfigError("sample_channel: rho must be in [0, 1]");

    MultipathChannel ch;
    ch.carriers_hz = cfg.carriers_hz;
    Rng rng_a(derive_seed(seed, 0xA));
    Rng rng_b(derive_seed(seed, 0xB));
    ch.a = draw_antenna(spec, cfg, rng_a, cfg.carriers_hz.size());
    ch.b = draw_antenna(spec, cfg, rng_b, cfg.carriers_hz.size());
    return ch;
}

MultipathChannel apply_target(const MultipathChannel& ch, const TargetOverlay& overlay) {
    MultipathChannel out = ch;
    for (const auto& blk : overlay.blocked) {
        if (blk.factor < 0.0 || blk.factor > 1.0)
            throw ConfigError("apply_target: attenuation factor must be in [0, 1]");
        if (blk.antenna != AntennaSel::B)
            block_tap(out.a, blk.tap_index, blk.factor, "a");
        if (blk.antenna != AntennaSel::A)
            block_tap(out.b, blk.tap_index, blk.factor, "b");
    }
    for (const auto& p : overlay.added) {
        if (p.gains.size() != ch.carriers_hz.size())
            throw ConfigError("apply_target: added path gain count does not match carriers");
        if (p.antenna != AntennaSel::B)
            add_path(out.a, p);
        if (p.antenna != AntennaSel::A)
            add_path(out.b, p);
    }
    sort_taps(out.a);
    sort_taps(out.b);
    return out;
}

std::vector<std::complex<double>> antenna_response(const AntennaChannel& ant,
                                                   std::size_t carrier_idx,
                                                   const SoundingConfig& cfg) {
    const auto ks = subcarrier_indices(cfg.n_on);
    const double df = cfg.bin_spacing_hz();
    std::vector<std::complex<double>> h(cfg.n_on, {0.0, 0.0});
    for (const auto& tap : ant.taps) {
        if (carrier_idx >= tap.gains.size())
            throw ConfigError("antenna_response: carrier index out of range");
        const std::complex<double> g = tap.gains[carrier_idx];
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double phase = -2.0 * M_PI * ks[i] * df * tap.delay_s;
            h[i] += g * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return h;
}

std::vector<RxFrame> synthesize_rx(const MultipathChannel& ch, const AllocatedSpectrum& x_a,
                                   const AllocatedSpectrum& x_b, const SoundingConfig& cfg,
                                   std::size_t carrier_idx, std::uint64_t seed) {
    cfg.validate();
    ch.validate(cfg);
    if (x_a.size() != cfg.n_on || x_b.size() != cfg.n_on)
        throw ConfigError("synthesize_rx: sequence length does not match n_on");
    if (carrier_idx >= cfg.carriers_hz.size())
        throw ConfigError("synthesize_rx: carrier index out of range");

    const auto h_a = antenna_response(ch.a, carrier_idx, cfg);
    const auto h_b = antenna_response(ch.b, carrier_idx, cfg);

    std::vector<std::complex<double>> y0(cfg.n_on);
    double p_sig = 0.0;
    for (std::size_t i = 0; i < cfg.n_on; ++i) {
        y0[i] = x_a.values[i] * h_a[i] + x_b.values[i] * h_b[i];
        p_sig += std::norm(y0[i]);
    }
    p_sig /= static_cast<double>(cfg.n_on);

    double noise_var = 0.0;
    double true_snr = std::numeric_limits<double>::infinity();
    if (cfg.snr_db) {
        const double ref = p_sig > 0.0 ? p_sig : 1.0;
        noise_var = ref * std::pow(10.0, -*cfg.snr_db / 10.0);
        true_snr = p_sig > 0.0 ? *cfg.snr_db : -std::numeric_limits<double>::infinity();
    }

    Rng rng(derive_seed(seed, carrier_idx));
    std::vector<RxFrame> frames;
    frames.reserve(cfg.frames);
    std::vector<std::complex<double>> y(cfg.n_on);
    for (std::size_t f = 0; f < cfg.frames; ++f) {
        for (std::size_t i = 0; i < cfg.n_on; ++i) {
            std::complex<double> w{0.0, 0.0};
            if (noise_var > 0.0)
                w = std::sqrt(noise_var) * rng.gauss_complex();
            y[i] = y0[i] + w;
        }
        RxFrame frame;
        frame.carrier_hz = cfg.carriers_hz[carrier_idx];
        frame.true_snr_db = true_snr;
        frame.samples = idft(allocated_to_grid(y, cfg.n_on, cfg.fft_size));
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<RxFrame> hw_average(const std::vector<RxFrame>& frames, std::size_t m) {
    if (m == 0)
        throw ConfigError("hw_average: m must be at least 1");
    if (frames.empty() || frames.size() % m != 0)
        throw ConfigError("hw_average: frame count must be a positive multiple of m");
    std::vector<RxFrame> out;
    out.reserve(frames.size() / m);
    for (std::size_t g = 0; g < frames.size(); g += m) {
        RxFrame avg = frames[g];
        for (std::size_t j = 1; j < m; ++j) {
            const auto& f = frames[g + j];
            if (f.samples.size() != avg.samples.size() || f.carrier_hz != avg.carrier_hz)
                throw ConfigError("hw_average: inconsistent frames in group");
            for (std::size_t n = 0; n < avg.samples.size(); ++n)
                avg.samples[n] += f.samples[n];
        }
        const double scale = 1.0 / static_cast<double>(m);
        for (auto& v : avg.samples)
            v *= scale;
        avg.true_snr_db += 10.0 * std::log10(static_cast<double>(m));
        out.push_back(std::move(avg));
    }
    return out;
}

} // namespace mbcc
