#include "mbcc/analysis.hpp"

#include <cmath>

#include "mbcc/errors.hpp"
#include "mbcc/fft.hpp"

namespace mbcc {
namespace {

struct FlaggedRun {
    std::size_t first = 0;
    std::size_t last = 0;
};

std::vector<RegionInterval> collect_intervals(const std::vector<double>& diff_db,
                                              const std::vector<bool>& flagged,
                                              const std::vector<double>& dist_m,
                                              double merge_width_m) {
    std::vector<FlaggedRun> runs;
    std::size_t i = 0;
    while (i < flagged.size()) {
        if (!flagged[i]) {
            ++i;
            continue;
        }
        FlaggedRun run{i, i};
        while (run.last + 1 < flagged.size() && flagged[run.last + 1])
            ++run.last;
        runs.push_back(run);
        i = run.last + 1;
    }
    std::vector<FlaggedRun> merged;
    for (const auto& run : runs) {
        if (!merged.empty() && dist_m[run.first] - dist_m[merged.back().last] <= merge_width_m)
            merged.back().last = run.last;
        else
            merged.push_back(run);
    }
    std::vector<RegionInterval> out;
    for (const auto& run : merged) {
        RegionInterval iv;
        iv.start_m = dist_m[run.first];
        iv.end_m = dist_m[run.last];
        double acc = 0.0;
        for (std::size_t j = run.first; j <= run.last; ++j)
            acc += diff_db[j];
        iv.delta_db = acc / static_cast<double>(run.last - run.first + 1);
        out.push_back(iv);
    }
    return out;
}

} // namespace

PdpTrace cir_pdp(const CirEstimate& cir, double sample_rate_hz) {
    if (sample_rate_hz <= 0.0)
        throw ConfigError("cir_pdp: invalid sample rate");
    bool any = false;
    for (const auto& v : cir.taps)
        if (v != std::complex<double>{0.0, 0.0})
            any = true;
    if (!any)
        throw ConfigError("cir_pdp: all-zero CIR");

    const double bin_m = kSpeedOfLight / sample_rate_hz;
    PdpTrace trace;
    trace.distance_m.resize(cir.taps.size());
    trace.value_db.resize(cir.taps.size());
    for (std::size_t n = 0; n < cir.taps.size(); ++n) {
        trace.distance_m[n] = static_cast<double>(n) * bin_m;
        trace.value_db[n] = power_db(std::norm(cir.taps[n]));
    }
    return trace;
}

PdpTrace frameset_cir_pdp(const FrameSet& fs) {
    const Eigen::VectorXcd mean = fs.mean_response();
    std::vector<std::complex<double>> alloc(mean.data(), mean.data() + mean.size());
    const auto r = idft(allocated_to_grid(alloc, fs.n_on(), fs.fft_size));
    CirEstimate cir;
    cir.carrier_hz = fs.carrier_hz;
    cir.taps.assign(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(fs.fft_size / 4));
    return cir_pdp(cir, fs.sample_rate_hz);
}

PdpTrace music_pdp_trace(const MusicResult& res, double origin_delay_s) {
    PdpTrace trace;
    trace.distance_m.resize(res.grid_s.size());
    trace.value_db.resize(res.grid_s.size());
    for (std::size_t i = 0; i < res.grid_s.size(); ++i) {
        trace.distance_m[i] = (res.grid_s[i] - origin_delay_s) * kSpeedOfLight;
        trace.value_db[i] = power_db(res.spectrum[i]);
    }
    return trace;
}

RegionReport pn_regions(const MusicResult& with_target, const MusicResult& without_target,
                        double gamma_db, double merge_width_m, double origin_delay_s) {
    if (with_target.grid_s.size() != without_target.grid_s.size())
        throw ConfigError("pn_regions: spectra are on different grids");
    for (std::size_t i = 0; i < with_target.grid_s.size(); ++i)
        if (with_target.grid_s[i] != without_target.grid_s[i])
            throw ConfigError("pn_regions: spectra are on different grids");
    if (gamma_db <= 0.0)
        throw ConfigError("pn_regions: gamma must be positive");

    const std::size_t n = with_target.grid_s.size();
    std::vector<double> diff(n), dist(n);
    std::vector<bool> p_mask(n), n_mask(n);
    for (std::size_t i = 0; i < n; ++i) {
        diff[i] = power_db(with_target.spectrum[i]) - power_db(without_target.spectrum[i]);
        dist[i] = (with_target.grid_s[i] - origin_delay_s) * kSpeedOfLight;
        p_mask[i] = diff[i] >= gamma_db;
        n_mask[i] = diff[i] <= -gamma_db;
    }
    RegionReport report;
    report.p_regions = collect_intervals(diff, p_mask, dist, merge_width_m);
    report.n_regions = collect_intervals(diff, n_mask, dist, merge_width_m);
    return report;
}

std::map<HistogramGroup, std::size_t> MultipathHistogram::modes() const {
    std::map<HistogramGroup, std::size_t> out;
    for (const auto& [group, hist] : counts) {
        std::size_t mode = 0;
        std::size_t best = 0;
        for (const auto& [order, count] : hist) {
            if (count > best) { // map iterates ascending: ties keep the smaller order
                best = count;
                mode = order;
            }
        }
        out[group] = mode;
    }
    return out;
}

std::size_t MultipathHistogram::total() const {
    std::size_t n = 0;
    for (const auto& [group, hist] : counts)
        for (const auto& [order, count] : hist)
            n += count;
    return n;
}

MultipathHistogram multipath_histogram(const std::vector<MusicResult>& results) {
    if (results.empty())
        throw ConfigError("multipath_histogram: empty result list");
    MultipathHistogram hist;
    for (const auto& res : results) {
        HistogramGroup g;
        g.carrier_hz = res.carrier_hz;
        g.orientation = res.orientation;
        g.target = res.target;
        ++hist.counts[g][res.order];
    }
    return hist;
}

} // namespace mbcc
