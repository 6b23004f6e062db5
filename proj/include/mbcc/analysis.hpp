// Analysis products: classical CIR power-delay profiles vs the MUSIC
// pseudo-spectrum, multipath-count histograms, and P/N region reports
// contrasting target-on and target-off spectra.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbcc/estimator.hpp"
#include "mbcc/subspace.hpp"

namespace mbcc {

inline constexpr double kDbFloor = -120.0;

inline double power_db(double p) {
    const double v = p > 0.0 ? 10.0 * std::log10(p) : kDbFloor;
    return v < kDbFloor ? kDbFloor : v;
}

struct PdpTrace {
    std::vector<double> distance_m;
    std::vector<double> value_db;
};

// Per-bin squared magnitude in dB (floored at -120 dB) on the distance axis
// n * c / B. Errors on an all-zero CIR.
PdpTrace cir_pdp(const CirEstimate& cir, double sample_rate_hz);

// CIR-PDP of the frame-mean response of a FrameSet (the classical trace the
// MUSIC spectrum is compared against).
PdpTrace frameset_cir_pdp(const FrameSet& fs);

PdpTrace music_pdp_trace(const MusicResult& res, double origin_delay_s = 0.0);

struct PdpPair {
    PdpTrace cir;
    PdpTrace music;
    std::vector<double> peak_markers_m;
};

struct RegionInterval {
    double start_m = 0.0;
    double end_m = 0.0;
    double delta_db = 0.0; // mean dB difference (with - without) over the interval
};

struct RegionReport {
    std::vector<RegionInterval> p_regions; // with-target exceeds without by >= gamma
    std::vector<RegionInterval> n_regions; // without exceeds with by >= gamma
};

// Pointwise dB comparison of two spectra on identical grids; flagged points
// within merge_width_m of each other merge into one interval. Distances are
// relative to origin_delay_s (the caller's first-arriving-path reference).
RegionReport pn_regions(const MusicResult& with_target, const MusicResult& without_target,
                        double gamma_db = 6.0, double merge_width_m = 0.3,
                        double origin_delay_s = 0.0);

struct HistogramGroup {
    double carrier_hz = 0.0;
    std::string orientation;
    bool target = false;

    bool operator==(const HistogramGroup& o) const = default;
    bool operator<(const HistogramGroup& o) const {
        if (carrier_hz != o.carrier_hz)
            return carrier_hz < o.carrier_hz;
        if (orientation != o.orientation)
            return orientation < o.orientation;
        return target < o.target;
    }
};

struct MultipathHistogram {
    // L-hat -> occurrence count, per (carrier, orientation, target) group.
    std::map<HistogramGroup, std::map<std::size_t, std::size_t>> counts;

    // Histogram mode per group; ties resolve to the smallest order.
    std::map<HistogramGroup, std::size_t> modes() const;
    std::size_t total() const;
};

MultipathHistogram multipath_histogram(const std::vector<MusicResult>& results);

} // namespace mbcc
