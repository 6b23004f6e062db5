// pybind11 bindings for the core operations: sounding sequences, channel
// simulation, MISO estimation, the smoothed-MUSIC chain, clustering, and
// the P/N region analysis. Matrices cross the boundary as numpy arrays.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mbcc/analysis.hpp"
#include "mbcc/channel.hpp"
#include "mbcc/clustering.hpp"
#include "mbcc/errors.hpp"
#include "mbcc/estimator.hpp"
#include "mbcc/pipeline.hpp"
#include "mbcc/sounding.hpp"
#include "mbcc/subspace.hpp"

namespace py = pybind11;
using namespace mbcc;

namespace {

std::vector<std::complex<double>> to_vector(const py::array_t<std::complex<double>>& arr) {
    auto buf = arr.unchecked<1>();
    std::vector<std::complex<double>> v(static_cast<std::size_t>(buf.shape(0)));
    for (py::ssize_t i = 0; i < buf.shape(0); ++i)
        v[static_cast<std::size_t>(i)] = buf(i);
    return v;
}

py::array_t<std::complex<double>> to_array(const std::vector<std::complex<double>>& v) {
    py::array_t<std::complex<double>> arr(static_cast<py::ssize_t>(v.size()));
    auto buf = arr.mutable_unchecked<1>();
    for (std::size_t i = 0; i < v.size(); ++i)
        buf(static_cast<py::ssize_t>(i)) = v[i];
    return arr;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-band channel characterization core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<SoundingConfig>(m, "SoundingConfig")
        .def(py::init<>())
        .def_readwrite("fft_size", &SoundingConfig::fft_size)
        .def_readwrite("n_on", &SoundingConfig::n_on)
        .def_readwrite("sample_rate_hz", &SoundingConfig::sample_rate_hz)
        .def_readwrite("carriers_hz", &SoundingConfig::carriers_hz)
        .def_readwrite("frames", &SoundingConfig::frames)
        .def_readwrite("hw_averages", &SoundingConfig::hw_averages)
        .def_readwrite("snr_db", &SoundingConfig::snr_db)
        .def("validate", &SoundingConfig::validate)
        .def("occupied_bandwidth_hz", &SoundingConfig::occupied_bandwidth_hz)
        .def("bin_spacing_hz", &SoundingConfig::bin_spacing_hz);

    m.def("subcarrier_indices", &subcarrier_indices, py::arg("n_on"));

    m.def(
        "gen_qpsk",
        [](std::uint64_t seed, std::size_t n_on) { return to_array(gen_qpsk(seed, n_on).values); },
        py::arg("seed"), py::arg("n_on"));

    m.def(
        "derive_orthogonal",
        [](const py::array_t<std::complex<double>>& x) {
            AllocatedSpectrum s{to_vector(x)};
            return to_array(derive_orthogonal(s).values);
        },
        py::arg("x_a"));

    m.def(
        "to_time",
        [](const py::array_t<std::complex<double>>& x, const SoundingConfig& cfg) {
            AllocatedSpectrum s{to_vector(x)};
            return to_array(to_time(s, cfg).samples);
        },
        py::arg("x"), py::arg("cfg"));

    py::class_<Tap>(m, "Tap")
        .def(py::init([](double delay_s, const std::vector<std::complex<double>>& gains) {
                 return Tap{delay_s, gains};
             }),
             py::arg("delay_s"), py::arg("gains"))
        .def_readwrite("delay_s", &Tap::delay_s)
        .def_readwrite("gains", &Tap::gains);

    py::class_<MultipathChannel>(m, "MultipathChannel")
        .def(py::init([](const std::vector<double>& carriers, const std::vector<Tap>& taps_a,
                         const std::vector<Tap>& taps_b) {
                 MultipathChannel ch;
                 ch.carriers_hz = carriers;
                 ch.a.taps = taps_a;
                 ch.b.taps = taps_b;
                 return ch;
             }),
             py::arg("carriers_hz"), py::arg("taps_a"), py::arg("taps_b") = std::vector<Tap>{})
        .def_property_readonly("taps_a",
                               [](const MultipathChannel& ch) { return ch.a.taps; })
        .def_property_readonly("taps_b",
                               [](const MultipathChannel& ch) { return ch.b.taps; });

    m.def(
        "antenna_response",
        [](const MultipathChannel& ch, const std::string& antenna, std::size_t carrier_idx,
           const SoundingConfig& cfg) {
            return to_array(antenna_response(antenna == "a" ? ch.a : ch.b, carrier_idx, cfg));
        },
        py::arg("channel"), py::arg("antenna"), py::arg("carrier_idx"), py::arg("cfg"));

    m.def(
        "synthesize_rx",
        [](const MultipathChannel& ch, const py::array_t<std::complex<double>>& xa,
           const py::array_t<std::complex<double>>& xb, const SoundingConfig& cfg,
           std::size_t carrier_idx, std::uint64_t seed) {
            AllocatedSpectrum a{to_vector(xa)}, b{to_vector(xb)};
            const auto frames = synthesize_rx(ch, a, b, cfg, carrier_idx, seed);
            py::list out;
            for (const auto& f : frames)
                out.append(to_array(f.samples));
            return out;
        },
        py::arg("channel"), py::arg("x_a"), py::arg("x_b"), py::arg("cfg"),
        py::arg("carrier_idx"), py::arg("seed"));

    m.def(
        "synthesize_frameset",
        [](const MultipathChannel& ch, const SoundingConfig& cfg, std::size_t carrier_idx,
           const std::string& antenna, std::uint64_t seed) {
            return synthesize_frameset(ch, cfg, carrier_idx, antenna, seed);
        },
        py::arg("channel"), py::arg("cfg"), py::arg("carrier_idx"), py::arg("antenna"),
        py::arg("seed"));

    py::class_<FrameSet>(m, "FrameSet")
        .def(py::init([](const Eigen::MatrixXcd& rows, double carrier_hz, std::size_t fft_size,
                         double sample_rate_hz, const std::string& antenna) {
                 FrameSet fs;
                 fs.rows = rows;
                 fs.carrier_hz = carrier_hz;
                 fs.fft_size = fft_size;
                 fs.sample_rate_hz = sample_rate_hz;
                 fs.antenna = antenna;
                 return fs;
             }),
             py::arg("rows"), py::arg("carrier_hz"), py::arg("fft_size"),
             py::arg("sample_rate_hz"), py::arg("antenna") = "a")
        .def_property_readonly("rows", [](const FrameSet& fs) { return fs.rows; })
        .def_readonly("carrier_hz", &FrameSet::carrier_hz)
        .def_readonly("leakage", &FrameSet::leakage)
        .def_readonly("leakage_warning", &FrameSet::leakage_warning)
        .def_readonly("align_shift", &FrameSet::align_shift)
        .def("mean_response", &FrameSet::mean_response);

    m.def(
        "build_frameset",
        [](const std::vector<py::array_t<std::complex<double>>>& frames,
           const py::array_t<std::complex<double>>& xa, const SoundingConfig& cfg,
           double carrier_hz) {
            std::vector<RxFrame> rx(frames.size());
            for (std::size_t i = 0; i < frames.size(); ++i) {
                rx[i].samples = to_vector(frames[i]);
                rx[i].carrier_hz = carrier_hz;
            }
            AllocatedSpectrum a{to_vector(xa)};
            auto pair = build_frameset(rx, a, cfg);
            return py::make_tuple(pair.a, pair.b);
        },
        py::arg("frames"), py::arg("x_a"), py::arg("cfg"), py::arg("carrier_hz") = 0.0);

    py::class_<CovarianceEstimate>(m, "CovarianceEstimate")
        .def_property_readonly("matrix",
                               [](const CovarianceEstimate& c) { return c.matrix; })
        .def_readonly("sample_count", &CovarianceEstimate::sample_count)
        .def_readonly("smoothed", &CovarianceEstimate::smoothed)
        .def_readonly("subarray_len", &CovarianceEstimate::subarray_len);

    m.def("sample_covariance", &sample_covariance, py::arg("frameset"));
    m.def("freq_smooth", &freq_smooth, py::arg("frameset"), py::arg("n_sub"));
    m.def(
        "covariance_eigenvalues",
        [](const CovarianceEstimate& cov) { return covariance_eigenvalues(cov); },
        py::arg("cov"));
    m.def(
        "elbow_order",
        [](const Eigen::VectorXd& lam, std::size_t l_max, double tol_db) {
            return elbow_order(lam, l_max, tol_db);
        },
        py::arg("eigenvalues"), py::arg("l_max"), py::arg("tol_db") = 1.0);
    m.def("make_delay_grid", &make_delay_grid, py::arg("cfg"), py::arg("oversample") = 16);

    py::class_<MusicResult>(m, "MusicResult")
        .def_readonly("grid_s", &MusicResult::grid_s)
        .def_readonly("spectrum", &MusicResult::spectrum)
        .def_readonly("order", &MusicResult::order)
        .def_readonly("peaks_s", &MusicResult::peaks_s)
        .def_readonly("peak_shortfall", &MusicResult::peak_shortfall)
        .def_readonly("gains", &MusicResult::gains)
        .def_readonly("gain_residual", &MusicResult::gain_residual);

    m.def(
        "music_spectrum",
        [](const CovarianceEstimate& cov, std::size_t order, const std::vector<double>& grid) {
            return music_spectrum(cov, order, grid);
        },
        py::arg("cov"), py::arg("order"), py::arg("grid"));
    m.def(
        "pick_peaks",
        [](const std::vector<double>& grid, const std::vector<double>& spectrum,
           std::size_t count) {
            const PeakPick p = pick_peaks(grid, spectrum, count);
            return py::make_tuple(p.delays_s, p.shortfall);
        },
        py::arg("grid"), py::arg("spectrum"), py::arg("count"));
    m.def(
        "estimate_gains",
        [](const FrameSet& fs, const std::vector<double>& delays) {
            const GainFit fit = estimate_gains(fs, delays);
            return py::make_tuple(fit.gains, fit.residual_norm, fit.ill_conditioned);
        },
        py::arg("frameset"), py::arg("delays_s"));

    py::class_<MusicParams>(m, "MusicParams")
        .def(py::init<>())
        .def_readwrite("n_sub", &MusicParams::n_sub)
        .def_readwrite("l_max", &MusicParams::l_max)
        .def_readwrite("oversample", &MusicParams::oversample)
        .def_readwrite("elbow_tol_db", &MusicParams::elbow_tol_db)
        .def_readwrite("force_order", &MusicParams::force_order);

    m.def("run_music", &run_music, py::arg("frameset"), py::arg("params") = MusicParams{});

    py::class_<DelayClustering>(m, "DelayClustering")
        .def_readonly("k", &DelayClustering::k)
        .def_readonly("centroids_s", &DelayClustering::centroids_s)
        .def_readonly("assignments", &DelayClustering::assignments)
        .def_readonly("wcss", &DelayClustering::wcss)
        .def_readonly("mean_silhouette", &DelayClustering::mean_silhouette)
        .def_readonly("flagged", &DelayClustering::flagged);

    m.def(
        "relative_delays",
        [](const std::vector<std::vector<double>>& peak_sets) {
            std::size_t skipped = 0;
            auto out = relative_delays(peak_sets, &skipped);
            return py::make_tuple(out, skipped);
        },
        py::arg("peak_sets"));
    m.def(
        "kmeans_1d",
        [](const std::vector<double>& samples, std::size_t k, std::uint64_t seed) {
            return kmeans_1d(samples, k, seed);
        },
        py::arg("samples"), py::arg("k"), py::arg("seed") = 0);
    m.def(
        "silhouette",
        [](const DelayClustering& c, const std::vector<double>& samples) {
            return silhouette(c, samples);
        },
        py::arg("clustering"), py::arg("samples"));
    m.def(
        "select_k",
        [](const std::vector<double>& samples, std::size_t k_max, std::uint64_t seed) {
            return select_k(samples, k_max, seed);
        },
        py::arg("samples"), py::arg("k_max") = 8, py::arg("seed") = 0);

    py::class_<RegionInterval>(m, "RegionInterval")
        .def_readonly("start_m", &RegionInterval::start_m)
        .def_readonly("end_m", &RegionInterval::end_m)
        .def_readonly("delta_db", &RegionInterval::delta_db);

    py::class_<RegionReport>(m, "RegionReport")
        .def_readonly("p_regions", &RegionReport::p_regions)
        .def_readonly("n_regions", &RegionReport::n_regions);

    m.def("pn_regions", &pn_regions, py::arg("with_target"), py::arg("without_target"),
          py::arg("gamma_db") = 6.0, py::arg("merge_width_m") = 0.3,
          py::arg("origin_delay_s") = 0.0);

    m.def(
        "frameset_cir_pdp",
        [](const FrameSet& fs) {
            const PdpTrace t = frameset_cir_pdp(fs);
            return py::make_tuple(t.distance_m, t.value_db);
        },
        py::arg("frameset"));

    m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;
    m.attr("SOUNDING_SEED") = kSoundingSeed;
}
