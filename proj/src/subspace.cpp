#include "mbcc/subspace.hpp"

#include <algorithm>
#include <cmath>

#include "mbcc/errors.hpp"

namespace mbcc {
namespace {

void copy_labels(const FrameSet& fs, MusicResult& r) {
    r.carrier_hz = fs.carrier_hz;
    r.antenna = fs.antenna;
    r.placement = fs.placement;
    r.orientation = fs.orientation;
    r.target = fs.target;
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) {
    return 0.5 * (m + m.adjoint());
}

} // namespace

CovarianceEstimate sample_covariance(const FrameSet& fs) {
    if (fs.frame_count() == 0)
        throw ConfigError("sample_covariance: empty FrameSet");
    const auto f = static_cast<double>(fs.frame_count());
    CovarianceEstimate cov;
    // rows is F x n, so rows^T rows* accumulates sum_f H_f H_f^H.
    cov.matrix = hermitize((fs.rows.transpose() * fs.rows.conjugate()) / f);
    cov.sample_count = fs.frame_count();
    cov.smoothed = false;
    cov.subarray_len = fs.n_on();
    cov.bin_spacing_hz =
        fs.sample_rate_hz / static_cast<double>(fs.fft_size ? fs.fft_size : 1);
    return cov;
}

CovarianceEstimate freq_smooth(const FrameSet& fs, std::size_t n_sub) {
    const std::size_t n_on = fs.n_on();
    if (n_sub < 1 || n_sub > n_on)
        throw ConfigError("freq_smooth: subarray length must be in [1, n_on]");
    const CovarianceEstimate full = sample_covariance(fs);
    const std::size_t m_count = n_on - n_sub + 1;

    // Averaging the covariances of all length-n_sub windows equals averaging
    // the diagonal blocks of the full covariance.
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_sub),
                                                  static_cast<Eigen::Index>(n_sub));
    for (std::size_t m = 0; m < m_count; ++m)
        acc += full.matrix.block(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m),
                                 static_cast<Eigen::Index>(n_sub),
                                 static_cast<Eigen::Index>(n_sub));
    CovarianceEstimate cov;
    cov.matrix = hermitize(acc / static_cast<double>(m_count));
    cov.sample_count = fs.frame_count() * m_count;
    cov.smoothed = true;
    cov.subarray_len = n_sub;
    cov.bin_spacing_hz = full.bin_spacing_hz;
    return cov;
}

EigenSplit eigen_split(const CovarianceEstimate& cov, std::size_t order) {
    const auto n = static_cast<std::size_t>(cov.matrix.rows());
    if (order >= n)
        throw ConfigError("eigen_split: order must be below the covariance dimension");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(cov.matrix);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigen_split: eigendecomposition failed");

    // Solver returns ascending order; flip to descending and clamp tiny
    // negative roundoff.
    EigenSplit split;
    split.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
    const Eigen::MatrixXcd vecs = solver.eigenvectors().rowwise().reverse();
    split.signal_basis = vecs.leftCols(static_cast<Eigen::Index>(order));
    split.noise_basis = vecs.rightCols(static_cast<Eigen::Index>(n - order));
    return split;
}

Eigen::VectorXd covariance_eigenvalues(const CovarianceEstimate& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(cov.matrix,
                                                           Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericalError("covariance_eigenvalues: eigendecomposition failed");
    return solver.eigenvalues().reverse().cwiseMax(0.0);
}

std::size_t elbow_order(const Eigen::VectorXd& eigenvalues_desc, std::size_t l_max,
                        double tol_db) {
    const auto n = static_cast<std::size_t>(eigenvalues_desc.size());
    if (n < 3)
        throw ConfigError("elbow_order: need at least 3 eigenvalues");
    if (l_max < 1 || l_max > n - 2)
        throw ConfigError("elbow_order: l_max must be in [1, len - 2]");

    // dB scale with a floor relative to the largest eigenvalue, so the
    // selection is invariant to positive scaling.
    const double top = std::max(eigenvalues_desc[0], 0.0);
    const double floor = top > 0.0 ? top * 1e-30 : 1e-300;
    std::vector<double> ldb(n);
    for (std::size_t i = 0; i < n; ++i)
        ldb[i] = 10.0 * std::log10(std::max(eigenvalues_desc[static_cast<Eigen::Index>(i)], floor));

    std::size_t best = 0;
    double best_curv = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l_max; ++i) {
        const double curv = ldb[i] - 2.0 * ldb[i + 1] + ldb[i + 2];
        if (curv > best_curv) {
            best_curv = curv;
            best = i;
        }
    }
    if (best_curv < tol_db)
        return 1;
    return best + 1;
}

std::vector<double> make_delay_grid(const SoundingConfig& cfg, std::size_t oversample) {
    if (oversample == 0)
        throw ConfigError("make_delay_grid: oversample must be positive");
    const std::size_t count = cfg.window_len() * oversample;
    const double step = 1.0 / (cfg.sample_rate_hz * static_cast<double>(oversample));
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = static_cast<double>(i) * step;
    return grid;
}

MusicResult music_spectrum(const CovarianceEstimate& cov, std::size_t order,
                           std::span<const double> grid) {
    if (!cov.smoothed)
        throw ConfigError("music_spectrum: covariance must be frequency smoothed");
    const std::size_t n_sub = cov.subarray_len;
    if (order >= n_sub)
        throw ConfigError("music_spectrum: order must be below the subarray length");
    if (order == 0)
        throw ConfigError("music_spectrum: order must be at least 1");
    if (grid.empty())
        throw ConfigError("music_spectrum: empty delay grid");

    const EigenSplit split = eigen_split(cov, order);

    MusicResult res;
    res.grid_s.assign(grid.begin(), grid.end());
    res.spectrum.resize(grid.size());
    res.eigenvalues = split.eigenvalues;
    res.order = order;

    // With unit-norm steering and an orthonormal basis,
    // ||b^H U_noise||^2 = 1 - ||b^H U_signal||^2; the signal-side product is
    // much cheaper (order columns instead of n_sub - order).
    const double df = cov.bin_spacing_hz;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n_sub));
    Eigen::VectorXcd b(static_cast<Eigen::Index>(n_sub));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double w = -2.0 * M_PI * df * grid[g];
        for (std::size_t m = 0; m < n_sub; ++m) {
            const double phase = w * static_cast<double>(m);
            b[static_cast<Eigen::Index>(m)] =
                std::complex<double>(std::cos(phase), std::sin(phase)) * inv_sqrt;
        }
        const double sig = (split.signal_basis.adjoint() * b).squaredNorm();
        res.spectrum[g] = 1.0 / std::max(1.0 - sig, 1e-18);
    }
    return res;
}

PeakPick pick_peaks(std::span<const double> grid, std::span<const double> spectrum,
                    std::size_t count) {
    if (grid.size() != spectrum.size() || grid.empty())
        throw ConfigError("pick_peaks: grid/spectrum mismatch");
    if (count < 1)
        throw ConfigError("pick_peaks: count must be at least 1");

    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < spectrum.size(); ++i)
        if (spectrum[i] > spectrum[i - 1] && spectrum[i] > spectrum[i + 1])
            maxima.push_back(i);

    PeakPick pick;
    if (maxima.empty()) {
        // Monotone spectrum: report the global maximum, flagged.
        const auto it = std::max_element(spectrum.begin(), spectrum.end());
        pick.delays_s.push_back(grid[static_cast<std::size_t>(it - spectrum.begin())]);
        pick.shortfall = true;
        return pick;
    }

    std::sort(maxima.begin(), maxima.end(),
              [&](std::size_t x, std::size_t y) { return spectrum[x] > spectrum[y]; });
    if (maxima.size() > count)
        maxima.resize(count);
    else
        pick.shortfall = maxima.size() < count;
    std::sort(maxima.begin(), maxima.end());

    for (const std::size_t i : maxima) {
        const double y0 = spectrum[i - 1];
        const double y1 = spectrum[i];
        const double y2 = spectrum[i + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        double offset = 0.0;
        if (denom < 0.0)
            offset = 0.5 * (y0 - y2) / denom;
        offset = std::clamp(offset, -0.5, 0.5);
        const double step = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
        pick.delays_s.push_back(grid[i] + offset * step);
    }
    return pick;
}

GainFit estimate_gains(const FrameSet& fs, std::span<const double> delays_s) {
    const std::size_t l = delays_s.size();
    if (l == 0)
        throw ConfigError("estimate_gains: no delays supplied");
    if (l >= fs.n_on())
        throw ConfigError("estimate_gains: more delays than carriers");
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = i + 1; j < l; ++j)
            if (delays_s[i] == delays_s[j])
                throw ConfigError("estimate_gains: duplicate delays");

    const auto ks = subcarrier_indices(fs.n_on());
    const double df = fs.sample_rate_hz / static_cast<double>(fs.fft_size);
    Eigen::MatrixXcd steering(static_cast<Eigen::Index>(fs.n_on()), static_cast<Eigen::Index>(l));
    for (std::size_t i = 0; i < fs.n_on(); ++i)
        for (std::size_t j = 0; j < l; ++j) {
            const double phase = -2.0 * M_PI * ks[i] * df * delays_s[j];
            steering(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::complex<double>(std::cos(phase), std::sin(phase));
        }

    const Eigen::VectorXcd h = fs.mean_response();

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(steering);
    const auto& sv = svd.singularValues();
    const double s_min = sv[sv.size() - 1];
    GainFit fit;
    fit.condition = s_min > 0.0 ? sv[0] / s_min : std::numeric_limits<double>::infinity();
    fit.ill_conditioned = fit.condition > 1e8;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(steering);
    const Eigen::VectorXcd alpha = cod.solve(h);
    fit.residual_norm = (steering * alpha - h).norm();
    fit.gains.assign(alpha.data(), alpha.data() + alpha.size());
    return fit;
}

MusicResult run_music(const FrameSet& fs, const MusicParams& params) {
    const std::size_t n_sub =
        params.n_sub > 0 ? params.n_sub : (fs.n_on() + 1) / 2;
    const CovarianceEstimate cov = freq_smooth(fs, n_sub);
    const Eigen::VectorXd lam = covariance_eigenvalues(cov);

    std::size_t order = params.force_order;
    if (order == 0) {
        const std::size_t l_max =
            std::min(params.l_max, static_cast<std::size_t>(lam.size()) - 2);
        order = elbow_order(lam, l_max, params.elbow_tol_db);
    }
    order = std::min(order, n_sub - 1);

    SoundingConfig grid_cfg;
    grid_cfg.fft_size = fs.fft_size;
    grid_cfg.sample_rate_hz = fs.sample_rate_hz;
    const auto grid = make_delay_grid(grid_cfg, params.oversample);

    MusicResult res = music_spectrum(cov, order, grid);
    const PeakPick pick = pick_peaks(res.grid_s, res.spectrum, order);
    res.peaks_s = pick.delays_s;
    res.peak_shortfall = pick.shortfall;

    if (!res.peaks_s.empty()) {
        const GainFit fit = estimate_gains(fs, res.peaks_s);
        res.gains = fit.gains;
        res.gain_residual = fit.residual_norm;
        res.gain_ill_conditioned = fit.ill_conditioned;
    }
    copy_labels(fs, res);
    return res;
}

} // namespace mbcc
