#include "mbcc/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <set>

#include "mbcc/errors.hpp"
#include "mbcc/rng.hpp"

namespace mbcc {
namespace {

double assign_all(std::span<const double> samples, const std::vector<double>& centroids,
                  std::vector<int>& assignments) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double d = std::abs(samples[i] - centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        assignments[i] = best;
        wcss += best_d * best_d;
    }
    return wcss;
}

std::vector<double> seed_centroids(std::span<const double> samples, std::size_t k, Rng& rng) {
    std::vector<double> centroids;
    centroids.reserve(k);
    centroids.push_back(samples[rng.uniform_index(samples.size())]);
    std::vector<double> d2(samples.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centroids)
                best = std::min(best, std::abs(samples[i] - c));
            d2[i] = best * best;
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_index(samples.size());
        }
        centroids.push_back(samples[pick]);
    }
    return centroids;
}

DelayClustering lloyd(std::span<const double> samples, std::size_t k, Rng& rng) {
    DelayClustering out;
    out.k = k;
    out.centroids_s = seed_centroids(samples, k, rng);
    out.assignments.assign(samples.size(), -1);

    double prev_wcss = std::numeric_limits<double>::infinity();
    std::vector<int> prev = out.assignments;
    for (int iter = 0; iter < 200; ++iter) {
        const double wcss = assign_all(samples, out.centroids_s, out.assignments);
        assert(wcss <= prev_wcss * (1.0 + 1e-12));
        prev_wcss = wcss;
        out.wcss = wcss;
        if (out.assignments == prev)
            break;
        prev = out.assignments;

        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            sum[static_cast<std::size_t>(out.assignments[i])] += samples[i];
            ++count[static_cast<std::size_t>(out.assignments[i])];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (count[c] > 0)
                out.centroids_s[c] = sum[c] / static_cast<double>(count[c]);
    }
    // Final means + wcss so the invariant "centroids are member means" holds.
    out.wcss = assign_all(samples, out.centroids_s, out.assignments);
    return out;
}

} // namespace

std::vector<double> relative_delays(const std::vector<std::vector<double>>& peak_sets,
                                    std::size_t* skipped_frames) {
    std::vector<double> out;
    std::size_t skipped = 0;
    for (const auto& peaks : peak_sets) {
        if (peaks.empty()) {
            ++skipped;
            continue;
        }
        const double first = *std::min_element(peaks.begin(), peaks.end());
        for (double p : peaks)
            out.push_back(p - first);
    }
    if (skipped_frames)
        *skipped_frames = skipped;
    return out;
}

DelayClustering kmeans_1d(std::span<const double> samples, std::size_t k, std::uint64_t seed) {
    if (k < 1)
        throw ConfigError("kmeans_1d: k must be at least 1");
    const std::set<double> distinct(samples.begin(), samples.end());
    if (k > distinct.size())
        throw ConfigError("kmeans_1d: k exceeds the number of distinct samples");

    constexpr int kRestarts = 20;
    DelayClustering best;
    for (int r = 0; r < kRestarts; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        DelayClustering cand = lloyd(samples, k, rng);
        if (r == 0 || cand.wcss < best.wcss)
            best = std::move(cand);
    }
    if (k >= 2)
        best.mean_silhouette = silhouette(best, samples);
    return best;
}

double silhouette(const DelayClustering& clustering, std::span<const double> samples) {
    if (clustering.k < 2)
        throw ConfigError("silhouette: undefined for k < 2");
    if (clustering.assignments.size() != samples.size())
        throw ConfigError("silhouette: assignment/sample size mismatch");

    std::vector<std::size_t> count(clustering.k, 0);
    for (int a : clustering.assignments)
        ++count[static_cast<std::size_t>(a)];

    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto own = static_cast<std::size_t>(clustering.assignments[i]);
        if (count[own] <= 1) {
            continue; // singleton contributes 0
        }
        std::vector<double> dist_sum(clustering.k, 0.0);
        for (std::size_t j = 0; j < samples.size(); ++j) {
            if (j == i)
                continue;
            dist_sum[static_cast<std::size_t>(clustering.assignments[j])] +=
                std::abs(samples[i] - samples[j]);
        }
        const double intra = dist_sum[own] / static_cast<double>(count[own] - 1);
        double inter = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < clustering.k; ++c) {
            if (c == own || count[c] == 0)
                continue;
            inter = std::min(inter, dist_sum[c] / static_cast<double>(count[c]));
        }
        const double denom = std::max(intra, inter);
        if (denom > 0.0 && std::isfinite(inter))
            total += (inter - intra) / denom;
    }
    return total / static_cast<double>(samples.size());
}

DelayClustering select_k(std::span<const double> samples, std::size_t k_max, std::uint64_t seed) {
    const std::set<double> distinct(samples.begin(), samples.end());
    if (distinct.size() < 2) {
        DelayClustering out;
        out.k = 1;
        out.flagged = true;
        out.assignments.assign(samples.size(), 0);
        double mean = 0.0;
        for (double s : samples)
            mean += s;
        out.centroids_s = {samples.empty() ? 0.0 : mean / static_cast<double>(samples.size())};
        out.wcss = 0.0;
        for (double s : samples)
            out.wcss += (s - out.centroids_s[0]) * (s - out.centroids_s[0]);
        return out;
    }

    const std::size_t hi = std::min(k_max, distinct.size());
    DelayClustering best;
    bool have = false;
    for (std::size_t k = 2; k <= hi; ++k) {
        DelayClustering cand = kmeans_1d(samples, k, derive_seed(seed, k));
        if (!have || cand.mean_silhouette > best.mean_silhouette) {
            best = std::move(cand);
            have = true;
        }
    }
    return best;
}

} // namespace mbcc
