// One-dimensional K-means over relative path delays with silhouette-based
// selection of the cluster count.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mbcc {

struct DelayClustering {
    std::size_t k = 0;
    std::vector<double> centroids_s;  // one per cluster
    std::vector<int> assignments;     // cluster index per sample
    double wcss = 0.0;                // within-cluster sum of squares, s^2
    double mean_silhouette = 0.0;     // 0 when k == 1 (flagged)
    bool flagged = false;             // degenerate-input fallback
};

// Per frame, subtract the first (minimum) peak delay; concatenate all
// frames. Empty peak sets are skipped; skipped_frames reports how many.
std::vector<double> relative_delays(const std::vector<std::vector<double>>& peak_sets,
                                    std::size_t* skipped_frames = nullptr);

// Lloyd iterations from distance-weighted seeding, 20 restarts, best WCSS
// kept (ties: lowest restart index). Deterministic for a given seed.
DelayClustering kmeans_1d(std::span<const double> samples, std::size_t k, std::uint64_t seed);

// Mean silhouette coefficient; singleton clusters contribute 0, as do
// samples with zero intra- and inter-cluster distance. Requires k >= 2.
double silhouette(const DelayClustering& clustering, std::span<const double> samples);

// Clustering with the silhouette-maximal K in [2, k_max] (ties toward
// smaller K). Fewer than two distinct samples yields a flagged K = 1
// fallback.
DelayClustering select_k(std::span<const double> samples, std::size_t k_max = 8,
                         std::uint64_t seed = 0);

} // namespace mbcc
