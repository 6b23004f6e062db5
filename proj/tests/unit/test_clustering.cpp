#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mbcc/clustering.hpp"
#include "mbcc/errors.hpp"
#include "mbcc/rng.hpp"

using namespace mbcc;

TEST_CASE("relative delays") {
    SUBCASE("per-frame first arrival is subtracted") {
        const auto out = relative_delays({{5e-9, 8e-9, 12e-9}});
        REQUIRE(out.size() == 3);
        CHECK(out[0] == 0.0);
        CHECK(out[1] == doctest::Approx(3e-9).epsilon(1e-12));
        CHECK(out[2] == doctest::Approx(7e-9).epsilon(1e-12));
    }

    SUBCASE("single-path frames collapse to zero") {
        const auto out = relative_delays({{3e-9}, {5e-9}, {9e-9}});
        for (double v : out)
            CHECK(v == 0.0);
    }

    SUBCASE("empty frames are skipped with a warning count") {
        std::size_t skipped = 0;
        const auto out = relative_delays({{1e-9, 2e-9}, {}, {4e-9}}, &skipped);
        CHECK(skipped == 1);
        CHECK(out.size() == 3);
    }
}

TEST_CASE("kmeans_1d basics") {
    SUBCASE("two point masses") {
        const std::vector<double> samples = {0.0, 0.0, 10e-9, 10e-9};
        const auto c = kmeans_1d(samples, 2, 1);
        auto centroids = c.centroids_s;
        std::sort(centroids.begin(), centroids.end());
        CHECK(centroids[0] == 0.0);
        CHECK(centroids[1] == 10e-9);
        CHECK(c.wcss == 0.0);
    }

    SUBCASE("k=1 gives the sample mean") {
        const std::vector<double> samples = {1.0, 2.0, 6.0};
        const auto c = kmeans_1d(samples, 1, 1);
        CHECK(c.centroids_s[0] == doctest::Approx(3.0).epsilon(1e-12));
    }

    SUBCASE("k beyond the distinct count is rejected") {
        const std::vector<double> samples = {1.0, 1.0, 2.0};
        CHECK_THROWS_AS(kmeans_1d(samples, 3, 1), ConfigError);
    }

    SUBCASE("planted clusters are recovered") {
        Rng rng(33);
        std::vector<double> samples;
        for (int i = 0; i < 100; ++i)
            for (double center : {0.0, 5e-9, 10e-9})
                samples.push_back(center + 0.2e-9 * rng.gauss());
        const auto c = kmeans_1d(samples, 3, 2);
        auto centroids = c.centroids_s;
        std::sort(centroids.begin(), centroids.end());
        CHECK(std::abs(centroids[0] - 0.0) < 0.3e-9);
        CHECK(std::abs(centroids[1] - 5e-9) < 0.3e-9);
        CHECK(std::abs(centroids[2] - 10e-9) < 0.3e-9);
    }
}

TEST_CASE("silhouette") {
    SUBCASE("tight far clusters score near 1") {
        Rng rng(4);
        std::vector<double> samples;
        for (int i = 0; i < 50; ++i) {
            samples.push_back(0.0 + 0.01 * rng.uniform01());
            samples.push_back(100.0 + 0.01 * rng.uniform01());
        }
        const auto c = kmeans_1d(samples, 2, 1);
        CHECK(silhouette(c, samples) > 0.99);
    }

    SUBCASE("equidistant sample contributes zero") {
        const std::vector<double> samples = {0.0, 2.0, 3.0, 5.0};
        DelayClustering c;
        c.k = 2;
        c.centroids_s = {1.0, 4.0};
        c.assignments = {0, 0, 1, 1};
        // samples 2.0 and 3.0 have phi == Phi == 2 and contribute 0;
        // samples 0.0 and 5.0 have Phi = 2, phi = 4, so 0.5 each.
        CHECK(silhouette(c, samples) == doctest::Approx(0.25).epsilon(1e-12));
    }

    SUBCASE("k=1 is undefined") {
        const std::vector<double> samples = {1.0, 2.0};
        DelayClustering c;
        c.k = 1;
        c.centroids_s = {1.5};
        c.assignments = {0, 0};
        CHECK_THROWS_AS(silhouette(c, samples), ConfigError);
    }

    SUBCASE("coefficients stay within [-1, 1] on random data") {
        Rng rng(9);
        std::vector<double> samples;
        for (int i = 0; i < 60; ++i)
            samples.push_back(rng.uniform01());
        for (std::size_t k = 2; k <= 5; ++k) {
            const auto c = kmeans_1d(samples, k, 3);
            const double s = silhouette(c, samples);
            CHECK(s >= -1.0);
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("select_k") {
    SUBCASE("planted three clusters") {
        Rng rng(21);
        std::vector<double> samples;
        for (int i = 0; i < 100; ++i)
            for (double center : {0.0, 5e-9, 10e-9})
                samples.push_back(center + 0.2e-9 * rng.gauss());
        const auto c = select_k(samples, 8, 7);
        CHECK(c.k == 3);
        CHECK_FALSE(c.flagged);
    }

    SUBCASE("two distinct values select k=2") {
        const std::vector<double> samples = {0.0, 0.0, 1e-9, 1e-9, 1e-9};
        const auto c = select_k(samples);
        CHECK(c.k == 2);
    }

    SUBCASE("identical samples fall back to a flagged k=1") {
        const std::vector<double> samples = {5e-9, 5e-9, 5e-9};
        const auto c = select_k(samples);
        CHECK(c.k == 1);
        CHECK(c.flagged);
        CHECK(c.centroids_s[0] == doctest::Approx(5e-9).epsilon(1e-12));
        CHECK(c.mean_silhouette == 0.0);
    }
}

TEST_CASE("clustering invariants") {
    Rng rng(13);
    std::vector<double> samples;
    for (int i = 0; i < 40; ++i)
        samples.push_back((i % 4) * 2e-9 + 0.1e-9 * rng.gauss());

    SUBCASE("permutation invariance") {
        const auto base = kmeans_1d(samples, 3, 11);
        auto shuffled = samples;
        std::reverse(shuffled.begin(), shuffled.end());
        const auto rev = kmeans_1d(shuffled, 3, 11);
        auto c1 = base.centroids_s, c2 = rev.centroids_s;
        std::sort(c1.begin(), c1.end());
        std::sort(c2.begin(), c2.end());
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-9));
        CHECK(base.wcss == doctest::Approx(rev.wcss).epsilon(1e-9));
    }

    SUBCASE("additive shift moves centroids, keeps assignments and wcss") {
        const auto base = kmeans_1d(samples, 3, 11);
        auto shifted = samples;
        for (double& s : shifted)
            s += 7e-9;
        const auto moved = kmeans_1d(shifted, 3, 11);
        CHECK(moved.assignments == base.assignments);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(moved.centroids_s[i] - base.centroids_s[i] ==
                  doctest::Approx(7e-9).epsilon(1e-9));
        CHECK(moved.wcss == doctest::Approx(base.wcss).epsilon(1e-6));
    }
}
