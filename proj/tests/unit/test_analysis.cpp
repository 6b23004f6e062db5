#include <doctest.h>

#include <cmath>

#include "mbcc/analysis.hpp"
#include "mbcc/errors.hpp"
#include "mbcc/rng.hpp"

using namespace mbcc;

namespace {

MusicResult spectrum_result(const std::vector<double>& grid, const std::vector<double>& lin) {
    MusicResult res;
    res.grid_s = grid;
    res.spectrum = lin;
    res.order = 1;
    return res;
}

} // namespace

TEST_CASE("cir_pdp") {
    const double rate = 983.04e6;

    SUBCASE("unit impulse") {
        CirEstimate cir;
        cir.taps.assign(8, {0.0, 0.0});
        cir.taps[0] = {1.0, 0.0};
        const auto trace = cir_pdp(cir, rate);
        CHECK(trace.distance_m[0] == 0.0);
        CHECK(trace.value_db[0] == doctest::Approx(0.0).epsilon(1e-12));
        for (std::size_t n = 1; n < 8; ++n)
            CHECK(trace.value_db[n] == kDbFloor);
    }

    SUBCASE("equal taps give equal values") {
        CirEstimate cir;
        cir.taps = {{0.5, 0.5}, {0.5, 0.5}};
        const auto trace = cir_pdp(cir, rate);
        CHECK(trace.value_db[0] == trace.value_db[1]);
    }

    SUBCASE("bin spacing is c/B") {
        CirEstimate cir;
        cir.taps = {{1.0, 0.0}, {1.0, 0.0}};
        const auto trace = cir_pdp(cir, rate);
        CHECK(std::abs((trace.distance_m[1] - trace.distance_m[0]) - 0.305) < 1e-3);
        CHECK(trace.distance_m[1] ==
              doctest::Approx(kSpeedOfLight / rate).epsilon(1e-12));
    }

    SUBCASE("all-zero CIR is rejected") {
        CirEstimate cir;
        cir.taps.assign(8, {0.0, 0.0});
        CHECK_THROWS_AS(cir_pdp(cir, rate), ConfigError);
    }
}

TEST_CASE("multipath histogram") {
    SUBCASE("single result") {
        MusicResult r;
        r.order = 4;
        r.carrier_hz = 6.5e9;
        r.orientation = "Alpha";
        r.target = false;
        const auto hist = multipath_histogram({r});
        REQUIRE(hist.counts.size() == 1);
        const auto& counts = hist.counts.begin()->second;
        CHECK(counts.at(4) == 1);
        CHECK(hist.modes().begin()->second == 4);
        CHECK(hist.total() == 1);
    }

    SUBCASE("counts are invariant under input reordering") {
        std::vector<MusicResult> results;
        for (std::size_t order : {3u, 4u, 4u, 5u, 3u, 4u}) {
            MusicResult r;
            r.order = order;
            r.carrier_hz = 8.75e9;
            r.orientation = "Beta";
            r.target = true;
            results.push_back(r);
        }
        const auto h1 = multipath_histogram(results);
        std::reverse(results.begin(), results.end());
        const auto h2 = multipath_histogram(results);
        CHECK(h1.counts == h2.counts);
        CHECK(h1.modes().begin()->second == 4);
    }

    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(multipath_histogram({}), ConfigError);
    }
}

TEST_CASE("pn_regions") {
    std::vector<double> grid(400);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = static_cast<double>(i) * 1e-10; // 0.03 m steps

    SUBCASE("identical spectra give an empty report") {
        std::vector<double> spec(grid.size(), 1.0);
        const auto a = spectrum_result(grid, spec);
        const auto report = pn_regions(a, a);
        CHECK(report.p_regions.empty());
        CHECK(report.n_regions.empty());
    }

    SUBCASE("mismatched grids are rejected") {
        auto a = spectrum_result(grid, std::vector<double>(grid.size(), 1.0));
        auto grid2 = grid;
        grid2[5] += 1e-12;
        auto b = spectrum_result(grid2, std::vector<double>(grid.size(), 1.0));
        CHECK_THROWS_AS(pn_regions(a, b), ConfigError);
    }

    SUBCASE("a bump makes a P region; swapping makes it an N region") {
        std::vector<double> base(grid.size(), 1.0);
        auto bumped = base;
        for (std::size_t i = 100; i < 110; ++i)
            bumped[i] = 100.0; // +20 dB
        const auto with_t = spectrum_result(grid, bumped);
        const auto without_t = spectrum_result(grid, base);

        const auto report = pn_regions(with_t, without_t, 6.0, 0.1);
        REQUIRE(report.p_regions.size() == 1);
        CHECK(report.n_regions.empty());
        CHECK(report.p_regions[0].start_m ==
              doctest::Approx(grid[100] * kSpeedOfLight).epsilon(1e-12));
        CHECK(report.p_regions[0].end_m ==
              doctest::Approx(grid[109] * kSpeedOfLight).epsilon(1e-12));
        CHECK(report.p_regions[0].delta_db == doctest::Approx(20.0).epsilon(1e-9));

        // anti-symmetry: swapping the inputs swaps P and N exactly
        const auto swapped = pn_regions(without_t, with_t, 6.0, 0.1);
        REQUIRE(swapped.n_regions.size() == 1);
        CHECK(swapped.p_regions.empty());
        CHECK(swapped.n_regions[0].start_m == report.p_regions[0].start_m);
        CHECK(swapped.n_regions[0].end_m == report.p_regions[0].end_m);
        CHECK(swapped.n_regions[0].delta_db ==
              doctest::Approx(-report.p_regions[0].delta_db).epsilon(1e-12));
    }

    SUBCASE("nearby flagged runs merge within the width") {
        std::vector<double> base(grid.size(), 1.0);
        auto bumped = base;
        for (std::size_t i = 100; i < 105; ++i)
            bumped[i] = 100.0;
        for (std::size_t i = 109; i < 114; ++i)
            bumped[i] = 100.0; // gap of 4 bins = 0.12 m
        const auto with_t = spectrum_result(grid, bumped);
        const auto without_t = spectrum_result(grid, base);
        CHECK(pn_regions(with_t, without_t, 6.0, 0.3).p_regions.size() == 1);
        CHECK(pn_regions(with_t, without_t, 6.0, 0.05).p_regions.size() == 2);
    }

    SUBCASE("distances are relative to the origin delay") {
        std::vector<double> base(grid.size(), 1.0);
        auto bumped = base;
        bumped[200] = 1e4;
        bumped[201] = 1e4;
        const auto report =
            pn_regions(spectrum_result(grid, bumped), spectrum_result(grid, base), 6.0, 0.1,
                       grid[100]);
        REQUIRE(report.p_regions.size() == 1);
        CHECK(report.p_regions[0].start_m ==
              doctest::Approx((grid[200] - grid[100]) * kSpeedOfLight).epsilon(1e-12));
    }
}

TEST_CASE("db floor") {
    CHECK(power_db(0.0) == kDbFloor);
    CHECK(power_db(1e-30) == kDbFloor);
    CHECK(power_db(1.0) == 0.0);
    CHECK(power_db(100.0) == doctest::Approx(20.0).epsilon(1e-12));
}
