#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>

#include "mbcc/analysis.hpp"
#include "mbcc/pipeline.hpp"
#include "mbcc/rng.hpp"

using namespace mbcc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mbcc_pipe_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// Small grid keeps the eigendecompositions cheap in unit tests.
SoundingConfig small_grid(std::size_t frames, double snr_db) {
    SoundingConfig cfg;
    cfg.fft_size = 256;
    cfg.n_on = 101;
    cfg.sample_rate_hz = 256e6;
    cfg.carriers_hz = {6.5e9};
    cfg.frames = frames;
    cfg.hw_averages = 1;
    cfg.snr_db = snr_db;
    return cfg;
}

MusicResult music_for(const MultipathChannel& ch, const SoundingConfig& cfg, bool target,
                      std::uint64_t seed) {
    FrameSet fset = synthesize_frameset(ch, cfg, 0, "a", seed);
    fset.target = target;
    fset.orientation = "Alpha";
    MusicParams params;
    params.n_sub = 51;
    return run_music(fset, params);
}

} // namespace

TEST_CASE("histogram mode tracks overlay path count changes") {
    auto cfg = small_grid(40, 35.0);
    const double ts = 1.0 / cfg.sample_rate_hz;

    std::vector<MusicResult> results;
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(derive_seed(0xBA7C, s));
        auto phase = [&] { return 2.0 * M_PI * rng.uniform01(); };
        MultipathChannel base;
        base.carriers_hz = cfg.carriers_hz;
        base.a.taps = {{rng.uniform(0.0, ts), {std::polar(1.0, phase())}},
                       {(4.0 + rng.uniform(0.0, 2.0)) * ts, {std::polar(0.9, phase())}},
                       {(10.0 + rng.uniform(0.0, 2.0)) * ts, {std::polar(0.8, phase())}}};

        {
            TargetOverlay add_one;
            add_one.added.push_back(
                {base.a.taps[0].delay_s + 16.0 * ts, {std::polar(0.85, phase())}, AntennaSel::A});
            TargetOverlay block_two;
            block_two.blocked.push_back({AntennaSel::A, 1, 0.0});
            block_two.blocked.push_back({AntennaSel::A, 2, 0.0});

            auto res_off = music_for(base, cfg, false, derive_seed(1, s));
            res_off.orientation = "add";
            results.push_back(res_off);
            auto res_add = music_for(apply_target(base, add_one), cfg, true, derive_seed(2, s));
            res_add.orientation = "add";
            results.push_back(res_add);

            auto res_off2 = music_for(base, cfg, false, derive_seed(3, s));
            res_off2.orientation = "block";
            results.push_back(res_off2);
            auto res_blk = music_for(apply_target(base, block_two), cfg, true, derive_seed(4, s));
            res_blk.orientation = "block";
            results.push_back(res_blk);
        }
    }

    const auto hist = multipath_histogram(results);
    const auto modes = hist.modes();
    auto mode_of = [&](const char* orientation, bool target) {
        HistogramGroup g;
        g.carrier_hz = 6.5e9;
        g.orientation = orientation;
        g.target = target;
        return modes.at(g);
    };
    CHECK(mode_of("add", false) == 3);
    CHECK(mode_of("add", true) == 4);  // one resolvable path added
    CHECK(mode_of("block", false) == 3);
    CHECK(mode_of("block", true) == 1); // two of three paths fully blocked
    CHECK(hist.total() == results.size());
}

TEST_CASE("report bundle structure across the full pipeline") {
    TempDir dir;

    ScenarioConfig sc;
    sc.sounding = SoundingConfig{};
    sc.sounding.frames = 30;
    sc.sounding.hw_averages = 1;
    sc.sounding.snr_db = 30.0;
    sc.channel.l_min = 3;
    sc.channel.l_max = 3;
    const double ts = 1.0 / sc.sounding.sample_rate_hz;
    sc.channel.delay_spread_s = 12.0 * ts;
    sc.channel.min_spacing_s = 3.0 * ts;
    sc.channel.rho = 0.6; // shared delays, carrier-dependent gains
    sc.overlay.added.push_back({4.7 / kSpeedOfLight, {0.9, 0.0}, AntennaSel::Both});
    sc.overlay.blocked.push_back({AntennaSel::Both, 1, 0.0});

    StageOptions opts;
    opts.threads = 2;
    run_simulate(sc, dir.path / "raw", 5, TargetMode::Both, opts);
    run_music_stage(dir.path / "raw", dir.path / "music", MusicParams{}, opts);
    run_cluster_stage(dir.path / "music", ClusterOptions{}, opts);
    run_report_stage(dir.path / "music", dir.path / "report", ReportOptions{}, opts);

    std::ifstream in(dir.path / "report" / "report.json");
    REQUIRE(in.good());
    const auto report = nlohmann::json::parse(in);
    REQUIRE(report.at("carriers").size() == 2);

    std::vector<double> p_centers;
    for (const auto& carrier : report["carriers"]) {
        // one histogram per (orientation, target) group
        CHECK(carrier.at("histograms").size() == 2);
        // one trace per (target-state, antenna)
        CHECK(carrier.at("pdp_pairs").size() == 4);
        // one paired region report per antenna
        REQUIRE(carrier.at("regions").size() == 2);
        for (const auto& reg : carrier["regions"]) {
            REQUIRE(reg.at("p_regions").is_array());
            REQUIRE(reg.at("n_regions").is_array());
            if (reg["antenna"] == "a") {
                bool found = false;
                for (const auto& iv : reg["p_regions"])
                    if (iv["start_m"].get<double>() <= 5.0 && iv["end_m"].get<double>() >= 4.4) {
                        found = true;
                        p_centers.push_back((iv["start_m"].get<double>() +
                                             iv["end_m"].get<double>()) /
                                            2.0);
                    }
                CHECK(found); // the added 4.7 m path shows as a P region
            }
        }
    }
    // shared geometry: the P region sits at the same distance on both
    // carriers even though the gains differ
    REQUIRE(p_centers.size() == 2);
    CHECK(std::abs(p_centers[0] - p_centers[1]) < 0.35);

    // cluster outputs exist per (carrier, target-state)
    CHECK(fs::exists(dir.path / "music" / "cluster_c6500MHz_t0.json"));
    CHECK(fs::exists(dir.path / "music" / "cluster_c8750MHz_t1.csv"));
}

TEST_CASE("overlay-free scenario serializes empty region arrays") {
    TempDir dir;
    ScenarioConfig sc;
    sc.sounding = SoundingConfig{};
    sc.sounding.carriers_hz = {6.5e9};
    sc.sounding.frames = 20;
    sc.sounding.hw_averages = 1;
    sc.sounding.snr_db = 35.0;
    sc.channel.l_min = 2;
    sc.channel.l_max = 2;
    const double ts = 1.0 / sc.sounding.sample_rate_hz;
    sc.channel.delay_spread_s = 10.0 * ts;
    sc.channel.min_spacing_s = 3.0 * ts;
    sc.overlay = {}; // target state changes nothing

    StageOptions opts;
    run_simulate(sc, dir.path / "raw", 8, TargetMode::Both, opts);
    run_music_stage(dir.path / "raw", dir.path / "music", MusicParams{}, opts);
    run_report_stage(dir.path / "music", dir.path / "report", ReportOptions{}, opts);

    std::ifstream in(dir.path / "report" / "report.json");
    const auto report = nlohmann::json::parse(in);
    for (const auto& reg : report["carriers"][0]["regions"]) {
        CHECK(reg["p_regions"].is_array());
        CHECK(reg["n_regions"].is_array());
        CHECK(reg["p_regions"].empty());
        CHECK(reg["n_regions"].empty());
    }
}
