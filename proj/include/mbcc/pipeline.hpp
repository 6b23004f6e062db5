// Orchestration of the full pipeline over dataset directories: simulate,
// estimate, music, cluster, report. Datasets fan out to a bounded worker
// pool; every output is a per-dataset file so results are independent of
// scheduling.
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mbcc/analysis.hpp"
#include "mbcc/channel.hpp"
#include "mbcc/io.hpp"
#include "mbcc/subspace.hpp"

namespace mbcc {

enum class TargetMode { Off, On, Both };

// Added paths in the scenario are specified relative to the first drawn tap
// so random channels and the fixed 4.7 m style offsets compose.
struct OverlaySpec {
    struct Add {
        double extra_delay_s = 0.0; // relative to the first tap
        std::complex<double> gain{0.0, 0.0};
        AntennaSel antenna = AntennaSel::Both;
    };
    struct Block {
        AntennaSel antenna = AntennaSel::Both;
        std::size_t tap_index = 0;
        double factor = 0.0;
    };
    std::vector<Add> added;
    std::vector<Block> blocked;

    TargetOverlay materialize(const MultipathChannel& base, std::size_t n_carriers) const;
};

struct ScenarioConfig {
    SoundingConfig sounding;
    ChannelSpec channel;
    OverlaySpec overlay;
    std::vector<std::string> placements = {"A"};
    std::vector<std::string> orientations = {"Alpha"};
    bool emit_framesets = true; // false: write raw rx captures (run `estimate` next)
};

ScenarioConfig default_scenario();
ScenarioConfig load_scenario(const std::filesystem::path& config_path);

// Direct FrameSet synthesis: per-frame true allocated response plus white
// noise per carrier at cfg.snr_db (after hw_averages coherent gain).
FrameSet synthesize_frameset(const MultipathChannel& ch, const SoundingConfig& cfg,
                             std::size_t carrier_idx, const std::string& antenna,
                             std::uint64_t seed);

struct StageOptions {
    std::size_t threads = 0; // 0 = hardware concurrency
    bool verbose = false;
};

void run_simulate(const ScenarioConfig& scenario, const std::filesystem::path& out_dir,
                  std::uint64_t seed, TargetMode mode, const StageOptions& opts);

void run_estimate(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                  const StageOptions& opts, const EstimatorOptions& est_opts = {});

void run_music_stage(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                     const MusicParams& params, const StageOptions& opts);

struct ClusterOptions {
    std::size_t k_max = 8;
    std::uint64_t seed = 0;
    bool pool_antennas = true; // one clustering per (carrier, target-state)
};

void run_cluster_stage(const std::filesystem::path& in_dir, const ClusterOptions& copts,
                       const StageOptions& opts);

struct ReportOptions {
    double gamma_db = 6.0;
    double merge_width_m = 0.3;
};

void run_report_stage(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                      const ReportOptions& ropts, const StageOptions& opts);

// Deterministic index-sharded parallel loop used by the stages.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

} // namespace mbcc
