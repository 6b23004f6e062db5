// Dataset files: JSON manifests describing little-endian float32 payloads,
// plus JSON serialization of analysis products. All formats carry a
// format_version field; payload integrity is checked with CRC32.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mbcc/channel.hpp"
#include "mbcc/clustering.hpp"
#include "mbcc/estimator.hpp"
#include "mbcc/subspace.hpp"

namespace mbcc {

inline constexpr int kFormatVersion = 1;

enum class PayloadKind { RxTime, FrameSet };

struct DatasetManifest {
    int format_version = kFormatVersion;
    PayloadKind kind = PayloadKind::FrameSet;
    double carrier_hz = 0.0;
    std::string antenna;    // "a" / "b" for framesets, "rx" for raw captures
    std::size_t n_on = 0;
    std::size_t fft_size = 0;
    double sample_rate_hz = 0.0;
    std::size_t n_frames = 0;
    bool target = false;
    std::string placement;
    std::string orientation;
    std::string payload_file;
    std::size_t payload_bytes = 0;
    std::uint32_t payload_crc32 = 0;
    std::size_t hw_averages = 1;
    std::optional<double> snr_db;

    // Values per frame: n_on for framesets, fft_size for raw rx captures.
    std::size_t frame_values() const {
        return kind == PayloadKind::FrameSet ? n_on : fft_size;
    }
    std::size_t expected_bytes() const { return n_frames * frame_values() * 8; }
};

// Payloads are interleaved (re, im) IEEE-754 float32, little endian,
// frame-major then value index; bit-exact round trips.
void store_frameset(const std::filesystem::path& manifest_path, const FrameSet& fs,
                    std::size_t hw_averages = 1, std::optional<double> snr_db = {});
FrameSet load_frameset(const std::filesystem::path& manifest_path);

void store_rx_frames(const std::filesystem::path& manifest_path,
                     const std::vector<RxFrame>& frames, const SoundingConfig& cfg,
                     bool target, const std::string& placement, const std::string& orientation);

struct RxDataset {
    std::vector<RxFrame> frames;
    DatasetManifest manifest;
};
RxDataset load_rx_frames(const std::filesystem::path& manifest_path);

DatasetManifest read_manifest(const std::filesystem::path& manifest_path);

// Serialization of pipeline products (spectra in dB, floored at -120).
void write_music_result(const std::filesystem::path& path, const MusicResult& res);
MusicResult read_music_result(const std::filesystem::path& path);

void write_clustering(const std::filesystem::path& json_path,
                      const std::filesystem::path& csv_path, const DelayClustering& clustering,
                      std::span<const double> samples, double carrier_hz, bool target);

// Ground-truth channel export for oracle comparisons.
void write_ground_truth(const std::filesystem::path& path,
                        const std::vector<std::tuple<std::string, std::string, bool,
                                                     MultipathChannel>>& entries);

// Manifest discovery: all *.json files in dir that parse as dataset
// manifests of the requested kind, sorted by filename.
std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dir,
                                                  PayloadKind kind);
std::vector<std::filesystem::path> find_music_results(const std::filesystem::path& dir);

} // namespace mbcc
