#include "mbcc/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "mbcc/analysis.hpp"
#include "mbcc/errors.hpp"

using nlohmann::json;

namespace mbcc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "payload codec assumes a little-endian host");

std::uint32_t crc32_of(const std::vector<unsigned char>& bytes) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::vector<unsigned char> encode_payload(const std::complex<double>* values, std::size_t count) {
    std::vector<unsigned char> bytes(count * 8);
    for (std::size_t i = 0; i < count; ++i) {
        const float re = static_cast<float>(values[i].real());
        const float im = static_cast<float>(values[i].imag());
        std::memcpy(bytes.data() + i * 8, &re, 4);
        std::memcpy(bytes.data() + i * 8 + 4, &im, 4);
    }
    return bytes;
}

std::vector<std::complex<double>> decode_payload(const std::vector<unsigned char>& bytes) {
    std::vector<std::complex<double>> values(bytes.size() / 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        float re, im;
        std::memcpy(&re, bytes.data() + i * 8, 4);
        std::memcpy(&im, bytes.data() + i * 8 + 4, 4);
        values[i] = {static_cast<double>(re), static_cast<double>(im)};
    }
    return values;
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError(IoError::Kind::NotFound, "cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError(IoError::Kind::BadFormat, "short write: " + path.string());
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in)
        throw IoError(IoError::Kind::NotFound, "cannot open: " + path.string());
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in)
        throw IoError(IoError::Kind::TruncatedPayload, "short read: " + path.string());
    return bytes;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError(IoError::Kind::NotFound, "cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError(IoError::Kind::NotFound, "cannot open: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(IoError::Kind::BadFormat, path.string() + ": " + e.what());
    }
    return j;
}

json manifest_to_json(const DatasetManifest& m) {
    json j;
    j["format_version"] = m.format_version;
    j["kind"] = m.kind == PayloadKind::FrameSet ? "frameset" : "rx_time";
    j["carrier_hz"] = m.carrier_hz;
    j["antenna"] = m.antenna;
    j["n_on"] = m.n_on;
    j["fft_size"] = m.fft_size;
    j["sample_rate_hz"] = m.sample_rate_hz;
    j["n_frames"] = m.n_frames;
    j["target"] = m.target;
    j["placement"] = m.placement;
    j["orientation"] = m.orientation;
    j["payload_file"] = m.payload_file;
    j["payload_bytes"] = m.payload_bytes;
    j["payload_crc32"] = m.payload_crc32;
    j["hw_averages"] = m.hw_averages;
    if (m.snr_db)
        j["snr_db"] = *m.snr_db;
    return j;
}

DatasetManifest manifest_from_json(const json& j, const std::filesystem::path& path) {
    DatasetManifest m;
    try {
        m.format_version = j.at("format_version").get<int>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "frameset")
            m.kind = PayloadKind::FrameSet;
        else if (kind == "rx_time")
            m.kind = PayloadKind::RxTime;
        else
            throw IoError(IoError::Kind::BadFormat, path.string() + ": unknown kind " + kind);
        m.carrier_hz = j.at("carrier_hz").get<double>();
        m.antenna = j.at("antenna").get<std::string>();
        m.n_on = j.at("n_on").get<std::size_t>();
        m.fft_size = j.at("fft_size").get<std::size_t>();
        m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        m.n_frames = j.at("n_frames").get<std::size_t>();
        m.target = j.at("target").get<bool>();
        m.placement = j.at("placement").get<std::string>();
        m.orientation = j.at("orientation").get<std::string>();
        m.payload_file = j.at("payload_file").get<std::string>();
        m.payload_bytes = j.at("payload_bytes").get<std::size_t>();
        m.payload_crc32 = j.at("payload_crc32").get<std::uint32_t>();
        m.hw_averages = j.value("hw_averages", std::size_t{1});
        if (j.contains("snr_db") && !j.at("snr_db").is_null())
            m.snr_db = j.at("snr_db").get<double>();
    } catch (const json::exception& e) {
        throw IoError(IoError::Kind::BadFormat, path.string() + ": " + e.what());
    }
    if (m.payload_bytes != m.expected_bytes())
        throw IoError(IoError::Kind::SizeMismatch,
                      path.string() + ": manifest payload size disagrees with geometry");
    return m;
}

std::vector<std::complex<double>> load_payload(const std::filesystem::path& manifest_path,
                                               const DatasetManifest& m) {
    const auto payload_path = manifest_path.parent_path() / m.payload_file;
    const auto bytes = read_bytes(payload_path);
    if (bytes.size() < m.payload_bytes)
        throw IoError(IoError::Kind::TruncatedPayload,
                      payload_path.string() + ": payload shorter than manifest declares");
    if (bytes.size() != m.payload_bytes)
        throw IoError(IoError::Kind::SizeMismatch,
                      payload_path.string() + ": payload size disagrees with manifest");
    if (crc32_of(bytes) != m.payload_crc32)
        throw IoError(IoError::Kind::ChecksumMismatch,
                      payload_path.string() + ": payload checksum mismatch");
    return decode_payload(bytes);
}

void store_payload(const std::filesystem::path& manifest_path, DatasetManifest& m,
                   const std::vector<unsigned char>& bytes) {
    m.payload_bytes = bytes.size();
    m.payload_crc32 = crc32_of(bytes);
    if (m.payload_bytes != m.expected_bytes())
        throw IoError(IoError::Kind::SizeMismatch, "payload size disagrees with manifest fields");
    write_bytes(manifest_path.parent_path() / m.payload_file, bytes);
    write_json(manifest_path, manifest_to_json(m));
}

} // namespace

void store_frameset(const std::filesystem::path& manifest_path, const FrameSet& fs,
                    std::size_t hw_averages, std::optional<double> snr_db) {
    DatasetManifest m;
    m.kind = PayloadKind::FrameSet;
    m.carrier_hz = fs.carrier_hz;
    m.antenna = fs.antenna;
    m.n_on = fs.n_on();
    m.fft_size = fs.fft_size;
    m.sample_rate_hz = fs.sample_rate_hz;
    m.n_frames = fs.frame_count();
    m.target = fs.target;
    m.placement = fs.placement;
    m.orientation = fs.orientation;
    m.payload_file = manifest_path.stem().string() + ".bin";
    m.hw_averages = hw_averages;
    m.snr_db = snr_db;

    // Row-major frame-by-frame copy; Eigen stores column major.
    std::vector<std::complex<double>> values(fs.frame_count() * fs.n_on());
    for (std::size_t f = 0; f < fs.frame_count(); ++f)
        for (std::size_t i = 0; i < fs.n_on(); ++i)
            values[f * fs.n_on() + i] =
                fs.rows(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i));
    store_payload(manifest_path, m, encode_payload(values.data(), values.size()));
}

FrameSet load_frameset(const std::filesystem::path& manifest_path) {
    const DatasetManifest m = read_manifest(manifest_path);
    if (m.kind != PayloadKind::FrameSet)
        throw IoError(IoError::Kind::BadFormat,
                      manifest_path.string() + ": expected a frameset manifest");
    const auto values = load_payload(manifest_path, m);
    FrameSet fs;
    fs.rows.resize(static_cast<Eigen::Index>(m.n_frames), static_cast<Eigen::Index>(m.n_on));
    for (std::size_t f = 0; f < m.n_frames; ++f)
        for (std::size_t i = 0; i < m.n_on; ++i)
            fs.rows(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i)) =
                values[f * m.n_on + i];
    fs.carrier_hz = m.carrier_hz;
    fs.fft_size = m.fft_size;
    fs.sample_rate_hz = m.sample_rate_hz;
    fs.antenna = m.antenna;
    fs.placement = m.placement;
    fs.orientation = m.orientation;
    fs.target = m.target;
    return fs;
}

void store_rx_frames(const std::filesystem::path& manifest_path,
                     const std::vector<RxFrame>& frames, const SoundingConfig& cfg, bool target,
                     const std::string& placement, const std::string& orientation) {
    if (frames.empty())
        throw ConfigError("store_rx_frames: no frames");
    DatasetManifest m;
    m.kind = PayloadKind::RxTime;
    m.carrier_hz = frames.front().carrier_hz;
    m.antenna = "rx";
    m.n_on = cfg.n_on;
    m.fft_size = cfg.fft_size;
    m.sample_rate_hz = cfg.sample_rate_hz;
    m.n_frames = frames.size();
    m.target = target;
    m.placement = placement;
    m.orientation = orientation;
    m.payload_file = manifest_path.stem().string() + ".bin";
    m.hw_averages = cfg.hw_averages;
    m.snr_db = cfg.snr_db;

    std::vector<std::complex<double>> values;
    values.reserve(frames.size() * cfg.fft_size);
    for (const auto& f : frames) {
        if (f.samples.size() != cfg.fft_size)
            throw ConfigError("store_rx_frames: frame length does not match fft_size");
        values.insert(values.end(), f.samples.begin(), f.samples.end());
    }
    store_payload(manifest_path, m, encode_payload(values.data(), values.size()));
}

RxDataset load_rx_frames(const std::filesystem::path& manifest_path) {
    RxDataset ds;
    ds.manifest = read_manifest(manifest_path);
    if (ds.manifest.kind != PayloadKind::RxTime)
        throw IoError(IoError::Kind::BadFormat,
                      manifest_path.string() + ": expected an rx_time manifest");
    const auto values = load_payload(manifest_path, ds.manifest);
    ds.frames.resize(ds.manifest.n_frames);
    for (std::size_t f = 0; f < ds.manifest.n_frames; ++f) {
        auto& frame = ds.frames[f];
        frame.carrier_hz = ds.manifest.carrier_hz;
        frame.samples.assign(values.begin() + static_cast<std::ptrdiff_t>(f * ds.manifest.fft_size),
                             values.begin() +
                                 static_cast<std::ptrdiff_t>((f + 1) * ds.manifest.fft_size));
    }
    return ds;
}

DatasetManifest read_manifest(const std::filesystem::path& manifest_path) {
    return manifest_from_json(read_json(manifest_path), manifest_path);
}

void write_music_result(const std::filesystem::path& path, const MusicResult& res) {
    json j;
    j["format_version"] = kFormatVersion;
    j["carrier_hz"] = res.carrier_hz;
    j["antenna"] = res.antenna;
    j["placement"] = res.placement;
    j["orientation"] = res.orientation;
    j["target"] = res.target;
    j["order"] = res.order;
    j["grid_s"] = res.grid_s;
    json spec_db = json::array();
    for (double p : res.spectrum)
        spec_db.push_back(power_db(p));
    j["spectrum_db"] = std::move(spec_db);
    json eig = json::array();
    for (Eigen::Index i = 0; i < res.eigenvalues.size(); ++i)
        eig.push_back(res.eigenvalues[i]);
    j["eigenvalues"] = std::move(eig);
    j["peaks_s"] = res.peaks_s;
    j["peak_shortfall"] = res.peak_shortfall;
    json gains = json::array();
    for (const auto& g : res.gains)
        gains.push_back(json::array({g.real(), g.imag()}));
    j["gains"] = std::move(gains);
    j["gain_residual"] = res.gain_residual;
    j["gain_ill_conditioned"] = res.gain_ill_conditioned;
    write_json(path, j);
}

MusicResult read_music_result(const std::filesystem::path& path) {
    const json j = read_json(path);
    MusicResult res;
    try {
        res.carrier_hz = j.at("carrier_hz").get<double>();
        res.antenna = j.at("antenna").get<std::string>();
        res.placement = j.at("placement").get<std::string>();
        res.orientation = j.at("orientation").get<std::string>();
        res.target = j.at("target").get<bool>();
        res.order = j.at("order").get<std::size_t>();
        res.grid_s = j.at("grid_s").get<std::vector<double>>();
        const auto spec_db = j.at("spectrum_db").get<std::vector<double>>();
        res.spectrum.resize(spec_db.size());
        for (std::size_t i = 0; i < spec_db.size(); ++i)
            res.spectrum[i] = std::pow(10.0, spec_db[i] / 10.0);
        const auto eig = j.at("eigenvalues").get<std::vector<double>>();
        res.eigenvalues = Eigen::Map<const Eigen::VectorXd>(eig.data(),
                                                            static_cast<Eigen::Index>(eig.size()));
        res.peaks_s = j.at("peaks_s").get<std::vector<double>>();
        res.peak_shortfall = j.at("peak_shortfall").get<bool>();
        for (const auto& g : j.at("gains"))
            res.gains.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
        res.gain_residual = j.at("gain_residual").get<double>();
        res.gain_ill_conditioned = j.at("gain_ill_conditioned").get<bool>();
    } catch (const json::exception& e) {
        throw IoError(IoError::Kind::BadFormat, path.string() + ": " + e.what());
    }
    return res;
}

void write_clustering(const std::filesystem::path& json_path,
                      const std::filesystem::path& csv_path, const DelayClustering& clustering,
                      std::span<const double> samples, double carrier_hz, bool target) {
    json j;
    j["format_version"] = kFormatVersion;
    j["carrier_hz"] = carrier_hz;
    j["target"] = target;
    j["k"] = clustering.k;
    j["centroids_s"] = clustering.centroids_s;
    json cm = json::array();
    for (double c : clustering.centroids_s)
        cm.push_back(c * kSpeedOfLight);
    j["centroids_m"] = std::move(cm);
    j["assignments"] = clustering.assignments;
    j["wcss"] = clustering.wcss;
    j["mean_silhouette"] = clustering.mean_silhouette;
    j["flagged"] = clustering.flagged;
    write_json(json_path, j);

    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv)
        throw IoError(IoError::Kind::NotFound, "cannot open for writing: " + csv_path.string());
    csv << "cluster,delay_s,distance_m,centroid_m\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const int c = clustering.assignments[i];
        csv << c << ',' << samples[i] << ',' << samples[i] * kSpeedOfLight << ','
            << clustering.centroids_s[static_cast<std::size_t>(c)] * kSpeedOfLight << "\n";
    }
}

void write_ground_truth(
    const std::filesystem::path& path,
    const std::vector<std::tuple<std::string, std::string, bool, MultipathChannel>>& entries) {
    json arr = json::array();
    for (const auto& [placement, orientation, target, ch] : entries) {
        json e;
        e["placement"] = placement;
        e["orientation"] = orientation;
        e["target"] = target;
        e["carriers_hz"] = ch.carriers_hz;
        for (const auto* ant : {&ch.a, &ch.b}) {
            json taps = json::array();
            for (const auto& tap : ant->taps) {
                json t;
                t["delay_s"] = tap.delay_s;
                json gains = json::array();
                for (const auto& g : tap.gains)
                    gains.push_back(json::array({g.real(), g.imag()}));
                t["gains"] = std::move(gains);
                taps.push_back(std::move(t));
            }
            e[ant == &ch.a ? "antenna_a" : "antenna_b"] = std::move(taps);
        }
        arr.push_back(std::move(e));
    }
    json j;
    j["format_version"] = kFormatVersion;
    j["channels"] = std::move(arr);
    write_json(path, j);
}

std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dir,
                                                  PayloadKind kind) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir))
        throw IoError(IoError::Kind::NotFound, "not a directory: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json")
            continue;
        json j;
        try {
            j = read_json(entry.path());
        } catch (const IoError&) {
            continue;
        }
        if (!j.contains("kind") || !j.contains("payload_file"))
            continue;
        const std::string k = j["kind"].get<std::string>();
        if ((kind == PayloadKind::FrameSet && k == "frameset") ||
            (kind == PayloadKind::RxTime && k == "rx_time"))
            out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::filesystem::path> find_music_results(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir))
        throw IoError(IoError::Kind::NotFound, "not a directory: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json")
            continue;
        json j;
        try {
            j = read_json(entry.path());
        } catch (const IoError&) {
            continue;
        }
        if (j.contains("spectrum_db") && j.contains("order"))
            out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace mbcc
