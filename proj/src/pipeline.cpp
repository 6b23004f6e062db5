#include "mbcc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "mbcc/errors.hpp"
#include "mbcc/rng.hpp"

using nlohmann::json;

namespace mbcc {
namespace {

std::string carrier_tag(double hz) {
    std::ostringstream os;
    os << static_cast<long long>(std::llround(hz / 1e6)) << "MHz";
    return os.str();
}

std::string dataset_stem(const std::string& placement, const std::string& orientation,
                         double carrier_hz, bool target) {
    return "p" + placement + "_o" + orientation + "_c" + carrier_tag(carrier_hz) +
           (target ? "_t1" : "_t0");
}

AntennaSel antenna_sel_from(const std::string& s) {
    if (s == "a")
        return AntennaSel::A;
    if (s == "b")
        return AntennaSel::B;
    if (s == "both")
        return AntennaSel::Both;
    throw ConfigError("unknown antenna selector: " + s);
}

void log_line(const StageOptions& opts, const std::string& msg) {
    if (!opts.verbose)
        return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << msg << "\n";
}

} // namespace

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
    std::size_t n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (n_threads == 0)
        n_threads = 1;
    n_threads = std::min(n_threads, count);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

TargetOverlay OverlaySpec::materialize(const MultipathChannel& base,
                                       std::size_t n_carriers) const {
    const double first = base.a.taps.empty() ? 0.0 : base.a.taps.front().delay_s;
    TargetOverlay overlay;
    for (const auto& add : added) {
        AddedPath p;
        p.delay_s = first + add.extra_delay_s;
        p.gains.assign(n_carriers, add.gain);
        p.antenna = add.antenna;
        overlay.added.push_back(std::move(p));
    }
    for (const auto& blk : blocked) {
        BlockedTap t;
        t.antenna = blk.antenna;
        t.tap_index = blk.tap_index;
        t.factor = blk.factor;
        overlay.blocked.push_back(t);
    }
    return overlay;
}

ScenarioConfig default_scenario() {
    ScenarioConfig sc;
    sc.sounding = SoundingConfig{}; // the measured-system numerology
    sc.channel.l_min = 4;
    sc.channel.l_max = 4;
    const double ts = 1.0 / sc.sounding.sample_rate_hz;
    sc.channel.delay_spread_s = 14.0 * ts;
    sc.channel.min_spacing_s = 2.0 * ts;
    sc.channel.decay_s = 20.0 * ts;
    sc.channel.rho = 1.0;
    sc.overlay.added.push_back({4.7 / kSpeedOfLight, {0.8, 0.0}, AntennaSel::Both});
    sc.overlay.blocked.push_back({AntennaSel::Both, 1, 0.0});
    return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& config_path) {
    std::ifstream in(config_path);
    if (!in)
        throw IoError(IoError::Kind::NotFound, "cannot open config: " + config_path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(IoError::Kind::BadFormat, config_path.string() + ": " + e.what());
    }

    ScenarioConfig sc = default_scenario();
    sc.overlay = {};
    try {
        if (j.contains("sounding")) {
            const auto& s = j["sounding"];
            sc.sounding.fft_size = s.value("fft_size", sc.sounding.fft_size);
            sc.sounding.n_on = s.value("n_on", sc.sounding.n_on);
            sc.sounding.sample_rate_hz = s.value("sample_rate_hz", sc.sounding.sample_rate_hz);
            if (s.contains("carriers_hz"))
                sc.sounding.carriers_hz = s["carriers_hz"].get<std::vector<double>>();
            sc.sounding.frames = s.value("frames", sc.sounding.frames);
            sc.sounding.hw_averages = s.value("hw_averages", sc.sounding.hw_averages);
            if (s.contains("snr_db")) {
                if (s["snr_db"].is_null())
                    sc.sounding.snr_db.reset();
                else
                    sc.sounding.snr_db = s["snr_db"].get<double>();
            }
        }
        if (j.contains("channel")) {
            const auto& c = j["channel"];
            sc.channel.l_min = c.value("l_min", sc.channel.l_min);
            sc.channel.l_max = c.value("l_max", sc.channel.l_max);
            sc.channel.delay_spread_s = c.value("delay_spread_s", sc.channel.delay_spread_s);
            sc.channel.min_spacing_s = c.value("min_spacing_s", sc.channel.min_spacing_s);
            sc.channel.decay_s = c.value("decay_s", sc.channel.decay_s);
            sc.channel.rho = c.value("cross_carrier_rho", sc.channel.rho);
        }
        if (j.contains("target")) {
            const auto& t = j["target"];
            for (const auto& a : t.value("added_paths", json::array())) {
                OverlaySpec::Add add;
                if (a.contains("extra_delay_s"))
                    add.extra_delay_s = a["extra_delay_s"].get<double>();
                else if (a.contains("extra_distance_m"))
                    add.extra_delay_s = a["extra_distance_m"].get<double>() / kSpeedOfLight;
                const auto g = a.value("gain", std::vector<double>{1.0, 0.0});
                if (g.size() != 2)
                    throw ConfigError("target gain must be [re, im]");
                add.gain = {g[0], g[1]};
                add.antenna = antenna_sel_from(a.value("antenna", std::string("both")));
                sc.overlay.added.push_back(add);
            }
            for (const auto& b : t.value("blocked", json::array())) {
                OverlaySpec::Block blk;
                blk.antenna = antenna_sel_from(b.value("antenna", std::string("both")));
                blk.tap_index = b.at("tap_index").get<std::size_t>();
                blk.factor = b.value("factor", 0.0);
                sc.overlay.blocked.push_back(blk);
            }
        }
        if (j.contains("placements"))
            sc.placements = j["placements"].get<std::vector<std::string>>();
        if (j.contains("orientations"))
            sc.orientations = j["orientations"].get<std::vector<std::string>>();
        if (j.contains("emit")) {
            const std::string emit = j["emit"].get<std::string>();
            if (emit == "framesets")
                sc.emit_framesets = true;
            else if (emit == "rx")
                sc.emit_framesets = false;
            else
                throw ConfigError("emit must be \"framesets\" or \"rx\"");
        }
    } catch (const json::exception& e) {
        throw IoError(IoError::Kind::BadFormat, config_path.string() + ": " + e.what());
    }
    sc.sounding.validate();
    return sc;
}

FrameSet synthesize_frameset(const MultipathChannel& ch, const SoundingConfig& cfg,
                             std::size_t carrier_idx, const std::string& antenna,
                             std::uint64_t seed) {
    cfg.validate();
    ch.validate(cfg);
    if (carrier_idx >= cfg.carriers_hz.size())
        throw ConfigError("synthesize_frameset: carrier index out of range");
    const AntennaChannel& ant = antenna == "a" ? ch.a : ch.b;
    const auto h = antenna_response(ant, carrier_idx, cfg);

    double p_sig = 0.0;
    for (const auto& v : h)
        p_sig += std::norm(v);
    p_sig /= static_cast<double>(cfg.n_on);

    double noise_var = 0.0;
    if (cfg.snr_db) {
        const double ref = p_sig > 0.0 ? p_sig : 1.0;
        noise_var = ref * std::pow(10.0, -*cfg.snr_db / 10.0) /
                    static_cast<double>(cfg.hw_averages);
    }

    Rng rng(derive_seed(seed, carrier_idx, antenna == "a" ? 0xA : 0xB));
    FrameSet fs;
    fs.rows.resize(static_cast<Eigen::Index>(cfg.frames), static_cast<Eigen::Index>(cfg.n_on));
    for (std::size_t f = 0; f < cfg.frames; ++f)
        for (std::size_t i = 0; i < cfg.n_on; ++i) {
            std::complex<double> w{0.0, 0.0};
            if (noise_var > 0.0)
                w = std::sqrt(noise_var) * rng.gauss_complex();
            fs.rows(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i)) = h[i] + w;
        }
    fs.carrier_hz = cfg.carriers_hz[carrier_idx];
    fs.fft_size = cfg.fft_size;
    fs.sample_rate_hz = cfg.sample_rate_hz;
    fs.antenna = antenna;
    return fs;
}

void run_simulate(const ScenarioConfig& scenario, const std::filesystem::path& out_dir,
                  std::uint64_t seed, TargetMode mode, const StageOptions& opts) {
    scenario.sounding.validate();
    std::filesystem::create_directories(out_dir);

    struct Job {
        std::string placement;
        std::string orientation;
        bool target;
        std::size_t carrier_idx;
        std::uint64_t channel_seed;
    };
    std::vector<Job> jobs;
    std::vector<std::tuple<std::string, std::string, bool, MultipathChannel>> truth;
    std::map<std::pair<std::string, std::string>, std::pair<MultipathChannel, MultipathChannel>>
        channels;

    std::size_t pl_idx = 0;
    for (const auto& placement : scenario.placements) {
        std::size_t or_idx = 0;
        for (const auto& orientation : scenario.orientations) {
            // One base channel per (placement, orientation); the target
            // overlay modifies that same geometry.
            const std::uint64_t ch_seed = derive_seed(seed, pl_idx, or_idx);
            const MultipathChannel base =
                sample_channel(scenario.channel, scenario.sounding, ch_seed);
            const MultipathChannel with_target = apply_target(
                base, scenario.overlay.materialize(base, scenario.sounding.carriers_hz.size()));
            channels[{placement, orientation}] = {base, with_target};

            for (bool target : {false, true}) {
                if ((mode == TargetMode::Off && target) || (mode == TargetMode::On && !target))
                    continue;
                truth.emplace_back(placement, orientation, target,
                                   target ? with_target : base);
                for (std::size_t c = 0; c < scenario.sounding.carriers_hz.size(); ++c)
                    jobs.push_back({placement, orientation, target, c,
                                    derive_seed(ch_seed, target ? 1 : 0, c)});
            }
            ++or_idx;
        }
        ++pl_idx;
    }

    write_ground_truth(out_dir / "ground_truth.json", truth);

    parallel_for(jobs.size(), opts.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        const auto& pair = channels.at({job.placement, job.orientation});
        const MultipathChannel& ch = job.target ? pair.second : pair.first;
        const std::string stem =
            dataset_stem(job.placement, job.orientation,
                         scenario.sounding.carriers_hz[job.carrier_idx], job.target);

        if (scenario.emit_framesets) {
            for (const char* ant : {"a", "b"}) {
                FrameSet fs = synthesize_frameset(ch, scenario.sounding, job.carrier_idx, ant,
                                                  job.channel_seed);
                fs.placement = job.placement;
                fs.orientation = job.orientation;
                fs.target = job.target;
                store_frameset(out_dir / (stem + "_ant" + ant + ".json"), fs,
                               scenario.sounding.hw_averages, scenario.sounding.snr_db);
            }
            log_line(opts, "simulate: wrote framesets " + stem);
        } else {
            // Stream the hardware averaging: synthesize hw_averages raw
            // windows per retained frame and keep their coherent mean.
            const auto x_a = gen_qpsk(kSoundingSeed, scenario.sounding.n_on);
            const auto x_b = derive_orthogonal(x_a);
            SoundingConfig burst = scenario.sounding;
            burst.frames = scenario.sounding.hw_averages;
            std::vector<RxFrame> retained;
            retained.reserve(scenario.sounding.frames);
            for (std::size_t f = 0; f < scenario.sounding.frames; ++f) {
                auto windows = synthesize_rx(ch, x_a, x_b, burst, job.carrier_idx,
                                             derive_seed(job.channel_seed, f));
                auto avg = hw_average(windows, burst.frames);
                retained.push_back(std::move(avg.front()));
            }
            store_rx_frames(out_dir / (stem + ".json"), retained, scenario.sounding, job.target,
                            job.placement, job.orientation);
            log_line(opts, "simulate: wrote rx frames " + stem);
        }
    });
}

void run_estimate(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                  const StageOptions& opts, const EstimatorOptions& est_opts) {
    const auto manifests = find_manifests(in_dir, PayloadKind::RxTime);
    if (manifests.empty())
        throw IoError(IoError::Kind::NotFound,
                      "no rx_time datasets found in " + in_dir.string());
    std::filesystem::create_directories(out_dir);

    parallel_for(manifests.size(), opts.threads, [&](std::size_t i) {
        const RxDataset ds = load_rx_frames(manifests[i]);
        SoundingConfig cfg;
        cfg.fft_size = ds.manifest.fft_size;
        cfg.n_on = ds.manifest.n_on;
        cfg.sample_rate_hz = ds.manifest.sample_rate_hz;
        cfg.frames = ds.manifest.n_frames;
        cfg.hw_averages = ds.manifest.hw_averages;
        cfg.snr_db = ds.manifest.snr_db;

        const auto x_a = gen_qpsk(kSoundingSeed, cfg.n_on);
        FrameSetPair pair = build_frameset(ds.frames, x_a, cfg, est_opts);
        for (FrameSet* fs : {&pair.a, &pair.b}) {
            fs->placement = ds.manifest.placement;
            fs->orientation = ds.manifest.orientation;
            fs->target = ds.manifest.target;
        }
        const std::string stem = manifests[i].stem().string();
        store_frameset(out_dir / (stem + "_anta.json"), pair.a, ds.manifest.hw_averages,
                       ds.manifest.snr_db);
        store_frameset(out_dir / (stem + "_antb.json"), pair.b, ds.manifest.hw_averages,
                       ds.manifest.snr_db);
        log_line(opts, "estimate: " + stem + " leakage " + std::to_string(pair.a.leakage));
    });
}

void run_music_stage(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                     const MusicParams& params, const StageOptions& opts) {
    const auto manifests = find_manifests(in_dir, PayloadKind::FrameSet);
    if (manifests.empty())
        throw IoError(IoError::Kind::NotFound,
                      "no frameset datasets found in " + in_dir.string());
    std::filesystem::create_directories(out_dir);

    parallel_for(manifests.size(), opts.threads, [&](std::size_t i) {
        const FrameSet fs = load_frameset(manifests[i]);
        const MusicResult res = run_music(fs, params);
        const std::string stem = manifests[i].stem().string();
        write_music_result(out_dir / ("music_" + stem + ".json"), res);

        // The classical trace alongside, for the report stage.
        const PdpTrace cir = frameset_cir_pdp(fs);
        std::ofstream csv(out_dir / ("cir_" + stem + ".csv"), std::ios::trunc);
        csv << "distance_m,value_db\n";
        for (std::size_t n = 0; n < cir.distance_m.size(); ++n)
            csv << cir.distance_m[n] << ',' << cir.value_db[n] << "\n";
        log_line(opts, "music: " + stem + " order " + std::to_string(res.order));
    });
}

void run_cluster_stage(const std::filesystem::path& in_dir, const ClusterOptions& copts,
                       const StageOptions& opts) {
    const auto files = find_music_results(in_dir);
    if (files.empty())
        throw IoError(IoError::Kind::NotFound, "no MUSIC results found in " + in_dir.string());

    // Pool peak sets per (carrier, target[, antenna]).
    struct Key {
        double carrier;
        bool target;
        std::string antenna;
        bool operator<(const Key& o) const {
            return std::tie(carrier, target, antenna) < std::tie(o.carrier, o.target, o.antenna);
        }
    };
    std::map<Key, std::vector<std::vector<double>>> pools;
    for (const auto& f : files) {
        const MusicResult res = read_music_result(f);
        Key key{res.carrier_hz, res.target, copts.pool_antennas ? std::string() : res.antenna};
        pools[key].push_back(res.peaks_s);
    }

    for (const auto& [key, peak_sets] : pools) {
        std::size_t skipped = 0;
        const auto samples = relative_delays(peak_sets, &skipped);
        if (skipped > 0)
            log_line(opts, "cluster: skipped " + std::to_string(skipped) + " empty peak sets");
        if (samples.empty())
            continue;
        const DelayClustering clustering = select_k(samples, copts.k_max, copts.seed);
        std::string stem = "cluster_c" + carrier_tag(key.carrier) +
                           (key.target ? "_t1" : "_t0");
        if (!key.antenna.empty())
            stem += "_ant" + key.antenna;
        write_clustering(in_dir / (stem + ".json"), in_dir / (stem + ".csv"), clustering,
                         samples, key.carrier, key.target);
    }
}

void run_report_stage(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                      const ReportOptions& ropts, const StageOptions& opts) {
    const auto files = find_music_results(in_dir);
    if (files.empty())
        throw IoError(IoError::Kind::NotFound, "no MUSIC results found in " + in_dir.string());
    std::filesystem::create_directories(out_dir);

    std::vector<MusicResult> results;
    results.reserve(files.size());
    for (const auto& f : files)
        results.push_back(read_music_result(f));

    const MultipathHistogram hist = multipath_histogram(results);
    const auto modes = hist.modes();

    // Pair with/without-target spectra per (carrier, placement, orientation,
    // antenna) for the region analysis.
    struct PairKey {
        double carrier;
        std::string placement, orientation, antenna;
        bool operator<(const PairKey& o) const {
            return std::tie(carrier, placement, orientation, antenna) <
                   std::tie(o.carrier, o.placement, o.orientation, o.antenna);
        }
    };
    std::map<PairKey, std::pair<const MusicResult*, const MusicResult*>> pairs;
    for (const auto& res : results) {
        PairKey key{res.carrier_hz, res.placement, res.orientation, res.antenna};
        auto& slot = pairs[key];
        (res.target ? slot.first : slot.second) = &res;
    }

    json report;
    report["format_version"] = kFormatVersion;
    json carriers = json::array();

    std::vector<double> carrier_list;
    for (const auto& res : results)
        if (std::find(carrier_list.begin(), carrier_list.end(), res.carrier_hz) ==
            carrier_list.end())
            carrier_list.push_back(res.carrier_hz);
    std::sort(carrier_list.begin(), carrier_list.end());

    for (double carrier : carrier_list) {
        json jc;
        jc["carrier_hz"] = carrier;

        json hists = json::array();
        for (const auto& [group, counts] : hist.counts) {
            if (group.carrier_hz != carrier)
                continue;
            json jg;
            jg["orientation"] = group.orientation;
            jg["target"] = group.target;
            json jcounts = json::object();
            for (const auto& [order, count] : counts)
                jcounts[std::to_string(order)] = count;
            jg["counts"] = std::move(jcounts);
            jg["mode"] = modes.at(group);
            hists.push_back(std::move(jg));
        }
        jc["histograms"] = std::move(hists);

        json pdps = json::array();
        json regions = json::array();
        for (const auto& [key, pair] : pairs) {
            if (key.carrier != carrier)
                continue;
            for (const MusicResult* res : {pair.second, pair.first}) {
                if (!res)
                    continue;
                const double origin = res->peaks_s.empty() ? 0.0 : res->peaks_s.front();
                const PdpTrace music = music_pdp_trace(*res, origin);
                json jp;
                jp["placement"] = res->placement;
                jp["orientation"] = res->orientation;
                jp["antenna"] = res->antenna;
                jp["target"] = res->target;
                json markers = json::array();
                for (double p : res->peaks_s)
                    markers.push_back((p - origin) * kSpeedOfLight);
                jp["peak_markers_m"] = std::move(markers);
                const std::string stem = "pdp_" + dataset_stem(res->placement, res->orientation,
                                                               carrier, res->target) +
                                         "_ant" + res->antenna;
                std::ofstream csv(out_dir / (stem + ".csv"), std::ios::trunc);
                csv << "distance_m,value_db\n";
                for (std::size_t n = 0; n < music.distance_m.size(); ++n)
                    csv << music.distance_m[n] << ',' << music.value_db[n] << "\n";
                jp["trace_csv"] = stem + ".csv";
                pdps.push_back(std::move(jp));
            }

            if (pair.first && pair.second) {
                const MusicResult& with_t = *pair.first;
                const MusicResult& without_t = *pair.second;
                const double origin =
                    without_t.peaks_s.empty() ? 0.0 : without_t.peaks_s.front();
                const RegionReport rr =
                    pn_regions(with_t, without_t, ropts.gamma_db, ropts.merge_width_m, origin);
                json jr;
                jr["placement"] = key.placement;
                jr["orientation"] = key.orientation;
                jr["antenna"] = key.antenna;
                json plist = json::array();
                for (const auto& iv : rr.p_regions)
                    plist.push_back({{"start_m", iv.start_m},
                                     {"end_m", iv.end_m},
                                     {"delta_db", iv.delta_db}});
                json nlist = json::array();
                for (const auto& iv : rr.n_regions)
                    nlist.push_back({{"start_m", iv.start_m},
                                     {"end_m", iv.end_m},
                                     {"delta_db", iv.delta_db}});
                jr["p_regions"] = std::move(plist);
                jr["n_regions"] = std::move(nlist);

                const std::string stem = "regions_" +
                                         dataset_stem(key.placement, key.orientation, carrier,
                                                      false) +
                                         "_ant" + key.antenna;
                std::ofstream csv(out_dir / (stem + ".csv"), std::ios::trunc);
                csv << "kind,start_m,end_m,delta_db\n";
                for (const auto& iv : rr.p_regions)
                    csv << "P," << iv.start_m << ',' << iv.end_m << ',' << iv.delta_db << "\n";
                for (const auto& iv : rr.n_regions)
                    csv << "N," << iv.start_m << ',' << iv.end_m << ',' << iv.delta_db << "\n";
                jr["regions_csv"] = stem + ".csv";
                regions.push_back(std::move(jr));
            }
        }
        jc["pdp_pairs"] = std::move(pdps);
        jc["regions"] = std::move(regions);
        carriers.push_back(std::move(jc));
    }
    report["carriers"] = std::move(carriers);

    std::ofstream out(out_dir / "report.json", std::ios::trunc);
    if (!out)
        throw IoError(IoError::Kind::NotFound, "cannot write report.json");
    out << report.dump(2) << "\n";
    log_line(opts, "report: wrote " + (out_dir / "report.json").string());
}

} // namespace mbcc
