// mbcc command line: simulate / estimate / music / cluster / report.
// Exit codes: 0 success, 1 input or configuration error, 2 numerical failure.

#include <CLI11.hpp>
#include <iostream>

#include "mbcc/errors.hpp"
#include "mbcc/pipeline.hpp"

namespace {

mbcc::TargetMode parse_target_mode(const std::string& s) {
    if (s == "on")
        return mbcc::TargetMode::On;
    if (s == "off")
        return mbcc::TargetMode::Off;
    if (s == "both")
        return mbcc::TargetMode::Both;
    throw mbcc::ConfigError("--target must be on, off, or both");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-band channel characterization pipeline"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::size_t threads = 0;
    bool verbose = false;
    app.add_option("--threads", threads, "Worker threads (0 = auto)")->capture_default_str();
    app.add_flag("--verbose", verbose, "Log progress to stderr");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Synthesize datasets from a scenario config");
    std::string sim_config;
    std::string sim_out;
    std::uint64_t sim_seed = 1;
    std::string sim_target = "both";
    sim->add_option("--config", sim_config, "Scenario JSON (omit for the built-in default)");
    sim->add_option("--out", sim_out, "Output dataset directory")->required();
    sim->add_option("--seed", sim_seed, "Base seed")->capture_default_str();
    sim->add_option("--target", sim_target, "Target state: on, off, or both")
        ->capture_default_str();

    // estimate
    auto* est = app.add_subcommand("estimate", "Raw RX frames to per-antenna FrameSets");
    std::string est_in, est_out;
    est->add_option("--in", est_in, "Directory with rx_time datasets")->required();
    est->add_option("--out", est_out, "Output directory")->required();

    // music
    auto* mus = app.add_subcommand("music", "Smoothed-covariance MUSIC per dataset");
    std::string mus_in, mus_out;
    std::size_t mus_nsub = 0, mus_lmax = 8, mus_q = 16;
    mus->add_option("--in", mus_in, "Directory with frameset datasets")->required();
    mus->add_option("--out", mus_out, "Output directory")->required();
    mus->add_option("--nsub", mus_nsub, "Smoothing subarray length (0 = ceil(n_on/2))")
        ->capture_default_str();
    mus->add_option("--lmax", mus_lmax, "Maximum model order for the elbow")
        ->capture_default_str();
    mus->add_option("--grid-oversample", mus_q, "Delay grid oversampling factor")
        ->capture_default_str();

    // cluster
    auto* clu = app.add_subcommand("cluster", "K-means over relative peak delays");
    std::string clu_in;
    std::size_t clu_kmax = 8;
    clu->add_option("--in", clu_in, "Directory with MUSIC results")->required();
    clu->add_option("--kmax", clu_kmax, "Maximum cluster count")->capture_default_str();

    // report
    auto* rep = app.add_subcommand("report", "Histograms, PDP pairs, and P/N regions");
    std::string rep_in, rep_out;
    double rep_gamma = 6.0, rep_width = 0.3;
    rep->add_option("--in", rep_in, "Directory with MUSIC results")->required();
    rep->add_option("--out", rep_out, "Output directory")->required();
    rep->add_option("--gamma", rep_gamma, "Region threshold in dB")->capture_default_str();
    rep->add_option("--merge-width", rep_width, "Region merge width in meters")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        mbcc::StageOptions opts;
        opts.threads = threads;
        opts.verbose = verbose;

        if (sim->parsed()) {
            const mbcc::ScenarioConfig scenario = sim_config.empty()
                                                      ? mbcc::default_scenario()
                                                      : mbcc::load_scenario(sim_config);
            mbcc::run_simulate(scenario, sim_out, sim_seed, parse_target_mode(sim_target), opts);
        } else if (est->parsed()) {
            mbcc::run_estimate(est_in, est_out, opts);
        } else if (mus->parsed()) {
            mbcc::MusicParams params;
            params.n_sub = mus_nsub;
            params.l_max = mus_lmax;
            params.oversample = mus_q;
            mbcc::run_music_stage(mus_in, mus_out, params, opts);
        } else if (clu->parsed()) {
            mbcc::ClusterOptions copts;
            copts.k_max = clu_kmax;
            mbcc::run_cluster_stage(clu_in, copts, opts);
        } else if (rep->parsed()) {
            mbcc::ReportOptions ropts;
            ropts.gamma_db = rep_gamma;
            ropts.merge_width_m = rep_width;
            mbcc::run_report_stage(rep_in, rep_out, ropts, opts);
        }
    } catch (const mbcc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const mbcc::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const mbcc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
