// evmarker command line: detect, simulate, bench, gen-dict.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evmarker/dictionary.hpp"
#include "evmarker/dump.hpp"
#include "evmarker/io.hpp"
#include "evmarker/metrics.hpp"
#include "evmarker/pipeline.hpp"
#include "evmarker/simulator.hpp"

using namespace evm;

namespace {

MarkerDictionary pick_dictionary(const std::string& path) {
    return path.empty() ? builtin_dictionary() : load_dictionary(path);
}

int run_detect(const std::string& events_path, const std::string& truth_path, const std::string& dump_dir,
               const std::string& config_path, const std::string& dict_path, const std::string& out_path,
               bool parallel) {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    const EventFile ef = read_events(events_path);
    if (ef.geometry != cfg.geometry())
        std::fprintf(stderr, "note: using sensor size %dx%d from the event file\n", ef.geometry.width,
                     ef.geometry.height);
    cfg.W = ef.geometry.width;
    cfg.H = ef.geometry.height;
    const MarkerDictionary dict = pick_dictionary(dict_path);

    const auto packets = packetize(ef.events, cfg.window_us, cfg.geometry());
    std::vector<PacketResult> results;
    if (!dump_dir.empty()) {
        int files = 0;
        for (std::size_t i = 0; i < packets.size(); ++i) {
            PacketTrace trace;
            results.push_back(detect_packet(packets[i], cfg, dict, &trace));
            results.back().packet_index = i;
            files += dump_stages(dump_dir, i, trace, cfg);
        }
        std::fprintf(stderr, "wrote %d images to %s\n", files, dump_dir.c_str());
    } else {
        results = detect_packets(packets, cfg, dict, parallel);
    }

    const auto records = to_records(results);
    if (out_path.empty()) {
        write_report(std::cout, records);
    } else {
        std::ofstream out(out_path);
        if (!out) throw ParseError("cannot write " + out_path);
        write_report(out, records);
    }

    if (!truth_path.empty()) {
        const auto truth = read_truth(truth_path);
        const DetectionMetrics m = evaluate(records, truth);
        std::fprintf(stderr, "frame detection %s (%zu/%zu), pass detection %s (%zu/%zu), wrong id %zu\n",
                     format_rate(m.frame_rate()).c_str(), m.detected_frames, m.visible_frames,
                     format_rate(m.pass_rate()).c_str(), m.detected_passes, m.passes, m.wrong_id);
    }
    std::fprintf(stderr, "%s", format_summary(summarize_timings(results)).c_str());
    return 0;
}

void write_sim(const std::string& prefix, const SimConfig& cfg) {
    const SimResult r = simulate(cfg);
    write_events(prefix + ".csv", cfg.geometry, r.events);
    write_truth(prefix + ".truth.csv", r.truth);
}

int run_bench(const std::string& source, const std::string& config_path, std::size_t min_packets) {
    const PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    const MarkerDictionary& dict = builtin_dictionary();
    std::vector<EventPacket> packets;
    if (source == "suite") {
        SuiteOptions opts;
        opts.noise_fraction = 0.05;
        opts.timestamp_jitter_us = 200.0;
        opts.include_failure_cases = false;
        for (const SuiteCase& c : motion_suite(dict, opts)) {
            const SimResult r = simulate(c.config);
            auto p = packetize(r.events, cfg.window_us, cfg.geometry());
            packets.insert(packets.end(), p.begin(), p.end());
        }
    } else {
        const EventFile ef = read_events(source);
        packets = packetize(ef.events, cfg.window_us, ef.geometry);
    }
    if (packets.empty()) {
        std::fprintf(stderr, "no packets\n");
        return 1;
    }
    // warm-up pass, then repeat until enough packets were timed
    detect_packets(packets, cfg, dict);
    std::vector<PacketResult> all;
    while (all.size() < min_packets) {
        auto r = detect_packets(packets, cfg, dict);
        all.insert(all.end(), r.begin(), r.end());
    }
    std::printf("%s", format_summary(summarize_timings(all)).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera marker detection"};
    app.require_subcommand(1);

    std::string events_path, truth_path, dump_dir, config_path, dict_path, out_path;
    bool parallel = false;
    auto* detect = app.add_subcommand("detect", "Detect markers in an event CSV file");
    detect->add_option("events", events_path, "Event CSV")->required()->check(CLI::ExistingFile);
    detect->add_option("--truth", truth_path, "Ground-truth sidecar; prints frame/pass rates")->check(CLI::ExistingFile);
    detect->add_option("--dump-stages", dump_dir, "Write per-packet stage images here");
    detect->add_option("--config", config_path, "key = value parameter file")->check(CLI::ExistingFile);
    detect->add_option("--dict", dict_path, "Dictionary file (default: builtin)")->check(CLI::ExistingFile);
    detect->add_option("-o,--out", out_path, "Report path (default: stdout)");
    detect->add_flag("--parallel", parallel, "Process packets on all OpenMP threads");

    std::string prefix;
    bool suite = false;
    int sim_id = 0;
    std::vector<double> velocity{2.0, 0.0};
    double duration = 100.0, noise = 0.0, jitter = 0.0, side = 88.0;
    std::uint64_t seed = 1;
    std::vector<double> start;
    auto* sim = app.add_subcommand("simulate", "Write synthetic events and ground truth");
    sim->add_option("out-prefix", prefix, "Writes <prefix>.csv and <prefix>.truth.csv")->required();
    sim->add_flag("--suite", suite, "Write every motion-suite case as <prefix>_<case>");
    sim->add_option("--id", sim_id, "Marker id");
    sim->add_option("--velocity", velocity, "vx vy in px/ms")->expected(2);
    sim->add_option("--start", start, "Marker top-left at t=0 (default: sweep through the center)")->expected(2);
    sim->add_option("--duration", duration, "ms");
    sim->add_option("--noise", noise, "Noise events as a fraction of signal events");
    sim->add_option("--jitter", jitter, "Timestamp jitter std-dev in us");
    sim->add_option("--side", side, "Marker side in px");
    sim->add_option("--seed", seed, "RNG seed");

    std::string bench_source;
    std::size_t min_packets = 1000;
    auto* bench = app.add_subcommand("bench", "Per-stage timing, single thread");
    bench->add_option("events-or-suite", bench_source, "Event CSV, or 'suite' for the noisy motion suite")->required();
    bench->add_option("--config", config_path, "key = value parameter file")->check(CLI::ExistingFile);
    bench->add_option("--min-packets", min_packets, "Repeat until this many packets were timed");

    std::string dict_out;
    std::size_t count = 16;
    int size = 6, min_distance = 10;
    std::uint64_t dict_seed = kBuiltinDictionarySeed;
    auto* gen = app.add_subcommand("gen-dict", "Generate a rotation-aware marker dictionary");
    gen->add_option("out", dict_out, "Output file")->required();
    gen->add_option("--count", count, "Number of markers");
    gen->add_option("--size", size, "Code grid side N_m");
    gen->add_option("--seed", dict_seed, "RNG seed");
    gen->add_option("--min-distance", min_distance, "Minimum Hamming distance under rotation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*detect) return run_detect(events_path, truth_path, dump_dir, config_path, dict_path, out_path, parallel);
        if (*sim) {
            if (suite) {
                SuiteOptions opts;
                opts.noise_fraction = noise;
                opts.timestamp_jitter_us = jitter;
                opts.marker_side_px = side;
                opts.seed = seed;
                const auto cases = motion_suite(builtin_dictionary(), opts);
                for (const SuiteCase& c : cases) write_sim(prefix + "_" + c.name, c.config);
                std::fprintf(stderr, "wrote %zu cases\n", cases.size());
                return 0;
            }
            SuiteOptions opts;
            opts.marker_side_px = side;
            SimConfig cfg = sweep_config(sim_id, {velocity[0], velocity[1]}, std::hypot(velocity[0], velocity[1]), opts);
            if (!start.empty()) {
                cfg.start = {start[0], start[1]};
                cfg.duration_ms = duration;
            }
            cfg.noise_fraction = noise;
            cfg.timestamp_jitter_us = jitter;
            cfg.seed = seed;
            write_sim(prefix, cfg);
            return 0;
        }
        if (*bench) return run_bench(bench_source, config_path, min_packets);
        if (*gen) {
            const MarkerDictionary d = generate_dictionary(count, size, dict_seed, min_distance);
            std::ofstream out(dict_out);
            if (!out) throw ParseError("cannot write " + dict_out);
            write_dictionary(out, d);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
