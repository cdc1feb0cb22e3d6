/*
 * Copyright 2026 The sgdma-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sgdma/cli.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sgdma/config.hpp"
#include "sgdma/csm.hpp"
#include "sgdma/harness.hpp"
#include "sgdma/plot.hpp"

namespace fs = std::filesystem;

namespace sgdma {
namespace {

struct Options {
    std::string config;
    std::string out_dir = "sgdma_out";
    std::string in;
    std::string emit;
    std::vector<std::string> sets;
    std::uint32_t trials = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string plot_format = "svg";
    unsigned threads = 0;
};

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::BadArgs: return kExitBadArgs;
        case ErrorCode::ConfigInvalid: return kExitConfigInvalid;
        case ErrorCode::IoError: return kExitIoError;
        default: return kExitRuntime;
    }
}

void report_error(std::ostream& err, std::string_view code, std::string_view what) {
    err << nlohmann::json{{"error", code}, {"message", what}}.dump() << "\n";
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    return f;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + p.string());
    return f;
}

SystemConfig effective_config(const Options& o) {
    auto sets = o.sets;
    if (o.trials > 0) sets.push_back(fmt::format("sweep.trials_per_point={}", o.trials));
    if (o.seed_given) {
        sets.push_back(fmt::format("sweep.base_seed={}", o.seed));
        sets.push_back(fmt::format("ring.rng_seed={}", o.seed));
    }
    auto cfg = load_config(o.config, sets);
    cfg.validate();
    return cfg;
}

// Every run leaves its full effective configuration next to its outputs.
fs::path prepare_out(const Options& o, const SystemConfig& cfg) {
    const fs::path dir = o.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    open_out(dir / "effective_config.json") << to_json(cfg).dump(2) << "\n";
    return dir;
}

std::vector<Histogram> ring_creation_histograms(const SystemConfig& cfg) {
    std::vector<Histogram> out;
    for (const auto* cpu : {&cfg.psmodel.apu, &cfg.psmodel.rpu}) {
        const auto s = simulate_ring_creation(*cpu, cfg.psmodel.histogram_n_bds, cfg.psmodel.histogram_trials);
        out.push_back(make_log_histogram(std::string(to_string(cpu->kind)), s, 10.0, 1e6));
    }
    return out;
}

void write_ring_creation_csv(std::ostream& out, const SystemConfig& cfg) {
    out << "cpu,n_bds,trials,per_bd_ns_median,per_bd_ns_min,per_bd_ns_max\n";
    for (const auto* cpu : {&cfg.psmodel.apu, &cfg.psmodel.rpu})
        for (auto n : cfg.sweep.n_bds) {
            const auto s = simulate_ring_creation(*cpu, n, cfg.psmodel.trials_per_size);
            const auto st = summarize(s);
            out << fmt::format("{},{},{},{:.3f},{:.3f},{:.3f}\n", to_string(cpu->kind), n, cfg.psmodel.trials_per_size,
                               st.median, st.min, st.max);
        }
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    const auto dir = prepare_out(o, cfg);
    const auto res = run_sweep(cfg.sweep, cfg, o.threads);
    {
        auto f = open_out(dir / "sweep.csv");
        write_sweep_csv(f, res);
    }
    {
        auto f = open_out(dir / "ring_creation.csv");
        write_ring_creation_csv(f, cfg);
    }
    {
        auto f = open_out(dir / "ring_creation_hist.csv");
        write_histogram_csv(f, ring_creation_histograms(cfg));
    }
    const auto rep = check_requirement(res, cfg.requirement);
    out << fmt::format("sweep: {} points x {} trials -> {}\n", res.rows.size(), cfg.sweep.trials_per_point,
                       (dir / "sweep.csv").string());
    out << fmt::format("worst throughput {:.3f} MB/s, requirement {:.3f} MB/s: {}\n", rep.worst_MBps,
                       rep.required_MBps, rep.pass ? "PASS" : "FAIL");
    return kExitOk;
}

int cmd_trace(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    const auto dir = prepare_out(o, cfg);
    const auto& rd = cfg.ring;
    const auto ring = create_ring({rd.n_bds, rd.bytes_per_bd, rd.placement, rd.rng_seed, rd.n_cycles});
    const SweepPoint p{rd.bytes_per_bd, rd.n_bds, rd.n_cycles, rd.placement};
    const auto draw = draw_trial(cfg.sweep, p, rd.trial, cfg.ddr);

    const Tick c = cfg.engine.bus.cycle();
    const Tick start = static_cast<Tick>(cfg.csm.setup_cycles) * c;
    DdrState ddr(DdrTiming::from(cfg.ddr, draw.refresh_phase));
    ddr.add_backlog(start, draw.start_backlog);
    const auto trace = run_mm2s(ring, cfg.engine, ddr, start);
    {
        auto f = open_out(dir / "trace.csv");
        write_trace_csv(f, trace);
    }
    const auto csm = run_csm(make_scenario(trace, 0, start), cfg.csm.latency_mode);
    const auto counts = count_ddr_transactions(trace);
    nlohmann::json j = {
        {"n_bds", rd.n_bds},
        {"bytes_per_bd", rd.bytes_per_bd},
        {"n_cycles", rd.n_cycles},
        {"placement", to_string(rd.placement)},
        {"refresh_phase_ns", ticks_to_ns(draw.refresh_phase)},
        {"start_backlog_ns", ticks_to_ns(draw.start_backlog)},
        {"latency_ns", trace.latency_ns()},
        {"throughput_MBps", trace.throughput_MBps()},
        {"refresh_stalls", trace.stalls.size()},
        {"ddr", {{"bd_fetches", counts.bd_fetches},
                 {"buffer_fetches", counts.buffer_fetches},
                 {"status_writes", counts.status_writes}}},
        {"csm",
         {{"setup_cycles", csm.counters.setup_cycles},
          {"latency_cycles", csm.counters.latency_cycles},
          {"throughput_cycles", csm.counters.throughput_cycles},
          {"latency_ns", csm.latency_ns()},
          {"throughput_MBps", csm.throughput_MBps(trace.payload_bytes_total)}}},
    };
    open_out(dir / "summary.json") << j.dump(2) << "\n";
    out << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    const auto dir = prepare_out(o, cfg);
    const auto res = calibrate(cfg);
    {
        auto f = open_out(dir / "calibration.csv");
        write_calibration_report(f, res);
    }
    open_out(dir / "calibrated_config.json") << to_json(res.fitted).dump(2) << "\n";
    write_calibration_report(out, res);
    return kExitOk;
}

int cmd_ring_check(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    const auto dir = prepare_out(o, cfg);
    const MemoryMap map;
    BdRing ring;
    if (!o.emit.empty()) {
        const auto& rd = cfg.ring;
        ring = create_ring({rd.n_bds, rd.bytes_per_bd, rd.placement, rd.rng_seed, rd.n_cycles}, map);
        write_ring_image(o.emit, serialize_ring(ring, map));
        out << fmt::format("wrote {} descriptors to {}\n", ring.descriptors.size(), o.emit);
    } else if (!o.in.empty()) {
        ring = deserialize_ring(read_ring_image(o.in), map.ring_base());
    } else {
        throw Error(ErrorCode::BadArgs, "ring-check needs --in <image> or --emit <image>");
    }
    const auto rep = validate_ring(ring, map);
    nlohmann::json j = {{"descriptors", ring.descriptors.size()}, {"ok", rep.ok()}};
    auto& v = j["violations"] = nlohmann::json::array();
    for (const auto& x : rep.violations)
        v.push_back({{"kind", to_string(x.kind)}, {"bd_index", x.bd_index}, {"detail", x.detail}});
    open_out(dir / "ring_check.json") << j.dump(2) << "\n";
    out << j.dump(2) << "\n";
    return rep.ok() ? kExitOk : kExitCheckFailed;
}

int cmd_plot(const Options& o, std::ostream& out) {
    if (o.plot_format != "svg")
        throw Error(ErrorCode::BadArgs, fmt::format("unsupported plot format '{}' (supported: svg)", o.plot_format));
    const auto cfg = effective_config(o);
    const auto dir = prepare_out(o, cfg);
    const fs::path in = o.in.empty() ? dir : fs::path(o.in);
    std::vector<std::string> written;
    {
        auto f = open_in(in / "sweep.csv");
        const auto r = read_sweep_csv(f);
        auto t = open_out(dir / "throughput_vs_bytes.svg");
        plot_throughput_vs_bytes(t, r);
        auto l = open_out(dir / "latency_band.svg");
        plot_latency_band(l, r);
        written.push_back("throughput_vs_bytes.svg");
        written.push_back("latency_band.svg");
    }
    if (fs::exists(in / "ring_creation_hist.csv")) {
        auto f = open_in(in / "ring_creation_hist.csv");
        const auto h = read_histogram_csv(f);
        auto s = open_out(dir / "ring_creation_hist.svg");
        plot_histograms(s, h);
        written.push_back("ring_creation_hist.svg");
    }
    for (const auto& w : written) out << (dir / w).string() << "\n";
    return kExitOk;
}

int cmd_requirement_check(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    const auto dir = prepare_out(o, cfg);
    SweepResult res;
    if (!o.in.empty()) {
        auto f = open_in(o.in);
        res = read_sweep_csv(f);
    } else {
        res = run_sweep(cfg.sweep, cfg, o.threads);
    }
    const auto rep = check_requirement(res, cfg.requirement);
    nlohmann::json j = {{"result", rep.pass ? "PASS" : "FAIL"},
                        {"required_MBps", rep.required_MBps},
                        {"worst_MBps", rep.worst_MBps},
                        {"margin_ratio", rep.margin()},
                        {"points_checked", rep.points_checked},
                        {"worst_point",
                         {{"bytes_per_bd", rep.worst_point.bytes_per_bd},
                          {"n_bds", rep.worst_point.n_bds},
                          {"n_cycles", rep.worst_point.n_cycles},
                          {"placement", to_string(rep.worst_point.placement)}}}};
    open_out(dir / "requirement.json") << j.dump(2) << "\n";
    out << fmt::format("{}: worst throughput {:.3f} MB/s {} required {:.3f} MB/s (margin {:.2f}x, {} points)\n",
                       rep.pass ? "PASS" : "FAIL", rep.worst_MBps, rep.pass ? ">=" : "<", rep.required_MBps,
                       rep.margin(), rep.points_checked);
    return rep.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"SG-DMA MM2S transfer simulator", "sgdma_sim"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file (defaults when omitted)");
        sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
        sub->add_option("--set", o.sets, "override a config value, key.path=value")->take_all();
        sub->add_option("--trials", o.trials, "trials per sweep point");
        sub->add_option("--seed", o.seed, "base seed for sweeps and ring placement")->each([&](const std::string&) {
            o.seed_given = true;
        });
        sub->add_option("--threads", o.threads, "worker threads (0 = SGDMA_SIM_THREADS or all cores)");
    };

    struct Verb {
        const char* name;
        const char* help;
        int (*fn)(const Options&, std::ostream&);
    };
    const Verb verbs[] = {
        {"sweep", "run the parameter sweep and write result CSVs", cmd_sweep},
        {"trace", "simulate one ring and write its event trace", cmd_trace},
        {"calibrate", "fit DDR and engine parameters to the targets", cmd_calibrate},
        {"ring-check", "validate a ring image or emit one from the config", cmd_ring_check},
        {"plot", "render result CSVs to image files", cmd_plot},
        {"requirement-check", "check the minimum-throughput requirement", cmd_requirement_check},
    };
    int (*selected)(const Options&, std::ostream&) = nullptr;
    for (const auto& v : verbs) {
        auto* sub = app.add_subcommand(v.name, v.help);
        add_common(sub);
        sub->callback([&selected, fn = v.fn] { selected = fn; });
        const std::string name = v.name;
        if (name == "ring-check") {
            sub->add_option("--in", o.in, "ring image to validate");
            sub->add_option("--emit", o.emit, "write a ring image built from the config");
        } else if (name == "plot") {
            sub->add_option("--in", o.in, "directory holding sweep.csv (default: --out)");
            sub->add_option("--plot-format", o.plot_format, "image format")->capture_default_str();
        } else if (name == "requirement-check") {
            sub->add_option("--in", o.in, "existing sweep.csv (runs a sweep when omitted)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, to_string(ErrorCode::BadArgs), e.what());
        return kExitBadArgs;
    }

    try {
        return selected(o, out);
    } catch (const Error& e) {
        report_error(err, to_string(e.code()), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        report_error(err, "InternalError", e.what());
        return kExitRuntime;
    }
}

}  // namespace sgdma
