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

#include "sgdma/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "sgdma/rng.hpp"

namespace sgdma {

StatsSummary summarize(std::span<const double> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptySamples, "summarize needs at least one sample");
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    return {v[(v.size() - 1) / 2], v.front(), v.back()};
}

std::uint64_t point_hash(const SweepPoint& p) {
    return fnv1a(fmt::format("{}|{}|{}|{}", p.bytes_per_bd, p.n_bds, p.n_cycles, to_string(p.placement)));
}

std::vector<SweepPoint> expand_points(const SweepSpec& spec) {
    std::vector<Placement> placements;
    if (spec.placement != PlacementSet::Random) placements.push_back(Placement::Sequential);
    if (spec.placement != PlacementSet::Sequential) placements.push_back(Placement::Random);
    std::vector<SweepPoint> out;
    for (auto b : spec.bytes_per_bd)
        for (auto n : spec.n_bds)
            for (auto c : spec.n_cycles)
                for (auto pl : placements) out.push_back({b, n, c, pl});
    return out;
}

TrialDraw draw_trial(const SweepSpec& spec, const SweepPoint& p, std::uint32_t trial, const DdrConfig& ddr) {
    // The base seed is mixed first; a raw base ^ t would make nearby base
    // seeds permutations of each other's trial sets.
    std::uint64_t seed = splitmix64(spec.base_seed) ^ trial;
    if (!spec.common_random_numbers) seed ^= point_hash(p);
    Rng rng(splitmix64(seed));
    TrialDraw d;
    d.refresh_phase = static_cast<Tick>(uniform_below(rng, static_cast<std::uint64_t>(ns_to_ticks(ddr.refresh_period_ns))));
    d.start_backlog = static_cast<Tick>(uniform_below(rng, static_cast<std::uint64_t>(ns_to_ticks(ddr.start_backlog_max_ns)) + 1));
    return d;
}

RunSummary run_trial(const SystemConfig& cfg, const SweepPoint& p, const TrialDraw& draw, FastPathCache* cache) {
    DdrState ddr(DdrTiming::from(cfg.ddr, draw.refresh_phase));
    ddr.add_backlog(0, draw.start_backlog);
    // Timing depends only on descriptor lengths and region classes, so a
    // ring of identical descriptors runs as a plain count.
    return run_mm2s_uniform(static_cast<std::uint64_t>(p.n_bds) * p.n_cycles, p.bytes_per_bd, cfg.engine, ddr, 0,
                            cache);
}

std::vector<RunSummary> run_point(const SweepSpec& spec, const SystemConfig& cfg, const SweepPoint& p,
                                  FastPathCache* cache) {
    // Ring construction enforces the region capacity limits for the point.
    RingSpec rs{p.n_bds, p.bytes_per_bd, p.placement, spec.base_seed ^ point_hash(p), p.n_cycles};
    create_ring(rs);
    std::vector<RunSummary> out;
    out.reserve(spec.trials_per_point);
    for (std::uint32_t t = 0; t < spec.trials_per_point; ++t)
        out.push_back(run_trial(cfg, p, draw_trial(spec, p, t, cfg.ddr), cache));
    return out;
}

unsigned default_thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SGDMA_SIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

SweepResult run_sweep(const SweepSpec& spec, const SystemConfig& cfg, unsigned threads) {
    spec.validate();
    cfg.ddr.validate();
    cfg.engine.validate();
    const auto points = expand_points(spec);
    SweepResult res;
    res.requirement_MBps = cfg.requirement.min_throughput_MBps;
    res.rows.resize(points.size());

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto worker = [&] {
        FastPathCache cache;
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            try {
                const auto runs = run_point(spec, cfg, points[i], &cache);
                std::vector<double> lat, thr;
                for (const auto& r : runs) {
                    lat.push_back(r.latency_ns());
                    thr.push_back(r.throughput_MBps());
                }
                auto& row = res.rows[i];
                row.point = points[i];
                row.trials = spec.trials_per_point;
                row.latency_ns = summarize(lat);
                row.throughput_MBps = summarize(thr);
                row.meets_requirement = row.throughput_MBps.min >= cfg.requirement.min_throughput_MBps;
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!err) err = std::current_exception();
                next = points.size();
                return;
            }
        }
    };
    if (threads == 0) threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(points.size(), 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
    return res;
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
    out << "bytes_per_bd,n_bds,n_cycles,placement,trials,"
           "latency_ns_median,latency_ns_min,latency_ns_max,"
           "throughput_MBps_median,throughput_MBps_min,throughput_MBps_max,"
           "requirement_MBps,requirement_pass\n";
    for (const auto& row : r.rows) {
        const auto& p = row.point;
        out << fmt::format("{},{},{},{},{},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{}\n", p.bytes_per_bd,
                           p.n_bds, p.n_cycles, to_string(p.placement), row.trials, row.latency_ns.median,
                           row.latency_ns.min, row.latency_ns.max, row.throughput_MBps.median,
                           row.throughput_MBps.min, row.throughput_MBps.max, r.requirement_MBps,
                           row.meets_requirement ? "PASS" : "FAIL");
    }
}

SweepResult read_sweep_csv(std::istream& in) {
    SweepResult r;
    std::string line;
    if (!std::getline(in, line) || line.rfind("bytes_per_bd,", 0) != 0)
        throw Error(ErrorCode::IoError, "not a sweep result CSV (bad header)");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 13) throw Error(ErrorCode::IoError, fmt::format("sweep CSV line {}: expected 13 fields", lineno));
        try {
            SweepRow row;
            row.point.bytes_per_bd = static_cast<std::uint32_t>(std::stoul(f[0]));
            row.point.n_bds = static_cast<std::uint32_t>(std::stoul(f[1]));
            row.point.n_cycles = static_cast<std::uint32_t>(std::stoul(f[2]));
            row.point.placement = placement_from_string(f[3]);
            row.trials = static_cast<std::uint32_t>(std::stoul(f[4]));
            row.latency_ns = {std::stod(f[5]), std::stod(f[6]), std::stod(f[7])};
            row.throughput_MBps = {std::stod(f[8]), std::stod(f[9]), std::stod(f[10])};
            r.requirement_MBps = std::stod(f[11]);
            row.meets_requirement = f[12] == "PASS";
            r.rows.push_back(row);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::IoError, fmt::format("sweep CSV line {}: malformed number", lineno));
        }
    }
    return r;
}

RequirementReport check_requirement(const SweepResult& r, const RequirementConfig& req) {
    RequirementReport rep;
    rep.required_MBps = req.min_throughput_MBps;
    rep.worst_MBps = std::numeric_limits<double>::infinity();
    for (const auto& row : r.rows) {
        if (row.point.bytes_per_bd < req.min_bytes_per_bd) continue;
        ++rep.points_checked;
        if (row.throughput_MBps.min < rep.worst_MBps) {
            rep.worst_MBps = row.throughput_MBps.min;
            rep.worst_point = row.point;
        }
    }
    rep.pass = rep.points_checked > 0 && rep.worst_MBps >= rep.required_MBps;
    if (rep.points_checked == 0) rep.worst_MBps = 0.0;
    return rep;
}

// ---- calibration ----

void CalibrationParams::apply(SystemConfig& cfg) const {
    cfg.ddr.base_access_ns = base_access_ns;
    cfg.ddr.row_switch_penalty_ns = row_switch_penalty_ns;
    cfg.engine.per_bd_overhead_cycles = per_bd_overhead_cycles;
    cfg.ddr.start_backlog_max_ns = start_backlog_max_ns;
}

CalibrationParams CalibrationParams::from(const SystemConfig& cfg) {
    return {cfg.ddr.base_access_ns, cfg.ddr.row_switch_penalty_ns, cfg.engine.per_bd_overhead_cycles,
            cfg.ddr.start_backlog_max_ns};
}

namespace {

RunSummary probe(const SystemConfig& cfg, std::uint64_t n_total, std::uint32_t bytes, Tick phase, Tick backlog,
                 FastPathCache* cache) {
    DdrState ddr(DdrTiming::from(cfg.ddr, phase));
    ddr.add_backlog(0, backlog);
    return run_mm2s_uniform(n_total, bytes, cfg.engine, ddr, 0, cache);
}

// Refresh phases that can touch a run lasting `horizon` from t = 0: windows
// starting inside the run, or one still open at t = 0. One phase far from
// the run stands for all the others.
std::vector<Tick> relevant_phases(const SystemConfig& cfg, Tick horizon) {
    const Tick T = ns_to_ticks(cfg.ddr.refresh_period_ns);
    const Tick stall = ns_to_ticks(cfg.ddr.refresh_stall_ns);
    const Tick step = std::max<Tick>(1, ns_to_ticks(cfg.calibration.phase_step_ns));
    std::vector<Tick> out;
    if (horizon + stall >= T) {
        for (Tick p = 0; p < T; p += step) out.push_back(p);
        return out;
    }
    for (Tick p = 0; p <= horizon; p += step) out.push_back(p);
    for (Tick p = T - stall; p < T; p += step) out.push_back(p);
    out.push_back(std::min(T - 1, horizon + (T - stall - horizon) / 2));
    return out;
}

}  // namespace

TargetMetrics evaluate_targets(const SystemConfig& cfg, FastPathCache* cache) {
    const auto& tg = cfg.calibration.targets;
    const Tick T = ns_to_ticks(cfg.ddr.refresh_period_ns);
    const Tick backlog_max = ns_to_ticks(cfg.ddr.start_backlog_max_ns);
    TargetMetrics m;

    // Latency of the first descriptor; independent of ring size.
    {
        const std::uint32_t bytes = cfg.requirement.min_bytes_per_bd;
        const auto far = probe(cfg, 1, bytes, T / 2, backlog_max, cache);
        const auto phases = relevant_phases(cfg, far.first_s_axis + ns_to_ticks(cfg.ddr.refresh_stall_ns));
        m.latency_min_ns = std::numeric_limits<double>::infinity();
        m.latency_max_ns = 0.0;
        for (Tick ph : phases) {
            m.latency_min_ns = std::min(m.latency_min_ns, probe(cfg, 1, bytes, ph, 0, cache).latency_ns());
            m.latency_max_ns = std::max(m.latency_max_ns, probe(cfg, 1, bytes, ph, backlog_max, cache).latency_ns());
        }
    }

    // Worst throughput at the smallest payload: short runs over all refresh
    // alignments, long runs over a handful of phases.
    {
        const std::uint32_t bytes = cfg.requirement.min_bytes_per_bd;
        const std::uint32_t n_min = *std::min_element(cfg.sweep.n_bds.begin(), cfg.sweep.n_bds.end());
        const std::uint32_t c_min = *std::min_element(cfg.sweep.n_cycles.begin(), cfg.sweep.n_cycles.end());
        const std::uint64_t shortest = static_cast<std::uint64_t>(n_min) * c_min;
        m.worst_throughput_MBps = std::numeric_limits<double>::infinity();
        for (std::uint64_t n : {shortest, 2 * shortest, 4 * shortest}) {
            const auto far = probe(cfg, n, bytes, T / 2, backlog_max, cache);
            for (Tick ph : relevant_phases(cfg, far.done + ns_to_ticks(cfg.ddr.refresh_stall_ns)))
                for (Tick bl : {Tick{0}, backlog_max})
                    m.worst_throughput_MBps =
                        std::min(m.worst_throughput_MBps, probe(cfg, n, bytes, ph, bl, cache).throughput_MBps());
        }
        for (std::uint64_t n : {std::uint64_t{256}, std::uint64_t{4096}})
            for (int k = 0; k < 8; ++k)
                m.worst_throughput_MBps = std::min(
                    m.worst_throughput_MBps, probe(cfg, n, bytes, T * k / 8, backlog_max * (k % 2), cache).throughput_MBps());
    }

    // Saturation at the crossover payload.
    {
        std::vector<double> ratios;
        for (int k = 0; k < 9; ++k)
            ratios.push_back(probe(cfg, 2048, tg.saturation_bytes_per_bd, T * k / 9, backlog_max * (k % 2), cache)
                                 .throughput_MBps() /
                             cfg.engine.bus.max_bandwidth_MBps());
        m.saturation_ratio = summarize(ratios).median;
    }
    return m;
}

std::vector<Residual> residuals(const TargetMetrics& m, const CalibrationTargets& t) {
    auto two_sided = [](std::string name, double target, double got) {
        return Residual{std::move(name), target, got, std::abs(got - target) / target, false};
    };
    // Above the floor is free; below it counts in full.
    auto floor = [](std::string name, double target, double got) {
        return Residual{std::move(name), target, got, got >= target ? 0.0 : (target - got) / target, true};
    };
    return {two_sided("latency_min_ns", t.latency_min_ns, m.latency_min_ns),
            two_sided("latency_max_ns", t.latency_max_ns, m.latency_max_ns),
            two_sided("worst_throughput_MBps", t.worst_throughput_MBps, m.worst_throughput_MBps),
            floor("saturation_ratio", t.saturation_ratio, m.saturation_ratio)};
}

double max_rel_error(const std::vector<Residual>& r) {
    double e = 0.0;
    for (const auto& x : r) {
        double v = x.rel_error;
        // The throughput floor is one-sided in the other direction: never
        // accept a fit that undershoots it.
        if (x.name == "worst_throughput_MBps" && x.achieved < x.target) v = 1.0 + v;
        e = std::max(e, v);
    }
    return e;
}

CalibrationResult calibrate(const SystemConfig& cfg) {
    const auto& cc = cfg.calibration;
    FastPathCache cache;
    struct Score {
        double max_err;
        double sum_err;
    };
    std::map<std::array<double, 4>, Score> seen;
    CalibrationResult res;
    double floor_err = std::numeric_limits<double>::infinity();

    const std::array<double, 4> hi = {cc.base_access_ns_max, cc.row_switch_penalty_ns_max,
                                      static_cast<double>(cc.per_bd_overhead_cycles_max), cc.start_backlog_max_ns_max};
    auto to_params = [](const std::array<double, 4>& x) {
        return CalibrationParams{x[0], x[1], static_cast<std::uint32_t>(x[2]), x[3]};
    };
    auto score = [&](const std::array<double, 4>& x) {
        if (auto it = seen.find(x); it != seen.end()) return it->second;
        SystemConfig c = cfg;
        to_params(x).apply(c);
        cache.clear();
        const auto r = residuals(evaluate_targets(c, &cache), cc.targets);
        Score sc{max_rel_error(r), 0.0};
        for (const auto& e : r) sc.sum_err += e.rel_error;
        ++res.evaluations;
        floor_err = std::min(floor_err, sc.max_err);
        seen.emplace(x, sc);
        return sc;
    };
    // Fits whose max error is within kTieTol of the best seen so far count as
    // equally good; among those the smaller row penalty wins, then the
    // smaller max error, then the smaller total error.
    constexpr double kTieTol = 1e-3;
    auto better = [&](const Score& s1, const std::array<double, 4>& a, const Score& s2, const std::array<double, 4>& b) {
        const bool ok1 = s1.max_err <= floor_err + kTieTol;
        const bool ok2 = s2.max_err <= floor_err + kTieTol;
        if (ok1 != ok2) return ok1;
        if (ok1 && a[1] != b[1]) return a[1] < b[1];
        if (std::abs(s1.max_err - s2.max_err) > 1e-9) return s1.max_err < s2.max_err;
        if (std::abs(s1.sum_err - s2.sum_err) > 1e-9) return s1.sum_err < s2.sum_err;
        return a[1] < b[1];
    };

    const auto p0 = CalibrationParams::from(cfg);
    std::array<double, 4> best = {p0.base_access_ns, p0.row_switch_penalty_ns,
                                  static_cast<double>(p0.per_bd_overhead_cycles), p0.start_backlog_max_ns};
    for (int i = 0; i < 4; ++i) best[i] = std::clamp(std::round(best[i]), 0.0, hi[i]);
    Score best_s = score(best);

    // Single-axis moves plus pairwise moves; the pairs let the search slide
    // along directions where two parameters trade off against each other.
    std::vector<std::array<double, 4>> moves;
    for (int i = 0; i < 4; ++i)
        for (int k : {-4, -3, -2, -1, 1, 2, 3, 4}) {
            std::array<double, 4> m{};
            m[i] = k;
            moves.push_back(m);
        }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int a : {-2, -1, 1, 2})
                for (int b : {-2, -1, 1, 2}) {
                    std::array<double, 4> m{};
                    m[i] = a;
                    m[j] = b;
                    moves.push_back(m);
                }

    for (double step : {64.0, 16.0, 4.0, 1.0}) {
        bool improved = true;
        for (int round = 0; improved && round < 256; ++round) {
            improved = false;
            auto cand = best;
            auto cand_s = best_s;
            for (const auto& m : moves) {
                std::array<double, 4> x = best;
                for (int i = 0; i < 4; ++i) x[i] = std::clamp(best[i] + m[i] * step, 0.0, hi[i]);
                if (x == best) continue;
                const Score s = score(x);
                if (better(s, x, cand_s, cand)) {
                    cand = x;
                    cand_s = s;
                }
            }
            if (cand != best) {
                best = cand;
                best_s = cand_s;
                improved = true;
            }
        }
    }

    res.params = to_params(best);
    res.fitted = cfg;
    res.params.apply(res.fitted);
    res.residuals = residuals(evaluate_targets(res.fitted, &cache), cc.targets);
    res.max_rel_error = max_rel_error(res.residuals);
    if (res.max_rel_error > cc.residual_bound)
        throw Error(ErrorCode::CalibrationDiverged,
                    fmt::format("best fit misses a target by {:.2f}% (bound {:.2f}%)", 100 * res.max_rel_error,
                                100 * cc.residual_bound));
    return res;
}

void write_calibration_report(std::ostream& out, const CalibrationResult& r) {
    out << "parameter,value\n";
    out << fmt::format("base_access_ns,{:.3f}\n", r.params.base_access_ns);
    out << fmt::format("row_switch_penalty_ns,{:.3f}\n", r.params.row_switch_penalty_ns);
    out << fmt::format("per_bd_overhead_cycles,{}\n", r.params.per_bd_overhead_cycles);
    out << fmt::format("start_backlog_max_ns,{:.3f}\n", r.params.start_backlog_max_ns);
    out << "\ntarget,goal,achieved,rel_error,kind\n";
    for (const auto& x : r.residuals)
        out << fmt::format("{},{:.3f},{:.3f},{:.6f},{}\n", x.name, x.target, x.achieved, x.rel_error,
                           x.one_sided ? "floor" : "match");
    out << fmt::format("\nmax_rel_error,{:.6f}\nevaluations,{}\n", r.max_rel_error, r.evaluations);
}

}  // namespace sgdma
