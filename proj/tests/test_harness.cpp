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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "sgdma/harness.hpp"

using namespace sgdma;

namespace {

SweepSpec small_grid(std::uint32_t trials = 20) {
    SweepSpec s;
    s.bytes_per_bd = {32, 256, 4096};
    s.n_bds = {2, 16, 256};
    s.n_cycles = {2, 8};
    s.placement = PlacementSet::Both;
    s.trials_per_point = trials;
    s.base_seed = 42;
    return s;
}

std::string csv(const SweepResult& r) {
    std::ostringstream os;
    write_sweep_csv(os, r);
    return os.str();
}

// Calibration settings that keep a full search to a few seconds.
SystemConfig quick_calibration(SystemConfig c) {
    c.calibration.phase_step_ns = 25.0;
    return c;
}

}  // namespace

TEST(Summarize, Examples) {
    std::vector<double> one = {5};
    auto s = summarize(one);
    EXPECT_EQ(s.median, 5);
    EXPECT_EQ(s.min, 5);
    EXPECT_EQ(s.max, 5);
    std::vector<double> four = {4, 1, 3, 2};
    EXPECT_EQ(summarize(four).median, 2);
    std::vector<double> none;
    try {
        summarize(none);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptySamples);
    }
}

TEST(Summarize, MatchesFullSort) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::vector<double> v(1000);
    for (auto& x : v) x = u(rng);
    auto s = summarize(v);
    std::sort(v.begin(), v.end());
    EXPECT_EQ(s.median, v[499]);
    EXPECT_EQ(s.min, v.front());
    EXPECT_EQ(s.max, v.back());
}

TEST(Sweep, OneRowPerPointWithOrderedStats) {
    SystemConfig cfg;
    const auto spec = small_grid();
    auto r = run_sweep(spec, cfg, 1);
    ASSERT_EQ(r.rows.size(), spec.point_count());
    EXPECT_EQ(r.rows.size(), 3u * 3 * 2 * 2);
    for (const auto& row : r.rows) {
        EXPECT_LE(row.latency_ns.min, row.latency_ns.median);
        EXPECT_LE(row.latency_ns.median, row.latency_ns.max);
        EXPECT_LE(row.throughput_MBps.min, row.throughput_MBps.median);
        EXPECT_LE(row.throughput_MBps.median, row.throughput_MBps.max);
        EXPECT_LE(row.throughput_MBps.max, cfg.engine.bus.max_bandwidth_MBps() * (1 + 1e-12));
        EXPECT_EQ(row.trials, spec.trials_per_point);
    }
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
    SystemConfig cfg;
    const auto spec = small_grid(10);
    const auto a = csv(run_sweep(spec, cfg, 1));
    EXPECT_EQ(a, csv(run_sweep(spec, cfg, 1)));
    EXPECT_EQ(a, csv(run_sweep(spec, cfg, 3)));
    auto other = spec;
    other.base_seed = 43;
    EXPECT_NE(a, csv(run_sweep(other, cfg, 1)));
}

TEST(Sweep, SeedDependsOnPointWithoutCommonNumbers) {
    SystemConfig cfg;
    auto spec = small_grid(1);
    spec.common_random_numbers = false;
    const SweepPoint p{32, 2, 2, Placement::Sequential}, q{32, 16, 2, Placement::Sequential};
    int differ = 0;
    for (std::uint32_t t = 0; t < 20; ++t)
        differ += draw_trial(spec, p, t, cfg.ddr).refresh_phase != draw_trial(spec, q, t, cfg.ddr).refresh_phase;
    EXPECT_GT(differ, 15);
    spec.common_random_numbers = true;
    for (std::uint32_t t = 0; t < 20; ++t)
        EXPECT_EQ(draw_trial(spec, p, t, cfg.ddr).refresh_phase, draw_trial(spec, q, t, cfg.ddr).refresh_phase);
}

TEST(Sweep, DoublingCyclesEqualsDoublingBds) {
    SystemConfig cfg;
    SweepSpec spec;
    spec.bytes_per_bd = {32, 1024};
    spec.n_bds = {8, 16};
    spec.n_cycles = {2, 4};
    spec.trials_per_point = 30;
    auto r = run_sweep(spec, cfg, 1);
    auto find = [&](std::uint32_t b, std::uint32_t n, std::uint32_t c) {
        for (const auto& row : r.rows)
            if (row.point.bytes_per_bd == b && row.point.n_bds == n && row.point.n_cycles == c) return row;
        ADD_FAILURE();
        return SweepRow{};
    };
    for (std::uint32_t b : {32u, 1024u}) {
        const auto x = find(b, 8, 4), y = find(b, 16, 2);
        EXPECT_EQ(x.throughput_MBps.median, y.throughput_MBps.median);
        EXPECT_EQ(x.throughput_MBps.min, y.throughput_MBps.min);
        EXPECT_EQ(x.throughput_MBps.max, y.throughput_MBps.max);
        EXPECT_EQ(x.latency_ns.median, y.latency_ns.median);
    }
}

TEST(Sweep, RejectsInvalidSpec) {
    SystemConfig cfg;
    auto spec = small_grid();
    spec.trials_per_point = 0;
    try {
        run_sweep(spec, cfg, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    }
}

TEST(Sweep, CapacityErrorsSurface) {
    SystemConfig cfg;
    SweepSpec spec;
    spec.bytes_per_bd = {1u << 16};
    spec.n_bds = {8192};
    spec.n_cycles = {2};
    spec.trials_per_point = 1;
    EXPECT_THROW(run_sweep(spec, cfg, 2), Error);
}

TEST(SweepCsv, RoundTrip) {
    SystemConfig cfg;
    auto r = run_sweep(small_grid(5), cfg, 1);
    std::istringstream in(csv(r));
    auto back = read_sweep_csv(in);
    ASSERT_EQ(back.rows.size(), r.rows.size());
    EXPECT_EQ(csv(back), csv(r));
    std::istringstream bad("hello\n1,2\n");
    EXPECT_THROW(read_sweep_csv(bad), Error);
}

TEST(Requirement, PassAndFail) {
    SystemConfig cfg;
    auto r = run_sweep(small_grid(10), cfg, 1);
    auto rep = check_requirement(r, cfg.requirement);
    EXPECT_TRUE(rep.pass);
    EXPECT_GE(rep.worst_MBps, 125.0);
    EXPECT_EQ(rep.worst_point.bytes_per_bd, 32u);
    EXPECT_GT(rep.margin(), 1.0);
    RequirementConfig strict{1e6, 32};
    EXPECT_FALSE(check_requirement(r, strict).pass);
}

TEST(Calibrate, DefaultsAreAFixedPoint) {
    const SystemConfig cfg = quick_calibration({});
    FastPathCache cache;
    const auto m = evaluate_targets(cfg, &cache);
    EXPECT_LE(max_rel_error(residuals(m, cfg.calibration.targets)), cfg.calibration.residual_bound);
    EXPECT_GE(m.latency_min_ns, 849.0 * 0.95);
    EXPECT_LE(m.latency_max_ns, 1516.0 * 1.05);
}

TEST(Calibrate, ZeroStallTargetsGiveZeroPenalty) {
    SystemConfig truth = quick_calibration({});
    truth.ddr.refresh_stall_ns = 0.0;
    truth.ddr.row_switch_penalty_ns = 0.0;
    FastPathCache cache;
    const auto m = evaluate_targets(truth, &cache);
    SystemConfig start = truth;
    start.calibration.targets.latency_min_ns = m.latency_min_ns;
    start.calibration.targets.latency_max_ns = m.latency_max_ns;
    start.calibration.targets.worst_throughput_MBps = m.worst_throughput_MBps;
    start.calibration.targets.saturation_ratio = m.saturation_ratio;
    start.ddr.base_access_ns = 240;
    start.ddr.row_switch_penalty_ns = 40;
    start.engine.per_bd_overhead_cycles = 80;
    start.ddr.start_backlog_max_ns = 400;
    const auto res = calibrate(start);
    EXPECT_EQ(res.params.row_switch_penalty_ns, 0.0);
    EXPECT_EQ(res.params.per_bd_overhead_cycles, truth.engine.per_bd_overhead_cycles);
    EXPECT_LE(res.max_rel_error, 0.01);
}

TEST(Calibrate, FittedConfigReproducesTargetsInSweep) {
    SystemConfig start = quick_calibration({});
    start.ddr.base_access_ns = 270;
    const auto res = calibrate(start);
    ASSERT_LE(res.max_rel_error, start.calibration.residual_bound);
    SweepSpec spec;
    spec.bytes_per_bd = {32};
    spec.n_bds = {2, 4, 1024};
    spec.n_cycles = {2};
    spec.trials_per_point = 300;
    auto r = run_sweep(spec, res.fitted, 1);
    const auto& t = start.calibration.targets;
    const double tol = start.calibration.residual_bound;
    for (const auto& row : r.rows) {
        EXPECT_GE(row.latency_ns.min, t.latency_min_ns * (1 - tol));
        EXPECT_LE(row.latency_ns.max, t.latency_max_ns * (1 + tol));
        EXPECT_GE(row.throughput_MBps.min, t.worst_throughput_MBps * (1 - tol));
    }
    std::ostringstream os;
    write_calibration_report(os, res);
    EXPECT_NE(os.str().find("row_switch_penalty_ns"), std::string::npos);
}

TEST(Calibrate, Diverges) {
    SystemConfig c = quick_calibration({});
    c.calibration.targets.latency_min_ns = 50;
    c.calibration.targets.latency_max_ns = 60;
    c.calibration.base_access_ns_max = 20;
    c.calibration.row_switch_penalty_ns_max = 5;
    c.calibration.per_bd_overhead_cycles_max = 10;
    c.calibration.start_backlog_max_ns_max = 5;
    c.ddr.base_access_ns = 10;
    c.engine.per_bd_overhead_cycles = 5;
    c.ddr.start_backlog_max_ns = 0;
    try {
        calibrate(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CalibrationDiverged);
    }
}
