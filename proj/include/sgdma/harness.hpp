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

// Multi-trial sweeps over the ring parameter grid, order statistics,
// requirement checking and calibration of the free timing parameters.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgdma/config.hpp"

namespace sgdma {

struct StatsSummary {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;

    friend bool operator==(const StatsSummary&, const StatsSummary&) = default;
};

/// Exact order statistics; the median of an even count is the lower-middle
/// element. Throws EmptySamples.
StatsSummary summarize(std::span<const double> samples);

struct SweepPoint {
    std::uint32_t bytes_per_bd = 0;
    std::uint32_t n_bds = 0;
    std::uint32_t n_cycles = 0;
    Placement placement = Placement::Sequential;
};

std::uint64_t point_hash(const SweepPoint& p);

struct SweepRow {
    SweepPoint point;
    std::uint32_t trials = 0;
    StatsSummary latency_ns;
    StatsSummary throughput_MBps;
    bool meets_requirement = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double requirement_MBps = 0.0;
};

/// Per-trial DDR conditions.
struct TrialDraw {
    Tick refresh_phase = 0;
    Tick start_backlog = 0;
};

TrialDraw draw_trial(const SweepSpec& spec, const SweepPoint& p, std::uint32_t trial, const DdrConfig& ddr);

/// One trial of one point (uniform ring of n_bds * n_cycles descriptors).
RunSummary run_trial(const SystemConfig& cfg, const SweepPoint& p, const TrialDraw& draw,
                     FastPathCache* cache = nullptr);

/// Runs every point of spec against cfg. Points run on up to `threads`
/// workers (0 = SGDMA_SIM_THREADS or hardware concurrency); the result is
/// identical for any thread count.
SweepResult run_sweep(const SweepSpec& spec, const SystemConfig& cfg, unsigned threads = 0);

/// Samples of one point, mostly for tests and plots.
std::vector<RunSummary> run_point(const SweepSpec& spec, const SystemConfig& cfg, const SweepPoint& p,
                                  FastPathCache* cache = nullptr);

std::vector<SweepPoint> expand_points(const SweepSpec& spec);

void write_sweep_csv(std::ostream& out, const SweepResult& r);
SweepResult read_sweep_csv(std::istream& in);

struct RequirementReport {
    bool pass = false;
    double required_MBps = 0.0;
    double worst_MBps = 0.0;
    SweepPoint worst_point;
    std::size_t points_checked = 0;
    double margin() const { return worst_MBps / required_MBps; }
};

/// Worst min-throughput over rows with bytes_per_bd >= min_bytes_per_bd.
RequirementReport check_requirement(const SweepResult& r, const RequirementConfig& req);

unsigned default_thread_count();

// ---- calibration ----

struct CalibrationParams {
    double base_access_ns = 0.0;
    double row_switch_penalty_ns = 0.0;
    std::uint32_t per_bd_overhead_cycles = 0;
    double start_backlog_max_ns = 0.0;

    void apply(SystemConfig& cfg) const;
    static CalibrationParams from(const SystemConfig& cfg);
};

/// Model values compared against CalibrationTargets.
struct TargetMetrics {
    double latency_min_ns = 0.0;
    double latency_max_ns = 0.0;
    double worst_throughput_MBps = 0.0;
    double saturation_ratio = 0.0;
};

/// Latency extremes and worst-case throughput come from scanning the
/// refresh phase (at phase_step_ns) with no backlog and full backlog; the
/// saturation ratio is the median over a few phases.
TargetMetrics evaluate_targets(const SystemConfig& cfg, FastPathCache* cache = nullptr);

struct Residual {
    std::string name;
    double target = 0.0;
    double achieved = 0.0;
    double rel_error = 0.0;
    bool one_sided = false;
};

std::vector<Residual> residuals(const TargetMetrics& m, const CalibrationTargets& t);
double max_rel_error(const std::vector<Residual>& r);

struct CalibrationResult {
    CalibrationParams params;
    SystemConfig fitted;
    std::vector<Residual> residuals;
    double max_rel_error = 0.0;
    std::size_t evaluations = 0;
};

/// Coordinate search over CalibrationParams starting from cfg's values.
/// Ties keep the smaller row-switch penalty. Throws CalibrationDiverged if
/// the best point misses a target by more than residual_bound.
CalibrationResult calibrate(const SystemConfig& cfg);

void write_calibration_report(std::ostream& out, const CalibrationResult& r);

}  // namespace sgdma
