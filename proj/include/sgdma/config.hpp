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

// Whole-system configuration and its JSON file format.
//
// Every section and key is optional in the file; missing keys keep their
// defaults, unknown keys are rejected. Overrides use dotted paths
// ("ddr.base_access_ns=250") and are applied to the JSON form before it
// is parsed, so they go through the same checks.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgdma/bdring.hpp"
#include "sgdma/csm.hpp"
#include "sgdma/engine.hpp"
#include "sgdma/memmodel.hpp"
#include "sgdma/psmodel.hpp"

namespace sgdma {

enum class PlacementSet { Sequential, Random, Both };

std::string_view to_string(PlacementSet p);
PlacementSet placement_set_from_string(std::string_view s);

struct SweepSpec {
    std::vector<std::uint32_t> bytes_per_bd;
    std::vector<std::uint32_t> n_bds;
    std::vector<std::uint32_t> n_cycles;
    PlacementSet placement = PlacementSet::Sequential;
    std::uint32_t trials_per_point = 100;
    std::uint64_t base_seed = 1;
    /// DDR draws (refresh phase, start backlog) depend only on the trial
    /// index, so every point sees the same DDR conditions per trial.
    bool common_random_numbers = true;

    /// Throws ConfigInvalid.
    void validate() const;
    std::size_t point_count() const;
};

/// The published parameter grid: 2^5..2^13 bytes, 2^1..2^13 BDs and cycles.
SweepSpec paper_grid();

struct RingDefaults {
    std::uint32_t n_bds = 16;
    std::uint32_t bytes_per_bd = 32;
    std::uint32_t n_cycles = 1;
    Placement placement = Placement::Sequential;
    std::uint64_t rng_seed = 1;
    /// Trial index used for the DDR draws of a single trace.
    std::uint32_t trial = 0;
};

struct CsmConfig {
    LatencyMode latency_mode = LatencyMode::TailWrite;
    /// RPU execution and GPIO delay between reset release and start.
    std::uint32_t setup_cycles = 265;
};

struct PsConfig {
    CpuModel apu = CpuModel::apu_default();
    CpuModel rpu = CpuModel::rpu_default();
    HandshakeModel gpio{HandshakeMechanism::Gpio, 120.0, 4};
    HandshakeModel rpmsg{HandshakeMechanism::Rpmsg, 120.0, 4};
    std::uint32_t trials_per_size = 100;
    std::uint32_t histogram_n_bds = 1;
    std::uint32_t histogram_trials = 100000;
};

struct RequirementConfig {
    double min_throughput_MBps = 32.0;
    std::uint32_t min_bytes_per_bd = 32;
};

struct CalibrationTargets {
    double latency_min_ns = 849.0;
    double latency_max_ns = 1516.0;
    /// One-sided: the worst case must not fall below it.
    double worst_throughput_MBps = 125.0;
    std::uint32_t saturation_bytes_per_bd = 4096;
    /// One-sided: median throughput / bus ceiling at saturation_bytes_per_bd.
    double saturation_ratio = 0.95;
};

struct CalibrationConfig {
    CalibrationTargets targets;
    double residual_bound = 0.05;
    /// Refresh-phase scan resolution used for extreme-case evaluation.
    double phase_step_ns = 2.0;
    double base_access_ns_max = 600.0;
    double row_switch_penalty_ns_max = 200.0;
    std::uint32_t per_bd_overhead_cycles_max = 400;
    double start_backlog_max_ns_max = 2000.0;
};

struct SystemConfig {
    DdrConfig ddr;
    EngineConfig engine;
    RingDefaults ring;
    CsmConfig csm;
    PsConfig psmodel;
    SweepSpec sweep = paper_grid();
    RequirementConfig requirement;
    CalibrationConfig calibration;

    void validate() const;
};

nlohmann::json to_json(const SystemConfig& cfg);
/// Starts from defaults; throws ConfigInvalid on unknown keys or bad types.
SystemConfig config_from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" overrides to a JSON document. The value is parsed
/// as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Reads a config file (empty path = defaults), applies overrides.
SystemConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace sgdma
