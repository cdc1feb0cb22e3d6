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

// Measurement state machine in the PL: counts setup, latency and streaming
// cycles around one MM2S run.
//
//   IDLE -> WAIT_START_ACK -> MM2S_STATE -> WAIT_DONE_GET_CNT_VALS
//
// setup counts cycles from reset release until the start signal arrives;
// latency counts from the latency origin (tail write or start received)
// up to the first s_axis beat; throughput counts from the first beat to
// the last beat inclusive.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sgdma/engine.hpp"
#include "sgdma/fabric.hpp"
#include "sgdma/types.hpp"

namespace sgdma {

enum class CsmState { Idle, WaitStartAck, Mm2sState, WaitDoneGetCntVals };

std::string_view to_string(CsmState s);

enum class LatencyMode { TailWrite, StartReceived };

std::string_view to_string(LatencyMode m);
LatencyMode latency_mode_from_string(std::string_view s);

/// Inputs seen by the state machine; all times lie on PL clock edges.
struct CsmScenario {
    Tick cycle = 0;
    Tick reset_release = 0;
    Tick start_received = 0;
    Tick tail_write = 0;
    std::vector<BeatRun> beats;
    std::uint64_t expected_beats = 0;
};

struct CounterValues {
    std::uint64_t setup_cycles = 0;
    std::uint64_t latency_cycles = 0;
    std::uint64_t throughput_cycles = 0;

    friend bool operator==(const CounterValues&, const CounterValues&) = default;
};

struct CsmResult {
    CounterValues counters;
    std::vector<CsmState> states;  // distinct states in the order entered
    Tick cycle = 0;

    double setup_ns() const { return ticks_to_ns(static_cast<Tick>(counters.setup_cycles) * cycle); }
    double latency_ns() const { return ticks_to_ns(static_cast<Tick>(counters.latency_cycles) * cycle); }
    double throughput_ns() const { return ticks_to_ns(static_cast<Tick>(counters.throughput_cycles) * cycle); }
    /// bytes / (throughput_cycles * cycle) in MB/s.
    double throughput_MBps(std::uint64_t payload_bytes) const;
};

/// Scenario for a finished engine trace. The RPU start signal reaches the
/// PL setup_cycles after reset release; the tail write follows it.
CsmScenario make_scenario(const TransferTrace& trace, Tick reset_release, Tick start_received);

/// Event-skipping evaluation. Throws ScenarioIncomplete when the run never
/// reaches WAIT_DONE_GET_CNT_VALS (no start, missing beats, ...).
CsmResult run_csm(const CsmScenario& sc, LatencyMode mode = LatencyMode::TailWrite);

/// Cycle-by-cycle reference of run_csm; gives up after max_cycles.
CsmResult run_csm_clocked(const CsmScenario& sc, LatencyMode mode = LatencyMode::TailWrite,
                          std::uint64_t max_cycles = 1u << 24);

}  // namespace sgdma
