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

// Clocked AXI-stream model between the DMA engine and the measurement state
// machine: one beat of data_width_bits per PL cycle at most.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgdma/types.hpp"

namespace sgdma {

struct BusConfig {
    std::uint32_t data_width_bits = 256;
    double pl_clock_mhz = 333.0;

    /// Throws ConfigInvalid for unsupported widths or a non-positive clock.
    void validate() const;

    Tick cycle() const;
    double cycle_ns() const { return ticks_to_ns(cycle()); }
    std::uint32_t beat_bytes() const { return data_width_bits / 8; }
    double max_bandwidth_bytes_per_s() const;
    double max_bandwidth_MBps() const { return max_bandwidth_bytes_per_s() / 1e6; }
};

/// Rounds t up to the next rising edge of a clock with period `cycle`.
inline Tick clock_edge(Tick t, Tick cycle) {
    Tick q = t / cycle;
    if (q * cycle < t) ++q;
    return q * cycle;
}

std::uint64_t beat_count(std::uint64_t payload_bytes, const BusConfig& cfg);

/// Beats at start, start + cycle, ... (count of them).
struct BeatRun {
    Tick start = 0;
    std::uint64_t count = 0;

    friend bool operator==(const BeatRun&, const BeatRun&) = default;
};

/// Appends a beat at t, extending the last run when t continues it.
void append_beat_run(std::vector<BeatRun>& runs, BeatRun run, Tick cycle);
std::vector<Tick> expand_beat_runs(std::span<const BeatRun> runs, Tick cycle);

/// Delivery times of payload_bytes on the bus, one beat per cycle at most.
/// `ready` optionally gives, per beat, the earliest time the upstream fetch
/// pipeline has the word (backpressure); beats wait for the next clock edge.
std::vector<Tick> word_delivery_times(Tick first_word, std::uint64_t payload_bytes, const BusConfig& cfg,
                                      std::span<const Tick> ready = {});

/// payload_bytes / (done - first) where done is one cycle after the last beat.
double stream_throughput_MBps(std::span<const Tick> beats, std::uint64_t payload_bytes, Tick cycle);

}  // namespace sgdma
