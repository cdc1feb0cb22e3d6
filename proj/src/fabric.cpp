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

#include "sgdma/fabric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sgdma {

void BusConfig::validate() const {
    switch (data_width_bits) {
        case 32: case 64: case 256: case 512: case 1024: break;
        default:
            throw Error(ErrorCode::ConfigInvalid,
                        "bus: data_width_bits must be one of 32, 64, 256, 512, 1024 (got " +
                            std::to_string(data_width_bits) + ")");
    }
    if (!(pl_clock_mhz > 0)) throw Error(ErrorCode::ConfigInvalid, "bus: pl_clock_mhz must be > 0");
}

Tick BusConfig::cycle() const { return static_cast<Tick>(std::llround(1e6 / pl_clock_mhz)); }

double BusConfig::max_bandwidth_bytes_per_s() const {
    return static_cast<double>(beat_bytes()) / cycle_ns() * 1e9;
}

std::uint64_t beat_count(std::uint64_t payload_bytes, const BusConfig& cfg) {
    const std::uint64_t b = cfg.beat_bytes();
    return (payload_bytes + b - 1) / b;
}

void append_beat_run(std::vector<BeatRun>& runs, BeatRun run, Tick cycle) {
    if (run.count == 0) return;
    if (!runs.empty()) {
        auto& last = runs.back();
        if (last.start + static_cast<Tick>(last.count) * cycle == run.start) {
            last.count += run.count;
            return;
        }
    }
    runs.push_back(run);
}

std::vector<Tick> expand_beat_runs(std::span<const BeatRun> runs, Tick cycle) {
    std::vector<Tick> out;
    for (const auto& r : runs)
        for (std::uint64_t k = 0; k < r.count; ++k) out.push_back(r.start + static_cast<Tick>(k) * cycle);
    return out;
}

std::vector<Tick> word_delivery_times(Tick first_word, std::uint64_t payload_bytes, const BusConfig& cfg,
                                      std::span<const Tick> ready) {
    cfg.validate();
    const Tick c = cfg.cycle();
    const auto n = beat_count(payload_bytes, cfg);
    std::vector<Tick> out;
    out.reserve(n);
    Tick next = first_word;
    for (std::uint64_t i = 0; i < n; ++i) {
        Tick t = next;
        if (i < ready.size()) t = std::max(t, clock_edge(ready[i], c));
        out.push_back(t);
        next = t + c;
    }
    return out;
}

double stream_throughput_MBps(std::span<const Tick> beats, std::uint64_t payload_bytes, Tick cycle) {
    if (beats.empty()) return 0.0;
    const Tick span = beats.back() + cycle - beats.front();
    return static_cast<double>(payload_bytes) / static_cast<double>(span) * 1e6;
}

}  // namespace sgdma
