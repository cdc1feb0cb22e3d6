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

// MM2S scatter-gather engine: walks a BD ring, issues the descriptor fetch,
// buffer fetch(es) and status write for every BD through DdrState, and
// streams payload beats onto the AXI-stream bus.
//
// Timing outline (all engine decisions happen on PL clock edges):
//   - the first descriptor fetch issues start_overhead_cycles after the tail
//     write; up to bd_prefetch_depth descriptors are held at once
//   - a fetched descriptor is visible at the next edge after DDR completes,
//     then takes per_bd_overhead_cycles of serial processing
//   - buffer reads are split into bursts of at most fifo_depth_beats and a
//     burst issues only when the stream FIFO has room for all of it
//   - the status write issues one cycle after the BD's last beat
// With pipeline_overlap off only one descriptor is in flight and the next
// fetch waits for the previous status write to complete.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "sgdma/bdring.hpp"
#include "sgdma/fabric.hpp"
#include "sgdma/memmodel.hpp"
#include "sgdma/types.hpp"

namespace sgdma {

struct EngineConfig {
    BusConfig bus;
    bool pipeline_overlap = true;
    std::uint32_t fifo_depth_beats = 512;
    std::uint32_t bd_prefetch_depth = 4;
    // Calibrated; see the harness calibrate op.
    std::uint32_t per_bd_overhead_cycles = 85;
    std::uint32_t start_overhead_cycles = 4;

    void validate() const;
    /// Descriptors held at once (1 without pipeline overlap).
    std::uint32_t lookahead() const { return pipeline_overlap ? bd_prefetch_depth : 1; }
};

struct BufferFetchRecord {
    std::uint64_t step = 0;  // position in traversal order
    Tick issue = 0;
    std::uint32_t bytes = 0;
};

struct StallRecord {
    Tick window_start = 0;
    Tick charged = 0;
    AccessKind kind = AccessKind::BdFetch;
    std::uint64_t step = 0;
};

/// Timestamped record of one MM2S run. Per-BD vectors are indexed by
/// traversal step (n_bds * n_cycles entries); bd_index maps a step to its
/// descriptor.
struct TransferTrace {
    Tick cycle = 0;
    Tick tail_write = 0;
    std::vector<std::uint32_t> bd_index;
    std::vector<Tick> sg_ar_valid;
    std::vector<Tick> mm2s_ar_valid;
    std::vector<Tick> status_write;
    std::vector<BufferFetchRecord> buffer_fetches;
    std::vector<BeatRun> s_axis_runs;
    std::vector<StallRecord> stalls;
    Tick first_s_axis = 0;
    Tick done = 0;
    std::uint64_t payload_bytes_total = 0;
    std::uint64_t beats_total = 0;
    bool complete = false;

    Tick latency() const { return first_s_axis - tail_write; }
    double latency_ns() const { return ticks_to_ns(latency()); }
    double throughput_MBps() const;
    std::vector<Tick> s_axis_beats() const { return expand_beat_runs(s_axis_runs, cycle); }
};

/// Scalar outcome of a run, without per-event records.
struct RunSummary {
    Tick tail_write = 0;
    Tick first_s_axis = 0;
    Tick done = 0;
    std::uint64_t bd_fetches = 0;
    std::uint64_t buffer_fetches = 0;
    std::uint64_t status_writes = 0;
    std::uint64_t beats = 0;
    std::uint64_t payload_bytes = 0;

    Tick latency() const { return first_s_axis - tail_write; }
    double latency_ns() const { return ticks_to_ns(latency()); }
    double throughput_MBps() const;

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct DdrTransactionCounts {
    std::uint64_t bd_fetches = 0;
    std::uint64_t buffer_fetches = 0;
    std::uint64_t status_writes = 0;

    friend bool operator==(const DdrTransactionCounts&, const DdrTransactionCounts&) = default;
};

/// Full event-level simulation of `ring` (n_cycles traversals). `start` is
/// the tail-descriptor write time and is moved to the next PL edge.
TransferTrace run_mm2s(const BdRing& ring, const EngineConfig& cfg, DdrState& ddr, Tick start);

/// Throws IncompleteTrace if the run did not finish.
DdrTransactionCounts count_ddr_transactions(const TransferTrace& trace);

/// Memo of engine state transitions across refresh periods, shared by runs
/// with identical timing parameters and BD length. Safe for use by one
/// thread at a time.
class FastPathCache {
public:
    explicit FastPathCache(std::size_t max_states = 1u << 18);
    ~FastPathCache();
    FastPathCache(const FastPathCache&) = delete;
    FastPathCache& operator=(const FastPathCache&) = delete;

    std::size_t states() const;
    void clear();

    struct Impl;
    Impl& impl() { return *impl_; }

private:
    std::unique_ptr<Impl> impl_;
};

/// Run over n_total back-to-back descriptors of bytes_per_bd each (a
/// uniform ring of any size and cycle count). Without a cache this is the
/// plain event simulation; with one, refresh periods already seen are
/// replayed from the memo. Both give identical results.
RunSummary run_mm2s_uniform(std::uint64_t n_total, std::uint32_t bytes_per_bd, const EngineConfig& cfg,
                            DdrState& ddr, Tick start, FastPathCache* cache = nullptr);

RunSummary summarize_trace(const TransferTrace& trace);

/// One row per event: name,bd_index,timestamp_ns.
void write_trace_csv(std::ostream& out, const TransferTrace& trace);

}  // namespace sgdma
