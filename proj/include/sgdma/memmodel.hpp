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

// Timed model of the PL DDR aperture: region map, periodic refresh windows
// and a single-channel access cost model.
//
// An access occupies the channel for its row-switch penalty plus its data
// transfer; the fixed access latency (base_access) is pipelined and does not
// occupy the channel. A refresh window that lands inside the occupied
// interval suspends it for the full window. An access that would start while
// a refresh is in progress waits for the window to close.

#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "sgdma/types.hpp"

namespace sgdma {

enum class Region { Rpmsg, Ring, Buffer, Unallocated };

std::string_view to_string(Region r);

/// Reserved DDR aperture layout: RPMsg shared memory, then the descriptor
/// ring region, then the buffer region. The rest of the aperture is left
/// unallocated.
struct MemoryMap {
    Addr aperture_base = 0x80000000ull;
    Addr aperture_end = 0x9FFFFFFFull;  // inclusive
    Addr rpmsg_size = 2048;
    Addr ring_size = 4ull << 20;
    Addr buffer_size = 256ull << 20;

    Addr rpmsg_base() const { return aperture_base; }
    Addr ring_base() const { return aperture_base + rpmsg_size; }
    Addr buffer_base() const { return ring_base() + ring_size; }
    Addr buffer_end() const { return buffer_base() + buffer_size; }  // exclusive

    bool in_aperture(Addr addr) const { return addr >= aperture_base && addr <= aperture_end; }
    bool in_aperture(Addr addr, std::uint64_t len) const;
    /// Region of an in-aperture address; throws OutOfAperture otherwise.
    Region classify(Addr addr) const;
};

enum class AccessKind { BdFetch, BufferFetch, StatusWrite, FlagAccess };

std::string_view to_string(AccessKind k);

struct DdrConfig {
    double refresh_period_ns = 7800.0;
    double refresh_stall_ns = 210.0;
    // Calibrated; see the harness calibrate op.
    double base_access_ns = 285.0;
    double row_switch_penalty_ns = 0.0;
    double controller_clock_mhz = 300.0;
    std::uint32_t bytes_per_clock = 64;
    /// Upper bound of the write-back traffic still queued in the controller
    /// when the tail descriptor is written (drawn uniformly per trial).
    double start_backlog_max_ns = 471.0;

    /// Throws ConfigInvalid on negative durations or a zero period/clock.
    void validate() const;
};

/// DdrConfig converted to ticks, plus the per-trial refresh phase.
struct DdrTiming {
    Tick refresh_period = 0;
    Tick refresh_stall = 0;
    Tick base_access = 0;
    Tick row_switch_penalty = 0;
    Tick ctrl_cycle = 0;
    std::uint32_t bytes_per_clock = 64;
    Tick refresh_phase = 0;

    static DdrTiming from(const DdrConfig& cfg, Tick refresh_phase = 0);

    Tick transfer_time(std::uint64_t len) const;
};

struct MemAccess {
    Addr addr = 0;
    std::uint64_t len = 0;
    AccessKind kind = AccessKind::BdFetch;
    Tick issue = 0;
};

struct StallEvent {
    Tick window_start = 0;
    /// Time added to the access by this window.
    Tick charged = 0;
    /// Channel work (penalty + transfer) completed before the stall hit.
    Tick work_offset = 0;
};

struct Completion {
    Tick start = 0;   // service start (after any queueing)
    Tick finish = 0;  // all data delivered / write acknowledged
    Tick penalty = 0;
    std::vector<StallEvent> stall_events;

    Tick stall_total() const;
};

struct RefreshWindow {
    Tick start = 0;
    Tick end = 0;  // exclusive
};

/// Windows at phase + k * period whose start lies in [0, horizon).
std::vector<RefreshWindow> refresh_schedule(const DdrTiming& timing, Tick horizon);
std::vector<RefreshWindow> refresh_schedule(const DdrConfig& cfg, Tick refresh_phase, Tick horizon);

class DdrState {
public:
    explicit DdrState(const DdrTiming& timing, MemoryMap map = {});

    const DdrTiming& timing() const { return timing_; }
    const MemoryMap& map() const { return map_; }

    Completion access(const MemAccess& req);

    /// Occupies the channel with `work` of anonymous write-back traffic into
    /// the ring region, starting at `at`.
    void add_backlog(Tick at, Tick work);

    /// Time at which the first `bytes` of a completed access are available.
    Tick data_ready(const Completion& c, std::uint64_t bytes) const;

    /// Start of the window containing t, if any.
    std::optional<Tick> window_containing(Tick t) const;
    /// Earliest window start >= t.
    Tick next_window_at_or_after(Tick t) const;

    Tick channel_free() const { return channel_free_; }
    std::optional<Region> last_region() const { return last_region_; }

    // Raw state access for engine snapshots.
    void restore(Tick channel_free, std::optional<Region> last_region) {
        channel_free_ = channel_free;
        last_region_ = last_region;
    }

private:
    // Runs `work` of channel time from `start` through the refresh schedule;
    // returns the end of service.
    Tick serve(Tick start, Tick work, std::vector<StallEvent>* stalls) const;

    DdrTiming timing_;
    MemoryMap map_;
    Tick channel_free_ = 0;
    std::optional<Region> last_region_;
};

}  // namespace sgdma
