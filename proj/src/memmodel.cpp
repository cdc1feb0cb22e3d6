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

#include "sgdma/memmodel.hpp"

#include <cmath>
#include <string>

namespace sgdma {

namespace {

Tick floor_div(Tick a, Tick b) {
    Tick q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

Tick ceil_div(Tick a, Tick b) { return -floor_div(-a, b); }

}  // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadArgs: return "BadArgs";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::CapacityExceeded: return "CapacityExceeded";
        case ErrorCode::ZeroLengthPayload: return "ZeroLengthPayload";
        case ErrorCode::OverlapDetected: return "OverlapDetected";
        case ErrorCode::InvalidRing: return "InvalidRing";
        case ErrorCode::OutOfAperture: return "OutOfAperture";
        case ErrorCode::IncompleteTrace: return "IncompleteTrace";
        case ErrorCode::ScenarioIncomplete: return "ScenarioIncomplete";
        case ErrorCode::EmptySamples: return "EmptySamples";
        case ErrorCode::CalibrationDiverged: return "CalibrationDiverged";
    }
    return "Unknown";
}

std::string_view to_string(Region r) {
    switch (r) {
        case Region::Rpmsg: return "rpmsg";
        case Region::Ring: return "ring";
        case Region::Buffer: return "buffer";
        case Region::Unallocated: return "unallocated";
    }
    return "?";
}

std::string_view to_string(AccessKind k) {
    switch (k) {
        case AccessKind::BdFetch: return "bd_fetch";
        case AccessKind::BufferFetch: return "buffer_fetch";
        case AccessKind::StatusWrite: return "status_write";
        case AccessKind::FlagAccess: return "flag_access";
    }
    return "?";
}

bool MemoryMap::in_aperture(Addr addr, std::uint64_t len) const {
    if (len == 0 || !in_aperture(addr)) return false;
    const Addr last = addr + (len - 1);
    return last >= addr && in_aperture(last);
}

Region MemoryMap::classify(Addr addr) const {
    if (!in_aperture(addr))
        throw Error(ErrorCode::OutOfAperture, "address 0x" + std::to_string(addr) + " outside DDR aperture");
    if (addr < ring_base()) return Region::Rpmsg;
    if (addr < buffer_base()) return Region::Ring;
    if (addr < buffer_end()) return Region::Buffer;
    return Region::Unallocated;
}

void DdrConfig::validate() const {
    auto bad = [](const char* what) { throw Error(ErrorCode::ConfigInvalid, std::string("ddr: ") + what); };
    if (!(refresh_period_ns > 0)) bad("refresh_period_ns must be > 0");
    if (refresh_stall_ns < 0 || refresh_stall_ns >= refresh_period_ns)
        bad("refresh_stall_ns must be in [0, refresh_period_ns)");
    if (base_access_ns < 0) bad("base_access_ns must be >= 0");
    if (row_switch_penalty_ns < 0) bad("row_switch_penalty_ns must be >= 0");
    if (!(controller_clock_mhz > 0)) bad("controller_clock_mhz must be > 0");
    if (bytes_per_clock == 0) bad("bytes_per_clock must be > 0");
    if (start_backlog_max_ns < 0) bad("start_backlog_max_ns must be >= 0");
}

DdrTiming DdrTiming::from(const DdrConfig& cfg, Tick refresh_phase) {
    cfg.validate();
    DdrTiming t;
    t.refresh_period = ns_to_ticks(cfg.refresh_period_ns);
    t.refresh_stall = ns_to_ticks(cfg.refresh_stall_ns);
    t.base_access = ns_to_ticks(cfg.base_access_ns);
    t.row_switch_penalty = ns_to_ticks(cfg.row_switch_penalty_ns);
    t.ctrl_cycle = ns_to_ticks(1000.0 / cfg.controller_clock_mhz);
    t.bytes_per_clock = cfg.bytes_per_clock;
    if (refresh_phase < 0 || refresh_phase >= t.refresh_period)
        throw Error(ErrorCode::ConfigInvalid, "refresh phase must lie in [0, refresh_period)");
    t.refresh_phase = refresh_phase;
    return t;
}

Tick DdrTiming::transfer_time(std::uint64_t len) const {
    const auto clocks = (len + bytes_per_clock - 1) / bytes_per_clock;
    return static_cast<Tick>(clocks) * ctrl_cycle;
}

Tick Completion::stall_total() const {
    Tick sum = 0;
    for (const auto& s : stall_events) sum += s.charged;
    return sum;
}

std::vector<RefreshWindow> refresh_schedule(const DdrTiming& timing, Tick horizon) {
    std::vector<RefreshWindow> out;
    if (horizon <= 0) return out;
    const Tick period = timing.refresh_period;
    for (Tick k = ceil_div(-timing.refresh_phase, period);; ++k) {
        const Tick start = timing.refresh_phase + k * period;
        if (start >= horizon) break;
        out.push_back({start, start + timing.refresh_stall});
    }
    return out;
}

std::vector<RefreshWindow> refresh_schedule(const DdrConfig& cfg, Tick refresh_phase, Tick horizon) {
    return refresh_schedule(DdrTiming::from(cfg, refresh_phase), horizon);
}

DdrState::DdrState(const DdrTiming& timing, MemoryMap map) : timing_(timing), map_(map) {}

std::optional<Tick> DdrState::window_containing(Tick t) const {
    if (timing_.refresh_stall == 0) return std::nullopt;
    const Tick k = floor_div(t - timing_.refresh_phase, timing_.refresh_period);
    const Tick w = timing_.refresh_phase + k * timing_.refresh_period;
    if (t < w + timing_.refresh_stall) return w;
    return std::nullopt;
}

Tick DdrState::next_window_at_or_after(Tick t) const {
    const Tick k = ceil_div(t - timing_.refresh_phase, timing_.refresh_period);
    return timing_.refresh_phase + k * timing_.refresh_period;
}

Tick DdrState::serve(Tick start, Tick work, std::vector<StallEvent>* stalls) const {
    const Tick stall = timing_.refresh_stall;
    Tick t = start;
    if (stall == 0) return t + work;
    if (auto w = window_containing(t)) {
        const Tick end = *w + stall;
        if (stalls) stalls->push_back({*w, end - t, 0});
        t = end;
    }
    Tick done = 0;
    while (true) {
        const Tick next = next_window_at_or_after(t);
        const Tick remaining = work - done;
        if (t + remaining <= next) return t + remaining;
        done += next - t;
        t = next + stall;
        if (stalls) stalls->push_back({next, stall, done});
    }
}

Completion DdrState::access(const MemAccess& req) {
    if (req.len == 0) throw Error(ErrorCode::OutOfAperture, "zero-length DDR access");
    if (!map_.in_aperture(req.addr, req.len))
        throw Error(ErrorCode::OutOfAperture, "DDR access outside aperture");
    const Region region = map_.classify(req.addr);

    Completion c;
    c.start = std::max(req.issue, channel_free_);
    c.penalty = (last_region_ && *last_region_ != region) ? timing_.row_switch_penalty : 0;
    const Tick work = c.penalty + timing_.transfer_time(req.len);
    const Tick end = serve(c.start, work, &c.stall_events);
    c.finish = end + timing_.base_access;
    channel_free_ = end;
    last_region_ = region;
    return c;
}

void DdrState::add_backlog(Tick at, Tick work) {
    if (work <= 0) return;
    const Tick start = std::max(at, channel_free_);
    channel_free_ = serve(start, work, nullptr);
    last_region_ = Region::Ring;
}

Tick DdrState::data_ready(const Completion& c, std::uint64_t bytes) const {
    const Tick work = c.penalty + timing_.transfer_time(bytes);
    Tick t = c.start + work + timing_.base_access;
    for (const auto& s : c.stall_events)
        if (s.work_offset < work) t += s.charged;
    return t;
}

}  // namespace sgdma
