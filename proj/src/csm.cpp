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

#include "sgdma/csm.hpp"

#include <string>

namespace sgdma {

std::string_view to_string(CsmState s) {
    switch (s) {
        case CsmState::Idle: return "IDLE";
        case CsmState::WaitStartAck: return "WAIT_START_ACK";
        case CsmState::Mm2sState: return "MM2S_STATE";
        case CsmState::WaitDoneGetCntVals: return "WAIT_DONE_GET_CNT_VALS";
    }
    return "?";
}

std::string_view to_string(LatencyMode m) { return m == LatencyMode::StartReceived ? "start_received" : "tail_write"; }

LatencyMode latency_mode_from_string(std::string_view s) {
    if (s == "tail_write") return LatencyMode::TailWrite;
    if (s == "start_received") return LatencyMode::StartReceived;
    throw Error(ErrorCode::ConfigInvalid, "unknown latency mode '" + std::string(s) + "'");
}

double CsmResult::throughput_MBps(std::uint64_t payload_bytes) const {
    if (counters.throughput_cycles == 0) return 0.0;
    return static_cast<double>(payload_bytes) / static_cast<double>(counters.throughput_cycles * cycle) * 1e6;
}

CsmScenario make_scenario(const TransferTrace& trace, Tick reset_release, Tick start_received) {
    CsmScenario sc;
    sc.cycle = trace.cycle;
    sc.reset_release = reset_release;
    sc.start_received = start_received;
    sc.tail_write = trace.tail_write;
    sc.beats = trace.s_axis_runs;
    sc.expected_beats = trace.beats_total;
    return sc;
}

namespace {

[[noreturn]] void incomplete(const std::string& why) { throw Error(ErrorCode::ScenarioIncomplete, why); }

void check_scenario(const CsmScenario& sc) {
    if (sc.cycle <= 0) incomplete("scenario has no clock");
    for (Tick t : {sc.reset_release, sc.start_received, sc.tail_write})
        if (t % sc.cycle != 0) incomplete("scenario event off the PL clock grid");
    for (const auto& r : sc.beats)
        if (r.start % sc.cycle != 0) incomplete("beat off the PL clock grid");
    if (sc.start_received < sc.reset_release) incomplete("start received before reset release");
}

}  // namespace

CsmResult run_csm(const CsmScenario& sc, LatencyMode mode) {
    check_scenario(sc);
    CsmResult res;
    res.cycle = sc.cycle;
    res.states = {CsmState::Idle, CsmState::WaitStartAck};
    const Tick c = sc.cycle;
    res.counters.setup_cycles = static_cast<std::uint64_t>((sc.start_received - sc.reset_release) / c);
    res.states.push_back(CsmState::Mm2sState);

    std::uint64_t seen = 0;
    for (const auto& r : sc.beats) seen += r.count;
    if (sc.expected_beats == 0 || seen < sc.expected_beats)
        incomplete("stream delivered " + std::to_string(seen) + " of " + std::to_string(sc.expected_beats) +
                   " beats; state machine stays in MM2S_STATE");

    // Beats before the state machine reaches MM2S_STATE are not observed.
    Tick first = -1;
    Tick last = -1;
    std::uint64_t counted = 0;
    for (const auto& r : sc.beats) {
        for (std::uint64_t k = 0; k < r.count && counted < sc.expected_beats; ++k) {
            const Tick t = r.start + static_cast<Tick>(k) * c;
            if (t < sc.start_received) continue;
            if (first < 0) first = t;
            last = t;
            ++counted;
        }
        if (counted >= sc.expected_beats) break;
    }
    if (counted < sc.expected_beats) incomplete("beats arrived before the start signal");

    const Tick origin = mode == LatencyMode::TailWrite ? std::max(sc.tail_write, sc.start_received) : sc.start_received;
    res.counters.latency_cycles = first > origin ? static_cast<std::uint64_t>((first - origin) / c) : 0;
    res.counters.throughput_cycles = static_cast<std::uint64_t>((last - first) / c) + 1;
    res.states.push_back(CsmState::WaitDoneGetCntVals);
    return res;
}

CsmResult run_csm_clocked(const CsmScenario& sc, LatencyMode mode, std::uint64_t max_cycles) {
    check_scenario(sc);
    const Tick c = sc.cycle;
    auto beats = expand_beat_runs(sc.beats, c);
    std::size_t next_beat = 0;

    CsmResult res;
    res.cycle = c;
    CsmState state = CsmState::Idle;
    res.states.push_back(state);
    auto enter = [&](CsmState s) {
        state = s;
        res.states.push_back(s);
    };
    bool first_word_seen = false;
    std::uint64_t received = 0;
    const Tick lat_origin = mode == LatencyMode::TailWrite ? sc.tail_write : sc.start_received;

    for (std::uint64_t k = 0; k < max_cycles; ++k) {
        const Tick t = sc.reset_release + static_cast<Tick>(k) * c;
        bool beat = false;
        while (next_beat < beats.size() && beats[next_beat] < t) ++next_beat;  // unobserved
        if (next_beat < beats.size() && beats[next_beat] == t) {
            beat = true;
            ++next_beat;
        }
        switch (state) {
            case CsmState::Idle:
                res.counters = {};
                enter(CsmState::WaitStartAck);
                [[fallthrough]];
            case CsmState::WaitStartAck:
                if (t < sc.start_received) {
                    ++res.counters.setup_cycles;
                    break;
                }
                enter(CsmState::Mm2sState);
                [[fallthrough]];
            case CsmState::Mm2sState:
                if (!first_word_seen) {
                    if (beat) {
                        first_word_seen = true;
                        ++res.counters.throughput_cycles;
                        ++received;
                    } else if (t >= lat_origin) {
                        ++res.counters.latency_cycles;
                    }
                } else {
                    ++res.counters.throughput_cycles;
                    if (beat) ++received;
                }
                if (sc.expected_beats > 0 && received == sc.expected_beats) enter(CsmState::WaitDoneGetCntVals);
                break;
            case CsmState::WaitDoneGetCntVals:
                return res;
        }
        if (state == CsmState::WaitDoneGetCntVals) return res;
    }
    incomplete("state machine did not reach WAIT_DONE_GET_CNT_VALS within " + std::to_string(max_cycles) + " cycles");
}

}  // namespace sgdma
