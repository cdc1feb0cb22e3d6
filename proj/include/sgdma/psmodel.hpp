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

// Processor-side models: time for the APU or RPU to build a BD ring, and the
// APU -> RPU handshake over RPMsg (shared DDR flags) or GPIO registers.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sgdma/memmodel.hpp"
#include "sgdma/types.hpp"

namespace sgdma {

enum class CpuKind { Apu, Rpu };

std::string_view to_string(CpuKind k);

/// One outcome of the per-BD stall mixture.
struct StallOutcome {
    double probability = 0.0;
    double stall_ns = 0.0;
};

/// How often the stall mixture is drawn while building one ring.
enum class StallScope { PerRun, PerBd };

std::string_view to_string(StallScope s);
StallScope stall_scope_from_string(std::string_view s);

struct CpuModel {
    CpuKind kind = CpuKind::Apu;
    double per_bd_base_ns = 0.0;
    /// Once per ring (allocation, ring setup, sanity checks).
    double fixed_overhead_ns = 0.0;
    /// Uniform [0, jitter_ns] added per BD.
    double jitter_ns = 0.0;
    std::vector<StallOutcome> stall_model;
    StallScope stall_scope = StallScope::PerRun;
    std::uint64_t rng_seed = 0;

    /// Probabilities must be non-negative and sum to 1 (within 1e-9).
    void validate() const;

    static CpuModel apu_default();
    static CpuModel rpu_default();
};

/// `trials` samples of ring-creation time divided by n_bds, in ns. Each
/// sample is (fixed + sum of per-BD base and jitter + stalls) / n_bds.
std::vector<double> simulate_ring_creation(const CpuModel& cpu, std::uint64_t n_bds, std::uint64_t trials);

enum class HandshakeMechanism { Rpmsg, Gpio };

std::string_view to_string(HandshakeMechanism m);

struct HandshakeModel {
    HandshakeMechanism mechanism = HandshakeMechanism::Gpio;
    double per_hop_ns = 120.0;
    /// Size of the shared-memory flag touched by each RPMsg hop.
    std::uint32_t flag_bytes = 4;

    bool ddr_coupled() const { return mechanism == HandshakeMechanism::Rpmsg; }
    void validate() const;
};

/// Two-way handshake starting at t0: write/increment the Tx flag, then the
/// peer's Rx acknowledgement. RPMsg hops access the flag in the RPMsg region
/// through `ddr`; GPIO hops are fixed register latencies.
Tick handshake_latency(const HandshakeModel& model, DdrState& ddr, Tick t0);

}  // namespace sgdma
