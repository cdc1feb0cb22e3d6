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

#include "sgdma/psmodel.hpp"

#include <cmath>
#include <string>

#include "sgdma/rng.hpp"

namespace sgdma {

std::string_view to_string(CpuKind k) { return k == CpuKind::Rpu ? "rpu" : "apu"; }

std::string_view to_string(StallScope s) { return s == StallScope::PerBd ? "per_bd" : "per_run"; }

StallScope stall_scope_from_string(std::string_view s) {
    if (s == "per_run") return StallScope::PerRun;
    if (s == "per_bd") return StallScope::PerBd;
    throw Error(ErrorCode::ConfigInvalid, "stall_scope must be per_run or per_bd, got '" + std::string(s) + "'");
}

std::string_view to_string(HandshakeMechanism m) { return m == HandshakeMechanism::Rpmsg ? "rpmsg" : "gpio"; }

void CpuModel::validate() const {
    auto bad = [&](const std::string& what) {
        throw Error(ErrorCode::ConfigInvalid, "psmodel." + std::string(to_string(kind)) + ": " + what);
    };
    if (per_bd_base_ns < 0 || fixed_overhead_ns < 0 || jitter_ns < 0) bad("durations must be >= 0");
    if (stall_model.empty()) bad("stall_model must list at least one outcome");
    double sum = 0.0;
    for (const auto& o : stall_model) {
        if (o.probability < 0 || o.stall_ns < 0) bad("stall outcomes need probability >= 0 and stall_ns >= 0");
        sum += o.probability;
    }
    if (std::abs(sum - 1.0) > 1e-9) bad("stall_model probabilities must sum to 1");
}

// Calibrated against the published best-case band and speedup; the rare
// outcome stands in for Linux scheduling stalls.
CpuModel CpuModel::apu_default() {
    CpuModel m;
    m.kind = CpuKind::Apu;
    m.per_bd_base_ns = 120.0;
    m.fixed_overhead_ns = 100.0;
    m.jitter_ns = 20.0;
    m.stall_model = {{0.895, 0.0}, {0.1, 1500.0}, {0.005, 62000.0}};
    m.rng_seed = 0xA9F0;
    return m;
}

CpuModel CpuModel::rpu_default() {
    CpuModel m;
    m.kind = CpuKind::Rpu;
    m.per_bd_base_ns = 840.0;
    m.fixed_overhead_ns = 700.0;
    m.jitter_ns = 3.0;
    m.stall_model = {{1.0, 0.0}};
    m.rng_seed = 0x52F0;
    return m;
}

std::vector<double> simulate_ring_creation(const CpuModel& cpu, std::uint64_t n_bds, std::uint64_t trials) {
    cpu.validate();
    if (n_bds == 0 || trials == 0) throw Error(ErrorCode::BadArgs, "simulate_ring_creation needs n_bds >= 1 and trials >= 1");
    Rng rng(splitmix64(cpu.rng_seed ^ splitmix64(n_bds)));
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& o : cpu.stall_model) cdf.push_back(acc += o.probability);

    auto draw_stall = [&] {
        if (cpu.stall_model.size() == 1) return cpu.stall_model.front().stall_ns;
        const double u = uniform_unit(rng) * acc;
        std::size_t k = 0;
        while (k + 1 < cdf.size() && u >= cdf[k]) ++k;
        return cpu.stall_model[k].stall_ns;
    };

    std::vector<double> out;
    out.reserve(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
        double total = cpu.fixed_overhead_ns;
        for (std::uint64_t i = 0; i < n_bds; ++i) {
            total += cpu.per_bd_base_ns + cpu.jitter_ns * uniform_unit(rng);
            if (cpu.stall_scope == StallScope::PerBd) total += draw_stall();
        }
        if (cpu.stall_scope == StallScope::PerRun) total += draw_stall();
        out.push_back(total / static_cast<double>(n_bds));
    }
    return out;
}

void HandshakeModel::validate() const {
    if (!(per_hop_ns > 0)) throw Error(ErrorCode::ConfigInvalid, "handshake: per_hop_ns must be > 0");
    if (flag_bytes == 0) throw Error(ErrorCode::ConfigInvalid, "handshake: flag_bytes must be > 0");
}

Tick handshake_latency(const HandshakeModel& model, DdrState& ddr, Tick t0) {
    model.validate();
    const Tick hop = ns_to_ticks(model.per_hop_ns);
    if (!model.ddr_coupled()) return 2 * hop;
    Tick t = t0;
    const Addr flags = ddr.map().rpmsg_base();
    // Tx flag increment by the sender, then the Rx acknowledgement.
    for (Addr flag : {flags, flags + 64}) {
        t += hop;
        const auto comp = ddr.access({flag, model.flag_bytes, AccessKind::FlagAccess, t});
        t = comp.finish;
    }
    return t - t0;
}

}  // namespace sgdma
