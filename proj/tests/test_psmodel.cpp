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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgdma/psmodel.hpp"

using namespace sgdma;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double spread(const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

}  // namespace

TEST(RingCreation, ApuBestCaseBand) {
    for (std::uint64_t n : {1u, 16u, 8192u}) {
        auto s = simulate_ring_creation(CpuModel::apu_default(), n, 1000);
        const double best = *std::min_element(s.begin(), s.end());
        EXPECT_GE(best, 100.0) << n;
        EXPECT_LE(best, 250.0) << n;
    }
}

TEST(RingCreation, ApuWorstCaseExceeds30us) {
    auto apu = CpuModel::apu_default();
    double p_big = 0.0;
    for (const auto& o : apu.stall_model)
        if (o.stall_ns > 30000) p_big += o.probability;
    EXPECT_GT(p_big, 0.0);
    auto s = simulate_ring_creation(apu, 1, 100000);
    EXPECT_GT(*std::max_element(s.begin(), s.end()), 30000.0);
}

TEST(RingCreation, BestCaseRatio) {
    for (std::uint64_t n : {1u, 2u, 64u, 8192u}) {
        auto a = simulate_ring_creation(CpuModel::apu_default(), n, 500);
        auto r = simulate_ring_creation(CpuModel::rpu_default(), n, 500);
        const double ratio = *std::min_element(r.begin(), r.end()) / *std::min_element(a.begin(), a.end());
        EXPECT_GE(ratio, 5.0) << n;
        EXPECT_LE(ratio, 9.0) << n;
    }
}

TEST(RingCreation, RpuSpreadBelowApu) {
    for (std::uint64_t n = 2; n <= 8192; n *= 2) {
        auto a = simulate_ring_creation(CpuModel::apu_default(), n, 100);
        auto r = simulate_ring_creation(CpuModel::rpu_default(), n, 100);
        EXPECT_LT(spread(r), spread(a)) << n;
    }
}

TEST(RingCreation, PerBdTimeFallsWithRingSize) {
    auto apu_no_stall = CpuModel::apu_default();
    apu_no_stall.stall_model = {{1.0, 0.0}};
    for (const auto& cpu : {CpuModel::rpu_default(), apu_no_stall}) {
        double prev = 1e300;
        for (std::uint64_t n = 1; n <= 8192; n *= 2) {
            const double m = mean(simulate_ring_creation(cpu, n, 2000));
            EXPECT_LE(m, prev + 0.5) << to_string(cpu.kind) << " " << n;
            prev = m;
        }
    }
    // With stalls: the amortized overhead dominates the noise for small rings.
    const double m1 = mean(simulate_ring_creation(CpuModel::apu_default(), 1, 100000));
    const double m2 = mean(simulate_ring_creation(CpuModel::apu_default(), 2, 100000));
    EXPECT_LT(m2, m1);
}

TEST(RingCreation, StallFrequenciesMatchModel) {
    auto apu = CpuModel::apu_default();
    apu.fixed_overhead_ns = 0;
    const std::uint64_t N = 100000;
    auto s = simulate_ring_creation(apu, 1, N);
    // Outcomes are far apart relative to the jitter, so each sample
    // identifies its stall outcome.
    for (const auto& o : apu.stall_model) {
        const double lo = apu.per_bd_base_ns + o.stall_ns;
        const double hi = lo + apu.jitter_ns;
        const auto k = std::count_if(s.begin(), s.end(), [&](double x) { return x >= lo - 1e-9 && x <= hi + 1e-9; });
        const double expect = N * o.probability;
        const double sigma = std::sqrt(N * o.probability * (1 - o.probability));
        EXPECT_LE(std::abs(k - expect), 4.5 * sigma + 1) << o.stall_ns;
    }
}

TEST(RingCreation, DeterministicPerSeed) {
    auto a = simulate_ring_creation(CpuModel::apu_default(), 16, 100);
    EXPECT_EQ(a, simulate_ring_creation(CpuModel::apu_default(), 16, 100));
    auto other = CpuModel::apu_default();
    other.rng_seed += 1;
    EXPECT_NE(a, simulate_ring_creation(other, 16, 100));
}

TEST(CpuModel, ValidateProbabilities) {
    auto m = CpuModel::apu_default();
    EXPECT_NO_THROW(m.validate());
    m.stall_model[0].probability += 0.01;
    EXPECT_THROW(m.validate(), Error);
    m = CpuModel::rpu_default();
    m.per_bd_base_ns = -1;
    EXPECT_THROW(m.validate(), Error);
}

TEST(Handshake, GpioIsFixed) {
    HandshakeModel g{HandshakeMechanism::Gpio, 120.0, 4};
    EXPECT_FALSE(g.ddr_coupled());
    for (Tick t0 : {Tick{0}, ns_to_ticks(5), ns_to_ticks(7800), ns_to_ticks(123456)}) {
        DdrState d(DdrTiming::from({}, 0));
        EXPECT_EQ(handshake_latency(g, d, t0), ns_to_ticks(240));
    }
}

TEST(Handshake, RpmsgRefreshFree) {
    HandshakeModel r{HandshakeMechanism::Rpmsg, 120.0, 4};
    EXPECT_TRUE(r.ddr_coupled());
    const auto t = DdrTiming::from({}, ns_to_ticks(5000));
    DdrState d(t);
    EXPECT_EQ(handshake_latency(r, d, 0), 2 * (ns_to_ticks(120) + t.base_access + t.transfer_time(4)));
}

TEST(Handshake, RpmsgOverlappingRefreshIsSlower) {
    HandshakeModel g{HandshakeMechanism::Gpio, 120.0, 4};
    HandshakeModel r{HandshakeMechanism::Rpmsg, 120.0, 4};
    const auto t = DdrTiming::from({}, ns_to_ticks(100));
    DdrState dr(t), dg(t), quiet(DdrTiming::from({}, ns_to_ticks(5000)));
    const Tick with_refresh = handshake_latency(r, dr, 0);
    EXPECT_LT(handshake_latency(g, dg, 0), with_refresh);
    const Tick without = handshake_latency(r, quiet, 0);
    EXPECT_GT(with_refresh, without);
    EXPECT_LE(with_refresh - without, ns_to_ticks(210));
}
