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
#include <random>
#include <set>
#include <sstream>

#include "sgdma/engine.hpp"

using namespace sgdma;

namespace {

constexpr Tick kQuietPhase = 7000 * kTicksPerNs;

DdrState ddr_at(Tick phase, const DdrConfig& cfg = {}, Tick backlog = 0) {
    DdrState d(DdrTiming::from(cfg, phase));
    if (backlog > 0) d.add_backlog(0, backlog);
    return d;
}

TransferTrace run(const BdRing& r, Tick phase, const EngineConfig& e = {}, const DdrConfig& dc = {},
                  Tick backlog = 0) {
    auto d = ddr_at(phase, dc, backlog);
    return run_mm2s(r, e, d, 0);
}

}  // namespace

TEST(RunMm2s, SingleBdLatencyInsideBand) {
    auto r = create_ring({1, 32, Placement::Sequential, 1});
    auto t = run(r, kQuietPhase);
    EXPECT_TRUE(t.complete);
    EXPECT_GE(t.latency_ns(), 849.0 * 0.95);
    EXPECT_LE(t.latency_ns(), 1516.0 * 1.05);
}

TEST(RunMm2s, CycleConversion) {
    EngineConfig e;
    EXPECT_NEAR(262 * e.bus.cycle_ns(), 787.0, 0.5);
}

TEST(RunMm2s, EventOrdering) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 40; ++i) {
        auto r = create_ring({1 + rng() % 40, static_cast<std::uint32_t>(1 + rng() % 9000),
                              i % 2 ? Placement::Random : Placement::Sequential, rng()});
        r.n_cycles = 1 + static_cast<std::uint32_t>(rng() % 4);
        auto t = run(r, static_cast<Tick>(rng() % ns_to_ticks(7800)), {}, {}, static_cast<Tick>(rng() % 400000));
        ASSERT_TRUE(t.complete);
        EXPECT_LE(t.tail_write, t.sg_ar_valid[0]);
        EXPECT_LE(t.sg_ar_valid[0], t.mm2s_ar_valid[0]);
        EXPECT_LE(t.mm2s_ar_valid[0], t.first_s_axis);
        EXPECT_LE(t.first_s_axis, t.done);
        for (std::size_t k = 0; k < t.sg_ar_valid.size(); ++k) {
            EXPECT_LT(t.sg_ar_valid[k], t.mm2s_ar_valid[k]);
            EXPECT_LT(t.mm2s_ar_valid[k], t.status_write[k]);
        }
        auto beats = t.s_axis_beats();
        for (std::size_t k = 1; k < beats.size(); ++k) EXPECT_GE(beats[k] - beats[k - 1], t.cycle);
        EXPECT_LE(t.throughput_MBps(), EngineConfig{}.bus.max_bandwidth_MBps() * (1 + 1e-12));
    }
}

TEST(RunMm2s, ThreeBdTwoCycleCounts) {
    auto r = create_ring({3, 4096, Placement::Sequential, 1});
    r.descriptors[0].length = 100;
    r.descriptors[1].length = 32;
    r.descriptors[2].length = 4000;
    r.n_cycles = 2;
    ASSERT_TRUE(validate_ring(r).ok());
    auto t = run(r, kQuietPhase);
    auto c = count_ddr_transactions(t);
    EXPECT_EQ(c.bd_fetches, 6u);
    EXPECT_EQ(c.status_writes, 6u);
    EXPECT_GE(c.buffer_fetches, 6u);
    EXPECT_EQ(t.beats_total, 2u * (4 + 1 + 125));
    EXPECT_EQ(t.s_axis_beats().size(), t.beats_total);
    EXPECT_EQ(t.payload_bytes_total, 2u * 4132);
}

TEST(CountDdrTransactions, Examples) {
    auto r = create_ring({4, 32, Placement::Sequential, 1});
    auto c1 = count_ddr_transactions(run(r, kQuietPhase));
    EXPECT_EQ(c1.bd_fetches, 4u);
    EXPECT_EQ(c1.status_writes, 4u);
    r.n_cycles = 8;
    auto c8 = count_ddr_transactions(run(r, kQuietPhase));
    EXPECT_EQ(c8.bd_fetches, 32u);
    EXPECT_EQ(c8.status_writes, 32u);
    EXPECT_EQ(c8, count_ddr_transactions(run(unroll_ring(r, 8), kQuietPhase)));
}

TEST(CountDdrTransactions, BurstsSplitAtFifoDepth) {
    EngineConfig e;
    e.fifo_depth_beats = 16;
    auto r = create_ring({2, 32 * 40, Placement::Sequential, 1});
    auto c = count_ddr_transactions(run(r, kQuietPhase, e));
    EXPECT_EQ(c.buffer_fetches, 2u * 3);
}

TEST(CountDdrTransactions, IncompleteTrace) {
    TransferTrace t;
    try {
        count_ddr_transactions(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IncompleteTrace);
    }
}

TEST(RunMm2s, RejectsInvalidRing) {
    auto r = create_ring({4, 32, Placement::Sequential, 1});
    r.descriptors[3].next_bd_addr = r.descriptor_addr(1);
    auto d = ddr_at(0);
    try {
        run_mm2s(r, {}, d, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidRing);
    }
}

TEST(RunMm2s, LatencyIndependentOfRingSize) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 30; ++i) {
        const Tick phase = static_cast<Tick>(rng() % ns_to_ticks(7800));
        const Tick backlog = static_cast<Tick>(rng() % ns_to_ticks(471));
        const std::uint32_t bytes = 32u << (rng() % 9);
        Tick ref = -1;
        for (std::size_t n : {1u, 2u, 4u, 64u, 1024u}) {
            for (std::uint32_t cyc : {1u, 3u}) {
                auto r = create_ring({n, bytes, Placement::Sequential, 1});
                r.n_cycles = cyc;
                const Tick lat = run(r, phase, {}, {}, backlog).latency();
                if (ref < 0) ref = lat;
                EXPECT_EQ(lat, ref) << "n=" << n << " cycles=" << cyc << " bytes=" << bytes;
            }
        }
    }
}

TEST(RunMm2s, CyclicEquivalence) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 25; ++i) {
        auto r = create_ring({1 + rng() % 30, static_cast<std::uint32_t>(1 + rng() % 5000),
                              i % 2 ? Placement::Random : Placement::Sequential, rng()});
        const auto c = static_cast<std::uint32_t>(1 + rng() % 5);
        r.n_cycles = c;
        const Tick phase = static_cast<Tick>(rng() % ns_to_ticks(7800));
        auto a = run(r, phase);
        auto b = run(unroll_ring(r, c), phase);
        EXPECT_EQ(a.s_axis_runs, b.s_axis_runs);
        EXPECT_EQ(a.done, b.done);
        EXPECT_EQ(count_ddr_transactions(a), count_ddr_transactions(b));
    }
}

TEST(RunMm2s, ThroughputGrowsWithPayload) {
    for (std::size_t n : {4u, 64u, 1024u}) {
        double prev = 0.0;
        for (std::uint32_t bytes = 32; bytes <= 8192; bytes *= 2) {
            std::vector<double> thr;
            for (int k = 0; k < 9; ++k) {
                auto r = create_ring({n, bytes, Placement::Sequential, 1});
                thr.push_back(run(r, ns_to_ticks(7800) * k / 9).throughput_MBps());
            }
            std::sort(thr.begin(), thr.end());
            EXPECT_GE(thr[4], prev * (1 - 1e-12)) << n << " " << bytes;
            prev = thr[4];
        }
    }
}

TEST(RunMm2s, PlacementDoesNotChangeThroughput) {
    for (std::uint32_t bytes : {32u, 512u, 8192u}) {
        std::vector<double> seq, rnd;
        for (int k = 0; k < 11; ++k) {
            const Tick phase = ns_to_ticks(7800) * k / 11;
            seq.push_back(run(create_ring({256, bytes, Placement::Sequential, 1}), phase).throughput_MBps());
            rnd.push_back(run(create_ring({256, bytes, Placement::Random, 7}), phase).throughput_MBps());
        }
        std::sort(seq.begin(), seq.end());
        std::sort(rnd.begin(), rnd.end());
        EXPECT_NEAR(seq[5], rnd[5], 0.01 * seq[5]);
    }
}

TEST(RunMm2s, OverlapOffIsSlower) {
    EngineConfig off;
    off.pipeline_overlap = false;
    auto r = create_ring({64, 1024, Placement::Sequential, 1});
    EXPECT_LT(run(r, kQuietPhase, off).throughput_MBps(), run(r, kQuietPhase).throughput_MBps());
}

TEST(RunMm2s, RefreshStallsAreRecorded) {
    auto r = create_ring({512, 4096, Placement::Sequential, 1});
    auto t = run(r, 0);
    const double span = ticks_to_ns(t.done - t.tail_write);
    std::set<Tick> windows;
    for (const auto& s : t.stalls) windows.insert(s.window_start);
    EXPECT_GE(windows.size(), static_cast<std::size_t>(span / 7800) - 1);
    EXPECT_LE(windows.size(), static_cast<std::size_t>(span / 7800) + 1);
}

TEST(FastPath, MatchesExactSimulation) {
    struct Case {
        EngineConfig e;
        DdrConfig d;
    };
    std::vector<Case> cases(5);
    cases[1].e.pipeline_overlap = false;
    cases[2].e.fifo_depth_beats = 16;
    cases[2].e.bd_prefetch_depth = 2;
    cases[3].e.bus.data_width_bits = 64;
    cases[3].d.row_switch_penalty_ns = 50;
    cases[4].d.refresh_period_ns = 3900;
    cases[4].d.refresh_stall_ns = 350;
    std::mt19937_64 rng(21);
    for (auto& cs : cases) {
        FastPathCache cache;
        for (int i = 0; i < 12; ++i) {
            const std::uint32_t bytes = 32u << (rng() % 9);
            const std::uint64_t n = 1 + rng() % 3000;
            const Tick phase = static_cast<Tick>(rng() % ns_to_ticks(cs.d.refresh_period_ns));
            const Tick backlog = static_cast<Tick>(rng() % ns_to_ticks(400));
            auto ring = create_ring({static_cast<std::size_t>(n), bytes, Placement::Sequential, 1});
            auto d1 = ddr_at(phase, cs.d, backlog);
            const auto exact = summarize_trace(run_mm2s(ring, cs.e, d1, 0));
            auto d2 = ddr_at(phase, cs.d, backlog);
            EXPECT_EQ(run_mm2s_uniform(n, bytes, cs.e, d2, 0, &cache), exact) << n << " " << bytes;
            auto d3 = ddr_at(phase, cs.d, backlog);
            EXPECT_EQ(run_mm2s_uniform(n, bytes, cs.e, d3, 0), exact);
        }
    }
}

TEST(FastPath, LongRunsAreCheapAndConsistent) {
    FastPathCache cache;
    EngineConfig e;
    auto d = ddr_at(123456);
    auto big = run_mm2s_uniform(1ull << 26, 32, e, d, 0, &cache);
    EXPECT_EQ(big.bd_fetches, 1ull << 26);
    EXPECT_EQ(big.status_writes, 1ull << 26);
    EXPECT_EQ(big.payload_bytes, 32ull << 26);
    EXPECT_GE(big.throughput_MBps(), 125.0);
    EXPECT_LE(cache.states(), std::size_t{1} << 18);
}

TEST(TraceCsv, HasHeaderAndEvents) {
    auto r = create_ring({2, 64, Placement::Sequential, 1});
    auto t = run(r, kQuietPhase);
    std::ostringstream os;
    write_trace_csv(os, t);
    const auto s = os.str();
    EXPECT_EQ(s.rfind("name,bd_index,timestamp_ns\n", 0), 0u);
    for (const char* ev : {"tail_write", "sg_ar_valid", "mm2s_ar_valid", "s_axis", "status_write", "first_s_axis",
                           "done"})
        EXPECT_NE(s.find(std::string("\n") + ev + ","), std::string::npos) << ev;
}

TEST(EngineConfig, Validate) {
    EngineConfig e;
    EXPECT_NO_THROW(e.validate());
    e.fifo_depth_beats = 0;
    EXPECT_THROW(e.validate(), Error);
}
