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

#include <random>

#include "sgdma/fabric.hpp"

using namespace sgdma;

TEST(BusConfig, CeilingAt256Bits) {
    BusConfig b;
    EXPECT_EQ(b.cycle(), 3003);
    EXPECT_NEAR(b.cycle_ns(), 3.003, 1e-12);
    EXPECT_EQ(b.beat_bytes(), 32u);
    EXPECT_NEAR(b.max_bandwidth_bytes_per_s() / 1e9, 10.6, 0.1);
}

TEST(BusConfig, RejectsUnsupportedWidths) {
    BusConfig b;
    for (std::uint32_t w : {32u, 64u, 256u, 512u, 1024u}) {
        b.data_width_bits = w;
        EXPECT_NO_THROW(b.validate());
    }
    for (std::uint32_t w : {0u, 8u, 128u, 2048u}) {
        b.data_width_bits = w;
        EXPECT_THROW(b.validate(), Error);
    }
    b = {};
    b.pl_clock_mhz = 0;
    EXPECT_THROW(b.validate(), Error);
}

TEST(BeatCount, CeilingDivisionForEveryWidth) {
    for (std::uint32_t w : {32u, 64u, 256u, 512u, 1024u}) {
        BusConfig b{w, 333.0};
        const std::uint64_t bb = w / 8;
        for (std::uint64_t n : std::vector<std::uint64_t>{1, bb - 1, bb, bb + 1, 4096, 12345})
            EXPECT_EQ(beat_count(n, b), (n + bb - 1) / bb) << w << " " << n;
    }
}

TEST(WordDelivery, SingleBeat) {
    BusConfig b;
    auto t = word_delivery_times(0, 32, b);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0], 0);
}

TEST(WordDelivery, BackToBack4096) {
    BusConfig b;
    auto t = word_delivery_times(b.cycle() * 10, 4096, b);
    ASSERT_EQ(t.size(), 128u);
    EXPECT_EQ(t.back() - t.front(), 127 * b.cycle());
    EXPECT_NEAR(ticks_to_ns(t.back() - t.front()), 127 * 3.003, 1e-9);
}

TEST(WordDelivery, BackpressureInsertsGapsOnClockEdges) {
    BusConfig b;
    const Tick c = b.cycle();
    std::vector<Tick> ready = {0, 0, 10 * c + 5, 10 * c + 5};
    auto t = word_delivery_times(0, 128, b, ready);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[1], c);
    EXPECT_EQ(t[2], 11 * c);
    EXPECT_EQ(t[3], 12 * c);
}

TEST(WordDelivery, CeilingHoldsForRandomSchedules) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        BusConfig b;
        b.data_width_bits = std::array{32u, 64u, 256u, 512u, 1024u}[rng() % 5];
        const std::uint64_t bytes = 1 + rng() % 20000;
        const std::uint64_t n = beat_count(bytes, b);
        std::vector<Tick> ready(n);
        Tick r = 0;
        for (auto& x : ready) x = (r += static_cast<Tick>(rng() % (3 * b.cycle())));
        auto t = word_delivery_times(0, bytes, b, ready);
        ASSERT_EQ(t.size(), n);
        for (std::size_t k = 1; k < t.size(); ++k) {
            EXPECT_GE(t[k] - t[k - 1], b.cycle());
            EXPECT_GE(t[k], ready[k]);
            EXPECT_EQ(t[k] % b.cycle(), 0);
        }
        EXPECT_LE(stream_throughput_MBps(t, bytes, b.cycle()), b.max_bandwidth_MBps() * (1 + 1e-12));
    }
}

TEST(WordDelivery, DoublingWidthAtMostHalvesStreamTime) {
    const std::pair<std::uint32_t, std::uint32_t> pairs[] = {{32, 64}, {256, 512}, {512, 1024}};
    for (std::uint64_t bytes : {1ull, 31ull, 32ull, 1000ull, 4096ull, 65536ull})
        for (auto [w, w2] : pairs) {
            BusConfig a{w, 333.0}, d{w2, 333.0};
            const auto ta = word_delivery_times(0, bytes, a);
            const auto td = word_delivery_times(0, bytes, d);
            const Tick span_a = ta.back() + a.cycle(), span_d = td.back() + d.cycle();
            EXPECT_LE(span_d, span_a);
            EXPECT_GE(2 * span_d, span_a);
        }
}

TEST(BeatRuns, AppendMergesContiguousBeats) {
    const Tick c = 3003;
    std::vector<BeatRun> runs;
    append_beat_run(runs, {0, 2}, c);
    append_beat_run(runs, {2 * c, 3}, c);
    append_beat_run(runs, {10 * c, 1}, c);
    ASSERT_EQ(runs.size(), 2u);
    EXPECT_EQ(runs[0], (BeatRun{0, 5}));
    auto ts = expand_beat_runs(runs, c);
    ASSERT_EQ(ts.size(), 6u);
    EXPECT_EQ(ts[4], 4 * c);
    EXPECT_EQ(ts[5], 10 * c);
}

TEST(ClockEdge, RoundsUp) {
    EXPECT_EQ(clock_edge(0, 3003), 0);
    EXPECT_EQ(clock_edge(1, 3003), 3003);
    EXPECT_EQ(clock_edge(3003, 3003), 3003);
    EXPECT_EQ(clock_edge(3004, 3003), 6006);
}
