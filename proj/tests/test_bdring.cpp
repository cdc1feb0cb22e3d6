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

#include <cstdio>
#include <filesystem>
#include <map>

#include "sgdma/bdring.hpp"

using namespace sgdma;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::BadArgs;
}

std::uint32_t u32_at(const std::vector<std::uint8_t>& img, std::size_t off) {
    return img[off] | img[off + 1] << 8 | img[off + 2] << 16 | static_cast<std::uint32_t>(img[off + 3]) << 24;
}

// Follows next pointers from the head; returns the number of steps until the
// head is reached again (0 if it never is).
std::size_t closure_length(const BdRing& r) {
    std::map<Addr, std::size_t> idx;
    for (std::size_t i = 0; i < r.size(); ++i) idx[r.descriptor_addr(i)] = i;
    std::size_t cur = 0;
    for (std::size_t steps = 1; steps <= r.size(); ++steps) {
        auto it = idx.find(r.descriptors[cur].next_bd_addr);
        if (it == idx.end()) return 0;
        if (it->second == 0) return steps;
        cur = it->second;
    }
    return 0;
}

}  // namespace

TEST(CreateRing, SequentialFourBds) {
    MemoryMap m;
    auto r = create_ring({4, 32, Placement::Sequential, 1});
    ASSERT_EQ(r.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(r.descriptors[i].base_addr, m.buffer_base() + 32 * i);
        EXPECT_EQ(r.descriptors[i].length, 32u);
    }
    EXPECT_EQ(r.bd_base_addr, m.ring_base());
    EXPECT_TRUE(validate_ring(r).ok());
}

TEST(CreateRing, FullRingRegion) {
    auto r = create_ring({1u << 16, 64, Placement::Sequential, 1});
    EXPECT_EQ(r.size(), 1u << 16);
    EXPECT_EQ(r.size() * kDescriptorBytes, MemoryMap{}.ring_size);
    EXPECT_TRUE(validate_ring(r).ok());
}

TEST(CreateRing, OnePastRingRegion) {
    EXPECT_EQ(code_of([] { create_ring({(1u << 16) + 1, 64, Placement::Sequential, 1}); }),
              ErrorCode::CapacityExceeded);
}

TEST(CreateRing, BufferRegionOverflow) {
    // 8192 x 64 KiB = 512 MiB > 256 MiB.
    EXPECT_EQ(code_of([] { create_ring({8192, 1u << 16, Placement::Sequential, 1}); }), ErrorCode::CapacityExceeded);
    EXPECT_EQ(code_of([] { create_ring({1, kMaxDescriptorLength + 1, Placement::Sequential, 1}); }),
              ErrorCode::CapacityExceeded);
}

TEST(CreateRing, ZeroLength) {
    EXPECT_EQ(code_of([] { create_ring({4, 0, Placement::Sequential, 1}); }), ErrorCode::ZeroLengthPayload);
    EXPECT_EQ(code_of([] { create_ring({0, 32, Placement::Sequential, 1}); }), ErrorCode::ZeroLengthPayload);
}

TEST(CreateRing, RandomPlacementExhausts) {
    MemoryMap m;
    m.buffer_size = 64 * 8;
    EXPECT_EQ(code_of([&] { create_ring({16, 32, Placement::Random, 3}, m); }), ErrorCode::CapacityExceeded);
    // Fits by total size but not in 64-byte slots.
    m.buffer_size = 64 * 4;
    EXPECT_EQ(code_of([&] { create_ring({5, 48, Placement::Random, 3}, m); }), ErrorCode::CapacityExceeded);
}

TEST(CreateRing, RandomPlacementIsReproducibleAndDisjoint) {
    MemoryMap m;
    for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
        auto a = create_ring({512, 100, Placement::Random, seed});
        auto b = create_ring({512, 100, Placement::Random, seed});
        EXPECT_EQ(serialize_ring(a), serialize_ring(b));
        std::map<Addr, Addr> spans;
        for (const auto& d : a.descriptors) {
            EXPECT_EQ(d.base_addr % 64, 0u);
            EXPECT_GE(d.base_addr, m.buffer_base());
            EXPECT_LE(d.base_addr + d.length, m.buffer_end());
            spans[d.base_addr] = d.base_addr + d.length;
        }
        ASSERT_EQ(spans.size(), 512u);
        Addr prev_end = 0;
        for (auto [s, e] : spans) {
            EXPECT_GE(s, prev_end);
            prev_end = e;
        }
    }
    EXPECT_NE(serialize_ring(create_ring({64, 32, Placement::Random, 1})),
              serialize_ring(create_ring({64, 32, Placement::Random, 2})));
}

TEST(CreateRing, ClosureAndPayloadProperties) {
    for (std::size_t n : {1u, 2u, 3u, 16u, 1000u})
        for (std::uint32_t len : {1u, 32u, 100u, 4096u})
            for (auto pl : {Placement::Sequential, Placement::Random}) {
                auto r = create_ring({n, len, pl, n * 31 + len});
                EXPECT_EQ(closure_length(r), n);
                EXPECT_EQ(r.payload_bytes_per_cycle(), n * len);
                EXPECT_TRUE(r.descriptors.front().has(kStartOfRing));
                EXPECT_TRUE(r.descriptors.back().has(kEndOfRing));
                EXPECT_TRUE(validate_ring(r).ok());
            }
}

TEST(ValidateRing, BrokenClosure) {
    auto r = create_ring({16, 32, Placement::Sequential, 1});
    r.descriptors.back().next_bd_addr = r.descriptor_addr(3);
    EXPECT_TRUE(validate_ring(r).contains(ViolationKind::RingNotClosed));
}

TEST(ValidateRing, LengthOverflow) {
    auto r = create_ring({4, 32, Placement::Sequential, 1});
    r.descriptors[2].length = 1u << 26;
    auto rep = validate_ring(r);
    EXPECT_TRUE(rep.contains(ViolationKind::LengthFieldOverflow));
    EXPECT_FALSE(rep.ok());
}

TEST(ValidateRing, ReportsEachViolation) {
    MemoryMap m;
    auto r = create_ring({4, 32, Placement::Sequential, 1});
    auto bad = r;
    bad.descriptors[1].length = 0;
    EXPECT_TRUE(validate_ring(bad).contains(ViolationKind::ZeroLength));
    bad = r;
    bad.descriptors[1].base_addr = m.buffer_end() - 8;
    EXPECT_TRUE(validate_ring(bad).contains(ViolationKind::BufferOutsideBufferRegion));
    bad = r;
    bad.n_cycles = 0;
    EXPECT_TRUE(validate_ring(bad).contains(ViolationKind::ZeroCycles));
    bad = r;
    bad.descriptors.clear();
    EXPECT_TRUE(validate_ring(bad).contains(ViolationKind::EmptyRing));
    bad = r;
    bad.bd_base_addr += 8;
    EXPECT_TRUE(validate_ring(bad).contains(ViolationKind::MisalignedDescriptor));
    bad = r;
    bad.descriptors[0].flags = 0;
    EXPECT_TRUE(validate_ring(bad).contains(ViolationKind::FlagMismatch));
    bad = r;
    bad.descriptors[0].status_word = 1u << 31;
    EXPECT_TRUE(validate_ring(bad).contains(ViolationKind::StatusFieldOverflow));
    bad = r;
    bad.bd_base_addr = m.buffer_base();
    EXPECT_TRUE(validate_ring(bad).contains(ViolationKind::DescriptorOutsideRingRegion));
}

TEST(SerializeRing, SingleDescriptorImage) {
    MemoryMap m;
    auto r = create_ring({1, 32, Placement::Sequential, 1});
    auto img = serialize_ring(r);
    ASSERT_EQ(img.size(), 64u);
    EXPECT_EQ(u32_at(img, 16) & kMaxDescriptorLength, 32u);
    std::uint64_t base = 0, next = 0;
    for (int i = 7; i >= 0; --i) {
        base = base << 8 | img[8 + i];
        next = next << 8 | img[i];
    }
    EXPECT_EQ(base, m.buffer_base());
    EXPECT_EQ(next, m.ring_base());
    for (std::size_t i = 24; i < 64; ++i) EXPECT_EQ(img[i], 0);
}

TEST(SerializeRing, FourDescriptors) {
    EXPECT_EQ(serialize_ring(create_ring({4, 32, Placement::Sequential, 1})).size(), 256u);
}

TEST(SerializeRing, RoundTrip) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
        for (auto pl : {Placement::Sequential, Placement::Random}) {
            auto r = create_ring({static_cast<std::size_t>(seed * 7), static_cast<std::uint32_t>(seed * 37), pl, seed});
            r.descriptors[0].status_word = 5 | (1u << 30);
            r.descriptors[0].flags |= kComplete;
            auto img = serialize_ring(r);
            auto back = deserialize_ring(img, r.bd_base_addr);
            EXPECT_EQ(back.descriptors, r.descriptors);
            EXPECT_EQ(serialize_ring(back), img);
        }
}

TEST(SerializeRing, RejectsInvalidRingAndBadImages) {
    auto r = create_ring({4, 32, Placement::Sequential, 1});
    auto bad = r;
    bad.descriptors[3].next_bd_addr = 0x80000000ull;
    EXPECT_EQ(code_of([&] { serialize_ring(bad); }), ErrorCode::InvalidRing);

    auto img = serialize_ring(r);
    auto corrupt = img;
    corrupt[40] = 1;
    EXPECT_THROW(deserialize_ring(corrupt, r.bd_base_addr), Error);
    img.pop_back();
    EXPECT_THROW(deserialize_ring(img, r.bd_base_addr), Error);
}

TEST(SerializeRing, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "sgdma_test_ring.bdring";
    auto img = serialize_ring(create_ring({16, 64, Placement::Random, 5}));
    write_ring_image(path, img);
    EXPECT_EQ(read_ring_image(path), img);
    std::filesystem::remove(path);
    EXPECT_EQ(code_of([&] { read_ring_image(path); }), ErrorCode::IoError);
}

TEST(UnrollRing, CopiesReferenceSameBuffers) {
    auto r = create_ring({3, 96, Placement::Random, 8});
    r.n_cycles = 4;
    auto u = unroll_ring(r, 4);
    ASSERT_EQ(u.size(), 12u);
    EXPECT_EQ(u.n_cycles, 1u);
    for (std::size_t i = 0; i < 12; ++i) {
        EXPECT_EQ(u.descriptors[i].base_addr, r.descriptors[i % 3].base_addr);
        EXPECT_EQ(u.descriptors[i].length, r.descriptors[i % 3].length);
    }
    EXPECT_TRUE(validate_ring(u).ok());
}
