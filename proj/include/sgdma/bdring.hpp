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

// Buffer-descriptor rings: construction, sanity checks and the fixed 64-byte
// in-memory image.
//
// Image layout of one descriptor (little-endian):
//   0  next descriptor address   u64
//   8  buffer base address       u64
//  16  control word              u32  length[25:0], end_of_ring[26], start_of_ring[27]
//  20  status word               u32  transferred[30:0], complete[31]
//  24  reserved, zero            40 bytes

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sgdma/memmodel.hpp"
#include "sgdma/types.hpp"

namespace sgdma {

constexpr std::size_t kDescriptorBytes = 64;
constexpr std::uint32_t kMaxDescriptorLength = (1u << 26) - 1;
constexpr std::size_t kMaxRingDescriptors = 1u << 16;

enum DescriptorFlag : std::uint8_t {
    kStartOfRing = 1u << 0,
    kEndOfRing = 1u << 1,
    kComplete = 1u << 2,
};

struct BufferDescriptor {
    Addr base_addr = 0;
    std::uint32_t length = 0;  // 26-bit field
    Addr next_bd_addr = 0;
    std::uint8_t flags = 0;
    std::uint32_t status_word = 0;  // 31 bits; bit 31 of the image is kComplete

    bool has(DescriptorFlag f) const { return (flags & f) != 0; }
    friend bool operator==(const BufferDescriptor&, const BufferDescriptor&) = default;
};

enum class Placement { Sequential, Random };

std::string_view to_string(Placement p);
Placement placement_from_string(std::string_view s);

struct RingSpec {
    std::size_t n_bds = 0;
    std::uint32_t bytes_per_bd = 0;
    Placement placement = Placement::Sequential;
    std::uint64_t rng_seed = 0;
    std::uint32_t n_cycles = 1;
};

struct BdRing {
    Addr bd_base_addr = 0;
    std::vector<BufferDescriptor> descriptors;
    std::uint32_t n_cycles = 1;
    Placement placement = Placement::Sequential;
    std::uint64_t rng_seed = 0;

    std::size_t size() const { return descriptors.size(); }
    /// Descriptors are stored contiguously from bd_base_addr.
    Addr descriptor_addr(std::size_t i) const { return bd_base_addr + i * kDescriptorBytes; }
    std::uint64_t payload_bytes_per_cycle() const;

    /// Descriptor indices in next-pointer order starting at the head.
    /// Throws InvalidRing if the chain is not a single closed cycle.
    std::vector<std::uint32_t> traversal_order() const;
};

/// Builds a closed ring in the ring/buffer regions of `map`.
BdRing create_ring(const RingSpec& spec, const MemoryMap& map = {});

/// `copies` traversals of `ring` laid out as one larger ring referencing the
/// same buffers, traversed once.
BdRing unroll_ring(const BdRing& ring, std::uint32_t copies, const MemoryMap& map = {});

enum class ViolationKind {
    EmptyRing,
    TooManyDescriptors,
    ZeroCycles,
    MisalignedDescriptor,
    DescriptorOutsideRingRegion,
    ZeroLength,
    LengthFieldOverflow,
    BufferOutsideBufferRegion,
    StatusFieldOverflow,
    FlagMismatch,
    RingNotClosed,
};

std::string_view to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::size_t bd_index = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    bool contains(ViolationKind k) const;
};

ValidationReport validate_ring(const BdRing& ring, const MemoryMap& map = {});

std::vector<std::uint8_t> serialize_ring(const BdRing& ring, const MemoryMap& map = {});
/// Inverse of serialize_ring. The image carries no head address, so the
/// caller supplies where descriptor 0 lives.
BdRing deserialize_ring(std::span<const std::uint8_t> image, Addr bd_base_addr);

void write_ring_image(const std::filesystem::path& path, std::span<const std::uint8_t> image);
std::vector<std::uint8_t> read_ring_image(const std::filesystem::path& path);

}  // namespace sgdma
