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

#include "sgdma/bdring.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <unordered_map>

#include "sgdma/rng.hpp"

namespace sgdma {

namespace {

constexpr std::uint32_t kLengthMask = kMaxDescriptorLength;
constexpr std::uint32_t kCtrlEndOfRing = 1u << 26;
constexpr std::uint32_t kCtrlStartOfRing = 1u << 27;
constexpr std::uint32_t kStatusComplete = 1u << 31;

// Random placement gives up on a descriptor after this many rejected draws.
constexpr int kMaxPlacementAttempts = 4096;

Addr align_up(Addr v, Addr a) { return (v + a - 1) / a * a; }

template <typename T>
void put_le(std::uint8_t* dst, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get_le(const std::uint8_t* src) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(src[i]) << (8 * i);
    return v;
}

void link_ring(BdRing& ring) {
    const std::size_t n = ring.descriptors.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto& d = ring.descriptors[i];
        d.next_bd_addr = ring.descriptor_addr((i + 1) % n);
        d.flags = 0;
        if (i == 0) d.flags |= kStartOfRing;
        if (i + 1 == n) d.flags |= kEndOfRing;
    }
}

std::vector<Addr> random_offsets(std::size_t n, Addr len, Addr region, std::uint64_t seed) {
    const Addr slot = align_up(len, kDescriptorBytes);
    if (slot > region) throw Error(ErrorCode::CapacityExceeded, "buffer larger than buffer region");
    const Addr positions = (region - slot) / kDescriptorBytes + 1;

    Rng rng(seed);
    std::map<Addr, Addr> placed;  // start -> end (exclusive)
    std::vector<Addr> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool ok = false;
        for (int attempt = 0; attempt < kMaxPlacementAttempts && !ok; ++attempt) {
            const Addr start = uniform_below(rng, positions) * kDescriptorBytes;
            const Addr end = start + slot;
            auto next = placed.lower_bound(start);
            if (next != placed.end() && next->first < end) continue;
            if (next != placed.begin() && std::prev(next)->second > start) continue;
            placed.emplace(start, end);
            out.push_back(start);
            ok = true;
        }
        if (!ok)
            throw Error(ErrorCode::OverlapDetected,
                        "random placement could not find a free slot for descriptor " + std::to_string(i));
    }
    return out;
}

}  // namespace

std::string_view to_string(Placement p) { return p == Placement::Random ? "random" : "sequential"; }

Placement placement_from_string(std::string_view s) {
    if (s == "sequential") return Placement::Sequential;
    if (s == "random") return Placement::Random;
    throw Error(ErrorCode::ConfigInvalid, "unknown placement '" + std::string(s) + "'");
}

std::uint64_t BdRing::payload_bytes_per_cycle() const {
    std::uint64_t sum = 0;
    for (const auto& d : descriptors) sum += d.length;
    return sum;
}

std::vector<std::uint32_t> BdRing::traversal_order() const {
    const std::size_t n = descriptors.size();
    if (n == 0) throw Error(ErrorCode::InvalidRing, "empty ring");
    std::vector<std::uint32_t> order;
    order.reserve(n);
    std::vector<bool> seen(n, false);
    Addr cur = bd_base_addr;
    for (std::size_t step = 0; step < n; ++step) {
        if (cur < bd_base_addr || (cur - bd_base_addr) % kDescriptorBytes != 0 ||
            (cur - bd_base_addr) / kDescriptorBytes >= n)
            throw Error(ErrorCode::InvalidRing, "next pointer leaves the ring");
        const auto idx = static_cast<std::uint32_t>((cur - bd_base_addr) / kDescriptorBytes);
        if (seen[idx]) throw Error(ErrorCode::InvalidRing, "ring closes before visiting every descriptor");
        seen[idx] = true;
        order.push_back(idx);
        cur = descriptors[idx].next_bd_addr;
    }
    if (cur != bd_base_addr) throw Error(ErrorCode::InvalidRing, "tail does not point back to head");
    return order;
}

BdRing create_ring(const RingSpec& spec, const MemoryMap& map) {
    if (spec.n_bds == 0) throw Error(ErrorCode::ZeroLengthPayload, "ring needs at least one descriptor");
    if (spec.bytes_per_bd == 0) throw Error(ErrorCode::ZeroLengthPayload, "bytes_per_bd must be > 0");
    if (spec.bytes_per_bd > kMaxDescriptorLength)
        throw Error(ErrorCode::CapacityExceeded, "bytes_per_bd exceeds the 26-bit length field");
    if (spec.n_cycles == 0) throw Error(ErrorCode::ConfigInvalid, "n_cycles must be >= 1");
    if (spec.n_bds > kMaxRingDescriptors || spec.n_bds * kDescriptorBytes > map.ring_size)
        throw Error(ErrorCode::CapacityExceeded,
                    std::to_string(spec.n_bds) + " descriptors do not fit in the ring region");

    const Addr len = spec.bytes_per_bd;
    const Addr footprint = spec.placement == Placement::Random ? align_up(len, kDescriptorBytes) : len;
    if (footprint * spec.n_bds > map.buffer_size)
        throw Error(ErrorCode::CapacityExceeded, "buffers do not fit in the buffer region");

    BdRing ring;
    ring.bd_base_addr = map.ring_base();
    ring.n_cycles = spec.n_cycles;
    ring.placement = spec.placement;
    ring.rng_seed = spec.rng_seed;
    ring.descriptors.resize(spec.n_bds);

    if (spec.placement == Placement::Sequential) {
        for (std::size_t i = 0; i < spec.n_bds; ++i) ring.descriptors[i].base_addr = map.buffer_base() + i * len;
    } else {
        const auto offsets = random_offsets(spec.n_bds, len, map.buffer_size, spec.rng_seed);
        for (std::size_t i = 0; i < spec.n_bds; ++i) ring.descriptors[i].base_addr = map.buffer_base() + offsets[i];
    }
    for (auto& d : ring.descriptors) d.length = spec.bytes_per_bd;
    link_ring(ring);
    return ring;
}

BdRing unroll_ring(const BdRing& ring, std::uint32_t copies, const MemoryMap& map) {
    const auto order = ring.traversal_order();
    const std::size_t n = order.size() * copies;
    if (n == 0 || n > kMaxRingDescriptors || n * kDescriptorBytes > map.ring_size)
        throw Error(ErrorCode::CapacityExceeded, "unrolled ring does not fit in the ring region");
    BdRing out;
    out.bd_base_addr = ring.bd_base_addr;
    out.n_cycles = 1;
    out.placement = ring.placement;
    out.rng_seed = ring.rng_seed;
    out.descriptors.reserve(n);
    for (std::size_t k = 0; k < n / order.size(); ++k)
        for (auto idx : order) {
            BufferDescriptor d = ring.descriptors[idx];
            d.status_word = 0;
            out.descriptors.push_back(d);
        }
    link_ring(out);
    return out;
}

std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::EmptyRing: return "EmptyRing";
        case ViolationKind::TooManyDescriptors: return "TooManyDescriptors";
        case ViolationKind::ZeroCycles: return "ZeroCycles";
        case ViolationKind::MisalignedDescriptor: return "MisalignedDescriptor";
        case ViolationKind::DescriptorOutsideRingRegion: return "DescriptorOutsideRingRegion";
        case ViolationKind::ZeroLength: return "ZeroLength";
        case ViolationKind::LengthFieldOverflow: return "LengthFieldOverflow";
        case ViolationKind::BufferOutsideBufferRegion: return "BufferOutsideBufferRegion";
        case ViolationKind::StatusFieldOverflow: return "StatusFieldOverflow";
        case ViolationKind::FlagMismatch: return "FlagMismatch";
        case ViolationKind::RingNotClosed: return "RingNotClosed";
    }
    return "?";
}

bool ValidationReport::contains(ViolationKind k) const {
    for (const auto& v : violations)
        if (v.kind == k) return true;
    return false;
}

ValidationReport validate_ring(const BdRing& ring, const MemoryMap& map) {
    ValidationReport report;
    auto add = [&](ViolationKind k, std::size_t i, std::string detail) {
        report.violations.push_back({k, i, std::move(detail)});
    };
    const std::size_t n = ring.descriptors.size();
    if (n == 0) {
        add(ViolationKind::EmptyRing, 0, "ring has no descriptors");
        return report;
    }
    if (n > kMaxRingDescriptors) add(ViolationKind::TooManyDescriptors, n, std::to_string(n) + " descriptors");
    if (ring.n_cycles == 0) add(ViolationKind::ZeroCycles, 0, "n_cycles must be >= 1");
    if (ring.bd_base_addr % kDescriptorBytes != 0)
        add(ViolationKind::MisalignedDescriptor, 0, "ring base is not 64-byte aligned");
    if (ring.bd_base_addr < map.ring_base() || ring.bd_base_addr + n * kDescriptorBytes > map.buffer_base() ||
        ring.bd_base_addr + n * kDescriptorBytes < ring.bd_base_addr)
        add(ViolationKind::DescriptorOutsideRingRegion, 0, "descriptor storage leaves the ring region");

    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = ring.descriptors[i];
        if (d.length == 0) add(ViolationKind::ZeroLength, i, "zero-length payload");
        if (d.length > kMaxDescriptorLength)
            add(ViolationKind::LengthFieldOverflow, i, "length " + std::to_string(d.length) + " exceeds 26 bits");
        if (d.length != 0 && (d.base_addr < map.buffer_base() || d.base_addr >= map.buffer_end() ||
                              d.length > map.buffer_end() - d.base_addr))
            add(ViolationKind::BufferOutsideBufferRegion, i, "buffer leaves the buffer region");
        if (d.status_word & kStatusComplete) add(ViolationKind::StatusFieldOverflow, i, "status word uses bit 31");
        const bool want_sof = i == 0;
        const bool want_eof = i + 1 == n;
        if (d.has(kStartOfRing) != want_sof || d.has(kEndOfRing) != want_eof)
            add(ViolationKind::FlagMismatch, i, "start/end-of-ring flags do not match position");
    }

    std::vector<bool> seen(n, false);
    Addr cur = ring.bd_base_addr;
    std::size_t visited = 0;
    std::string why;
    for (; visited < n; ++visited) {
        if (cur < ring.bd_base_addr || (cur - ring.bd_base_addr) % kDescriptorBytes != 0 ||
            (cur - ring.bd_base_addr) / kDescriptorBytes >= n) {
            why = "next pointer of the descriptor visited at step " + std::to_string(visited) +
                  " leaves the ring";
            break;
        }
        const auto idx = static_cast<std::size_t>((cur - ring.bd_base_addr) / kDescriptorBytes);
        if (seen[idx]) {
            why = "chain revisits descriptor " + std::to_string(idx) + " after " + std::to_string(visited) + " steps";
            break;
        }
        seen[idx] = true;
        cur = ring.descriptors[idx].next_bd_addr;
    }
    if (why.empty() && cur != ring.bd_base_addr) why = "tail next pointer does not return to head";
    if (!why.empty()) add(ViolationKind::RingNotClosed, visited, why);
    return report;
}

std::vector<std::uint8_t> serialize_ring(const BdRing& ring, const MemoryMap& map) {
    const auto report = validate_ring(ring, map);
    if (!report.ok())
        throw Error(ErrorCode::InvalidRing, "cannot serialize ring: " + std::string(to_string(report.violations[0].kind)));
    std::vector<std::uint8_t> image(ring.size() * kDescriptorBytes, 0);
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const auto& d = ring.descriptors[i];
        std::uint8_t* p = image.data() + i * kDescriptorBytes;
        std::uint32_t ctrl = d.length & kLengthMask;
        if (d.has(kEndOfRing)) ctrl |= kCtrlEndOfRing;
        if (d.has(kStartOfRing)) ctrl |= kCtrlStartOfRing;
        std::uint32_t status = d.status_word;
        if (d.has(kComplete)) status |= kStatusComplete;
        put_le<std::uint64_t>(p + 0, d.next_bd_addr);
        put_le<std::uint64_t>(p + 8, d.base_addr);
        put_le<std::uint32_t>(p + 16, ctrl);
        put_le<std::uint32_t>(p + 20, status);
    }
    return image;
}

BdRing deserialize_ring(std::span<const std::uint8_t> image, Addr bd_base_addr) {
    if (image.empty() || image.size() % kDescriptorBytes != 0)
        throw Error(ErrorCode::InvalidRing, "ring image size is not a positive multiple of 64 bytes");
    BdRing ring;
    ring.bd_base_addr = bd_base_addr;
    ring.descriptors.resize(image.size() / kDescriptorBytes);
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const std::uint8_t* p = image.data() + i * kDescriptorBytes;
        for (std::size_t b = 24; b < kDescriptorBytes; ++b)
            if (p[b] != 0) throw Error(ErrorCode::InvalidRing, "reserved bytes of descriptor " + std::to_string(i) + " are not zero");
        auto& d = ring.descriptors[i];
        d.next_bd_addr = get_le<std::uint64_t>(p + 0);
        d.base_addr = get_le<std::uint64_t>(p + 8);
        const auto ctrl = get_le<std::uint32_t>(p + 16);
        const auto status = get_le<std::uint32_t>(p + 20);
        if (ctrl & ~(kLengthMask | kCtrlEndOfRing | kCtrlStartOfRing))
            throw Error(ErrorCode::InvalidRing, "reserved control bits set in descriptor " + std::to_string(i));
        d.length = ctrl & kLengthMask;
        if (ctrl & kCtrlEndOfRing) d.flags |= kEndOfRing;
        if (ctrl & kCtrlStartOfRing) d.flags |= kStartOfRing;
        if (status & kStatusComplete) d.flags |= kComplete;
        d.status_word = status & ~kStatusComplete;
    }
    return ring;
}

void write_ring_image(const std::filesystem::path& path, std::span<const std::uint8_t> image) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::vector<std::uint8_t> read_ring_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace sgdma
