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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sgdma {

/// Simulation time in picoseconds.
using Tick = std::int64_t;
/// Physical byte address.
using Addr = std::uint64_t;

constexpr Tick kTicksPerNs = 1000;

constexpr Tick ns_to_ticks(double ns) {
    return static_cast<Tick>(ns * static_cast<double>(kTicksPerNs) + (ns >= 0 ? 0.5 : -0.5));
}
constexpr double ticks_to_ns(Tick t) { return static_cast<double>(t) / static_cast<double>(kTicksPerNs); }

enum class ErrorCode {
    BadArgs,
    ConfigInvalid,
    IoError,
    CapacityExceeded,
    ZeroLengthPayload,
    OverlapDetected,
    InvalidRing,
    OutOfAperture,
    IncompleteTrace,
    ScenarioIncomplete,
    EmptySamples,
    CalibrationDiverged,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace sgdma
