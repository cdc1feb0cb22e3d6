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

// Static SVG charts of sweep and ring-creation results.

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sgdma/harness.hpp"

namespace sgdma {

/// Log-spaced histogram bin.
struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t count = 0;
};

struct Histogram {
    std::string label;
    std::vector<HistogramBin> bins;
};

/// `per_decade` bins per factor of ten, covering [lo, hi). Samples outside
/// the range land in the first or last bin.
Histogram make_log_histogram(std::string label, std::span<const double> samples, double lo, double hi,
                             int per_decade = 10);

void write_histogram_csv(std::ostream& out, std::span<const Histogram> hists);
std::vector<Histogram> read_histogram_csv(std::istream& in);

/// Median throughput against payload size, one line per ring size.
void plot_throughput_vs_bytes(std::ostream& out, const SweepResult& r);
/// Latency median with the min..max band against ring size, one series
/// per payload size.
void plot_latency_band(std::ostream& out, const SweepResult& r);
/// Per-BD ring-creation time histograms.
void plot_histograms(std::ostream& out, std::span<const Histogram> hists);

}  // namespace sgdma
