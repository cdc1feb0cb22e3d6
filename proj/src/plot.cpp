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

#include "sgdma/plot.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace sgdma {

Histogram make_log_histogram(std::string label, std::span<const double> samples, double lo, double hi,
                             int per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) throw Error(ErrorCode::BadArgs, "bad histogram range");
    Histogram h{std::move(label), {}};
    const int n = static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade));
    for (int i = 0; i < n; ++i)
        h.bins.push_back({lo * std::pow(10.0, double(i) / per_decade), lo * std::pow(10.0, double(i + 1) / per_decade), 0});
    for (double s : samples) {
        int i = s <= lo ? 0 : static_cast<int>(std::floor(std::log10(s / lo) * per_decade));
        ++h.bins[std::clamp(i, 0, n - 1)].count;
    }
    return h;
}

void write_histogram_csv(std::ostream& out, std::span<const Histogram> hists) {
    out << "label,bin_lo_ns,bin_hi_ns,count\n";
    for (const auto& h : hists)
        for (const auto& b : h.bins) out << fmt::format("{},{:.3f},{:.3f},{}\n", h.label, b.lo, b.hi, b.count);
}

std::vector<Histogram> read_histogram_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("label,", 0) != 0)
        throw Error(ErrorCode::IoError, "not a histogram CSV (bad header)");
    std::vector<Histogram> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string label, lo, hi, count;
        if (!std::getline(ss, label, ',') || !std::getline(ss, lo, ',') || !std::getline(ss, hi, ',') ||
            !std::getline(ss, count))
            throw Error(ErrorCode::IoError, "histogram CSV: short line");
        if (out.empty() || out.back().label != label) out.push_back({label, {}});
        try {
            out.back().bins.push_back({std::stod(lo), std::stod(hi), std::stoull(count)});
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::IoError, "histogram CSV: malformed number");
        }
    }
    return out;
}

namespace {

enum class Scale { Linear, Log2, Log10 };

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
                                "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a", "#637939"};

std::string color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string fmt_tick(double v) {
    if (v >= 1e6 || (v > 0 && v < 1e-2)) return fmt::format("{:.0e}", v);
    if (v == std::floor(v)) return fmt::format("{:.0f}", v);
    return fmt::format("{:g}", v);
}

class Chart {
public:
    Chart(std::string title, std::string xlabel, std::string ylabel, Scale xs, Scale ys)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)), xs_(xs), ys_(ys) {}

    void range(double x0, double x1, double y0, double y1) {
        x0_ = t(x0, xs_);
        x1_ = t(x1, xs_);
        y0_ = t(y0, ys_);
        y1_ = t(y1, ys_);
        if (x1_ <= x0_) x1_ = x0_ + 1;
        if (y1_ <= y0_) y1_ = y0_ + 1;
    }

    void line(const std::vector<std::pair<double, double>>& pts, const std::string& col, const std::string& label) {
        std::string p;
        for (auto [x, y] : pts) p += fmt::format("{:.1f},{:.1f} ", px(x), py(y));
        body_ += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", col, p);
        for (auto [x, y] : pts)
            body_ += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"2\" fill=\"{}\"/>\n", px(x), py(y), col);
        legend_.emplace_back(label, col);
    }

    void band(const std::vector<std::pair<double, double>>& lo, const std::vector<std::pair<double, double>>& hi,
              const std::string& col) {
        std::string p;
        for (auto [x, y] : lo) p += fmt::format("{:.1f},{:.1f} ", px(x), py(y));
        for (auto it = hi.rbegin(); it != hi.rend(); ++it) p += fmt::format("{:.1f},{:.1f} ", px(it->first), py(it->second));
        body_ += fmt::format("<polygon fill=\"{}\" fill-opacity=\"0.15\" stroke=\"none\" points=\"{}\"/>\n", col, p);
    }

    void bar(double x0, double x1, double y, const std::string& col) {
        const double top = py(y), bottom = py(std::pow(10.0, y0_));
        body_ += fmt::format(
            "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\" fill-opacity=\"0.5\"/>\n",
            px(x0), top, std::max(0.5, px(x1) - px(x0)), std::max(0.0, bottom - top), col);
    }

    void legend(const std::string& label, const std::string& col) { legend_.emplace_back(label, col); }

    void render(std::ostream& out) const {
        out << fmt::format(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
            "font-size=\"11\">\n",
            kW, kH);
        out << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kW, kH);
        out << fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                           kL + plot_w() / 2, title_);
        out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kL,
                           kT, plot_w(), plot_h());
        for (double v : ticks(x0_, x1_, xs_)) {
            const double x = kL + (v - x0_) / (x1_ - x0_) * plot_w();
            out << fmt::format("<line x1=\"{0:.1f}\" y1=\"{1}\" x2=\"{0:.1f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", x, kT,
                               kT + plot_h());
            out << fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x, kT + plot_h() + 15,
                               fmt_tick(inv(v, xs_)));
        }
        for (double v : ticks(y0_, y1_, ys_)) {
            const double y = kT + plot_h() - (v - y0_) / (y1_ - y0_) * plot_h();
            out << fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", kL, y,
                               kL + plot_w(), y);
            out << fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", kL - 5, y + 4,
                               fmt_tick(inv(v, ys_)));
        }
        out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kL + plot_w() / 2, kH - 15,
                           xlabel_);
        out << fmt::format(
            "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
            kT + plot_h() / 2, ylabel_);
        out << body_;
        int ly = kT + 10;
        for (const auto& [label, col] : legend_) {
            out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"3\" fill=\"{}\"/>\n", kL + plot_w() + 12,
                               ly - 4, col);
            out << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kL + plot_w() + 30, ly, label);
            ly += 15;
        }
        out << "</svg>\n";
    }

private:
    static constexpr int kW = 760, kH = 480, kL = 70, kR = 170, kT = 40, kB = 50;
    static int plot_w() { return kW - kL - kR; }
    static int plot_h() { return kH - kT - kB; }

    static double t(double v, Scale s) {
        switch (s) {
            case Scale::Log2: return std::log2(std::max(v, 1e-300));
            case Scale::Log10: return std::log10(std::max(v, 1e-300));
            default: return v;
        }
    }
    static double inv(double v, Scale s) {
        switch (s) {
            case Scale::Log2: return std::exp2(v);
            case Scale::Log10: return std::pow(10.0, v);
            default: return v;
        }
    }
    static std::vector<double> ticks(double a, double b, Scale s) {
        std::vector<double> out;
        if (s == Scale::Linear) {
            const double raw = (b - a) / 6;
            const double mag = std::pow(10.0, std::floor(std::log10(raw)));
            double step = mag;
            for (double m : {1.0, 2.0, 5.0, 10.0})
                if (m * mag >= raw) {
                    step = m * mag;
                    break;
                }
            for (double v = std::ceil(a / step) * step; v <= b + 1e-9; v += step) out.push_back(v);
        } else {
            const int stride = std::max(1, static_cast<int>((b - a) / 12));
            for (double v = std::ceil(a); v <= b + 1e-9; v += stride) out.push_back(v);
        }
        return out;
    }

    double px(double x) const { return kL + (t(x, xs_) - x0_) / (x1_ - x0_) * plot_w(); }
    double py(double y) const { return kT + plot_h() - (t(y, ys_) - y0_) / (y1_ - y0_) * plot_h(); }

    std::string title_, xlabel_, ylabel_;
    Scale xs_, ys_;
    double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
    std::string body_;
    std::vector<std::pair<std::string, std::string>> legend_;
};

// Rows at the smallest cycle count, sequential placement where present.
std::vector<SweepRow> base_rows(const SweepResult& r) {
    if (r.rows.empty()) throw Error(ErrorCode::EmptySamples, "sweep result has no rows");
    std::uint32_t cmin = UINT32_MAX;
    bool has_seq = false;
    for (const auto& row : r.rows) {
        cmin = std::min(cmin, row.point.n_cycles);
        has_seq |= row.point.placement == Placement::Sequential;
    }
    std::vector<SweepRow> out;
    for (const auto& row : r.rows)
        if (row.point.n_cycles == cmin && (!has_seq || row.point.placement == Placement::Sequential))
            out.push_back(row);
    return out;
}

}  // namespace

void plot_throughput_vs_bytes(std::ostream& out, const SweepResult& r) {
    const auto rows = base_rows(r);
    std::map<std::uint32_t, std::vector<std::pair<double, double>>> series;
    double xmin = 1e300, xmax = 0, ymin = 1e300, ymax = 0;
    for (const auto& row : rows) {
        series[row.point.n_bds].emplace_back(row.point.bytes_per_bd, row.throughput_MBps.median);
        xmin = std::min<double>(xmin, row.point.bytes_per_bd);
        xmax = std::max<double>(xmax, row.point.bytes_per_bd);
        ymin = std::min(ymin, row.throughput_MBps.median);
        ymax = std::max(ymax, row.throughput_MBps.median);
    }
    Chart c("Median MM2S throughput", "bytes per BD", "throughput [MB/s]", Scale::Log2, Scale::Log10);
    c.range(xmin, xmax, std::pow(10.0, std::floor(std::log10(ymin))), std::pow(10.0, std::ceil(std::log10(ymax))));
    std::size_t i = 0;
    for (auto& [n, pts] : series) {
        std::sort(pts.begin(), pts.end());
        c.line(pts, color(i++), fmt::format("{} BDs", n));
    }
    c.render(out);
}

void plot_latency_band(std::ostream& out, const SweepResult& r) {
    const auto rows = base_rows(r);
    struct Series {
        std::vector<std::pair<double, double>> med, lo, hi;
    };
    std::map<std::uint32_t, Series> series;
    double xmin = 1e300, xmax = 0, ymin = 1e300, ymax = 0;
    for (const auto& row : rows) {
        auto& s = series[row.point.bytes_per_bd];
        s.med.emplace_back(row.point.n_bds, row.latency_ns.median);
        s.lo.emplace_back(row.point.n_bds, row.latency_ns.min);
        s.hi.emplace_back(row.point.n_bds, row.latency_ns.max);
        xmin = std::min<double>(xmin, row.point.n_bds);
        xmax = std::max<double>(xmax, row.point.n_bds);
        ymin = std::min(ymin, row.latency_ns.min);
        ymax = std::max(ymax, row.latency_ns.max);
    }
    Chart c("MM2S latency", "BDs in ring", "latency [ns]", Scale::Log2, Scale::Linear);
    const double pad = std::max(10.0, (ymax - ymin) * 0.1);
    c.range(xmin, xmax, std::max(0.0, ymin - pad), ymax + pad);
    std::size_t i = 0;
    for (auto& [bytes, s] : series) {
        std::sort(s.med.begin(), s.med.end());
        std::sort(s.lo.begin(), s.lo.end());
        std::sort(s.hi.begin(), s.hi.end());
        c.band(s.lo, s.hi, color(i));
        c.line(s.med, color(i++), fmt::format("{} B/BD", bytes));
    }
    c.render(out);
}

void plot_histograms(std::ostream& out, std::span<const Histogram> hists) {
    double xmin = 1e300, xmax = 0;
    std::uint64_t cmax = 1;
    for (const auto& h : hists)
        for (const auto& b : h.bins) {
            if (b.count == 0) continue;
            xmin = std::min(xmin, b.lo);
            xmax = std::max(xmax, b.hi);
            cmax = std::max(cmax, b.count);
        }
    if (xmax == 0) throw Error(ErrorCode::EmptySamples, "histograms are empty");
    Chart c("Per-BD ring creation time", "time per BD [ns]", "count", Scale::Log10, Scale::Log10);
    c.range(xmin, xmax, 1.0, std::pow(10.0, std::ceil(std::log10(static_cast<double>(cmax)) + 0.01)));
    std::size_t i = 0;
    for (const auto& h : hists) {
        const auto col = color(i++);
        for (const auto& b : h.bins)
            if (b.count > 0) c.bar(b.lo, b.hi, static_cast<double>(b.count), col);
        c.legend(h.label, col);
    }
    c.render(out);
}

}  // namespace sgdma
