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

#include "sgdma/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sgdma {

using nlohmann::json;

std::string_view to_string(PlacementSet p) {
    switch (p) {
        case PlacementSet::Sequential: return "sequential";
        case PlacementSet::Random: return "random";
        case PlacementSet::Both: return "both";
    }
    return "?";
}

PlacementSet placement_set_from_string(std::string_view s) {
    if (s == "sequential") return PlacementSet::Sequential;
    if (s == "random") return PlacementSet::Random;
    if (s == "both") return PlacementSet::Both;
    throw Error(ErrorCode::ConfigInvalid, "unknown placement '" + std::string(s) + "'");
}

void SweepSpec::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, "sweep: " + what); };
    if (bytes_per_bd.empty() || n_bds.empty() || n_cycles.empty()) bad("bytes_per_bd, n_bds and n_cycles must be non-empty");
    if (trials_per_point == 0) bad("trials_per_point must be >= 1");
    for (auto b : bytes_per_bd)
        if (b == 0 || b > kMaxDescriptorLength) bad("bytes_per_bd values must be in [1, 2^26-1]");
    for (auto n : n_bds)
        if (n == 0 || n > kMaxRingDescriptors) bad("n_bds values must be in [1, 65536]");
    for (auto c : n_cycles)
        if (c == 0) bad("n_cycles values must be >= 1");
}

std::size_t SweepSpec::point_count() const {
    return bytes_per_bd.size() * n_bds.size() * n_cycles.size() * (placement == PlacementSet::Both ? 2 : 1);
}

SweepSpec paper_grid() {
    SweepSpec s;
    for (int e = 5; e <= 13; ++e) s.bytes_per_bd.push_back(1u << e);
    for (int e = 1; e <= 13; ++e) s.n_bds.push_back(1u << e);
    s.n_cycles = s.n_bds;
    return s;
}

void SystemConfig::validate() const {
    ddr.validate();
    engine.validate();
    sweep.validate();
    psmodel.apu.validate();
    psmodel.rpu.validate();
    psmodel.gpio.validate();
    psmodel.rpmsg.validate();
    if (ring.n_bds == 0 || ring.bytes_per_bd == 0 || ring.n_cycles == 0)
        throw Error(ErrorCode::ConfigInvalid, "ring: n_bds, bytes_per_bd and n_cycles must be >= 1");
    if (psmodel.trials_per_size == 0 || psmodel.histogram_trials == 0 || psmodel.histogram_n_bds == 0)
        throw Error(ErrorCode::ConfigInvalid, "psmodel: trial counts and histogram_n_bds must be >= 1");
    if (calibration.residual_bound <= 0 || calibration.phase_step_ns <= 0)
        throw Error(ErrorCode::ConfigInvalid, "calibration: residual_bound and phase_step_ns must be > 0");
}

namespace {

json cpu_json(const CpuModel& m) {
    json stalls = json::array();
    for (const auto& o : m.stall_model) stalls.push_back({{"probability", o.probability}, {"stall_ns", o.stall_ns}});
    return {{"per_bd_base_ns", m.per_bd_base_ns}, {"fixed_overhead_ns", m.fixed_overhead_ns},
            {"jitter_ns", m.jitter_ns}, {"stall_model", stalls}, {"stall_scope", std::string(to_string(m.stall_scope))},
            {"rng_seed", m.rng_seed}};
}

// Reads keys of one JSON object and rejects anything it did not consume.
class Section {
public:
    Section(const json& parent, const std::string& key, const std::string& path)
        : path_(path.empty() ? key : path + "." + key) {
        if (!parent.contains(key)) return;
        node_ = &parent.at(key);
        if (!node_->is_object()) fail(path_ + " must be an object");
    }
    explicit Section(const json& root) : node_(&root) {
        if (!root.is_object()) fail("config root must be an object");
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!node_ || !node_->contains(key)) return;
        used_.insert(key);
        try {
            out = node_->at(key).get<T>();
        } catch (const json::exception& e) {
            fail(where(key) + ": " + e.what());
        }
    }

    template <typename Enum, typename Parse>
    void get_enum(const std::string& key, Enum& out, Parse parse) {
        std::string s;
        const bool had = node_ && node_->contains(key);
        get(key, s);
        if (had) out = parse(s);
    }

    const json* sub(const std::string& key) {
        used_.insert(key);
        return node_;
    }

    void finish() const {
        if (!node_) return;
        for (auto it = node_->begin(); it != node_->end(); ++it)
            if (!used_.count(it.key())) fail("unknown config key '" + where(it.key()) + "'");
    }

    const std::string& path() const { return path_; }

private:
    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[noreturn]] static void fail(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

    std::string path_;
    const json* node_ = nullptr;
    std::set<std::string> used_;
};

void read_cpu(Section& parent, const json& parent_node, const std::string& key, CpuModel& m) {
    parent.sub(key);
    Section s(parent_node, key, parent.path());
    s.get("per_bd_base_ns", m.per_bd_base_ns);
    s.get("fixed_overhead_ns", m.fixed_overhead_ns);
    s.get("jitter_ns", m.jitter_ns);
    s.get("rng_seed", m.rng_seed);
    s.get_enum("stall_scope", m.stall_scope, stall_scope_from_string);
    json stalls;
    s.get("stall_model", stalls);
    if (!stalls.is_null()) {
        if (!stalls.is_array()) throw Error(ErrorCode::ConfigInvalid, s.path() + ".stall_model must be an array");
        m.stall_model.clear();
        for (const auto& o : stalls) {
            if (!o.is_object() || !o.contains("probability") || !o.contains("stall_ns") || o.size() != 2)
                throw Error(ErrorCode::ConfigInvalid,
                            s.path() + ".stall_model entries need exactly probability and stall_ns");
            try {
                m.stall_model.push_back({o.at("probability").get<double>(), o.at("stall_ns").get<double>()});
            } catch (const json::exception& e) {
                throw Error(ErrorCode::ConfigInvalid, s.path() + ".stall_model: " + e.what());
            }
        }
    }
    s.finish();
}

void read_handshake(Section& parent, const json& parent_node, const std::string& key, HandshakeModel& m) {
    parent.sub(key);
    Section s(parent_node, key, parent.path());
    s.get("per_hop_ns", m.per_hop_ns);
    s.get("flag_bytes", m.flag_bytes);
    s.finish();
}

}  // namespace

json to_json(const SystemConfig& c) {
    json j;
    j["ddr"] = {{"refresh_period_ns", c.ddr.refresh_period_ns},
                {"refresh_stall_ns", c.ddr.refresh_stall_ns},
                {"base_access_ns", c.ddr.base_access_ns},
                {"row_switch_penalty_ns", c.ddr.row_switch_penalty_ns},
                {"controller_clock_mhz", c.ddr.controller_clock_mhz},
                {"bytes_per_clock", c.ddr.bytes_per_clock},
                {"start_backlog_max_ns", c.ddr.start_backlog_max_ns}};
    j["bus"] = {{"data_width_bits", c.engine.bus.data_width_bits}, {"pl_clock_mhz", c.engine.bus.pl_clock_mhz}};
    j["engine"] = {{"pipeline_overlap", c.engine.pipeline_overlap},
                   {"fifo_depth_beats", c.engine.fifo_depth_beats},
                   {"bd_prefetch_depth", c.engine.bd_prefetch_depth},
                   {"per_bd_overhead_cycles", c.engine.per_bd_overhead_cycles},
                   {"start_overhead_cycles", c.engine.start_overhead_cycles}};
    j["ring"] = {{"n_bds", c.ring.n_bds},
                 {"bytes_per_bd", c.ring.bytes_per_bd},
                 {"n_cycles", c.ring.n_cycles},
                 {"placement", std::string(to_string(c.ring.placement))},
                 {"rng_seed", c.ring.rng_seed},
                 {"trial", c.ring.trial}};
    j["csm"] = {{"latency_mode", std::string(to_string(c.csm.latency_mode))}, {"setup_cycles", c.csm.setup_cycles}};
    j["psmodel"] = {{"apu", cpu_json(c.psmodel.apu)},
                    {"rpu", cpu_json(c.psmodel.rpu)},
                    {"gpio", {{"per_hop_ns", c.psmodel.gpio.per_hop_ns}, {"flag_bytes", c.psmodel.gpio.flag_bytes}}},
                    {"rpmsg", {{"per_hop_ns", c.psmodel.rpmsg.per_hop_ns}, {"flag_bytes", c.psmodel.rpmsg.flag_bytes}}},
                    {"trials_per_size", c.psmodel.trials_per_size},
                    {"histogram_n_bds", c.psmodel.histogram_n_bds},
                    {"histogram_trials", c.psmodel.histogram_trials}};
    j["sweep"] = {{"bytes_per_bd", c.sweep.bytes_per_bd},
                  {"n_bds", c.sweep.n_bds},
                  {"n_cycles", c.sweep.n_cycles},
                  {"placement", std::string(to_string(c.sweep.placement))},
                  {"trials_per_point", c.sweep.trials_per_point},
                  {"base_seed", c.sweep.base_seed},
                  {"common_random_numbers", c.sweep.common_random_numbers}};
    j["requirement"] = {{"min_throughput_MBps", c.requirement.min_throughput_MBps},
                        {"min_bytes_per_bd", c.requirement.min_bytes_per_bd}};
    const auto& t = c.calibration.targets;
    j["calibration"] = {{"targets",
                         {{"latency_min_ns", t.latency_min_ns},
                          {"latency_max_ns", t.latency_max_ns},
                          {"worst_throughput_MBps", t.worst_throughput_MBps},
                          {"saturation_bytes_per_bd", t.saturation_bytes_per_bd},
                          {"saturation_ratio", t.saturation_ratio}}},
                        {"residual_bound", c.calibration.residual_bound},
                        {"phase_step_ns", c.calibration.phase_step_ns},
                        {"base_access_ns_max", c.calibration.base_access_ns_max},
                        {"row_switch_penalty_ns_max", c.calibration.row_switch_penalty_ns_max},
                        {"per_bd_overhead_cycles_max", c.calibration.per_bd_overhead_cycles_max},
                        {"start_backlog_max_ns_max", c.calibration.start_backlog_max_ns_max}};
    return j;
}

SystemConfig config_from_json(const json& j) {
    SystemConfig c;
    Section root(j);
    {
        root.sub("ddr");
        Section s(j, "ddr", "");
        s.get("refresh_period_ns", c.ddr.refresh_period_ns);
        s.get("refresh_stall_ns", c.ddr.refresh_stall_ns);
        s.get("base_access_ns", c.ddr.base_access_ns);
        s.get("row_switch_penalty_ns", c.ddr.row_switch_penalty_ns);
        s.get("controller_clock_mhz", c.ddr.controller_clock_mhz);
        s.get("bytes_per_clock", c.ddr.bytes_per_clock);
        s.get("start_backlog_max_ns", c.ddr.start_backlog_max_ns);
        s.finish();
    }
    {
        root.sub("bus");
        Section s(j, "bus", "");
        s.get("data_width_bits", c.engine.bus.data_width_bits);
        s.get("pl_clock_mhz", c.engine.bus.pl_clock_mhz);
        s.finish();
    }
    {
        root.sub("engine");
        Section s(j, "engine", "");
        s.get("pipeline_overlap", c.engine.pipeline_overlap);
        s.get("fifo_depth_beats", c.engine.fifo_depth_beats);
        s.get("bd_prefetch_depth", c.engine.bd_prefetch_depth);
        s.get("per_bd_overhead_cycles", c.engine.per_bd_overhead_cycles);
        s.get("start_overhead_cycles", c.engine.start_overhead_cycles);
        s.finish();
    }
    {
        root.sub("ring");
        Section s(j, "ring", "");
        s.get("n_bds", c.ring.n_bds);
        s.get("bytes_per_bd", c.ring.bytes_per_bd);
        s.get("n_cycles", c.ring.n_cycles);
        s.get_enum("placement", c.ring.placement, placement_from_string);
        s.get("rng_seed", c.ring.rng_seed);
        s.get("trial", c.ring.trial);
        s.finish();
    }
    {
        root.sub("csm");
        Section s(j, "csm", "");
        s.get_enum("latency_mode", c.csm.latency_mode, latency_mode_from_string);
        s.get("setup_cycles", c.csm.setup_cycles);
        s.finish();
    }
    if (j.contains("psmodel")) {
        root.sub("psmodel");
        Section s(j, "psmodel", "");
        const json& node = j.at("psmodel");
        if (node.contains("apu")) read_cpu(s, node, "apu", c.psmodel.apu);
        if (node.contains("rpu")) read_cpu(s, node, "rpu", c.psmodel.rpu);
        if (node.contains("gpio")) read_handshake(s, node, "gpio", c.psmodel.gpio);
        if (node.contains("rpmsg")) read_handshake(s, node, "rpmsg", c.psmodel.rpmsg);
        s.get("trials_per_size", c.psmodel.trials_per_size);
        s.get("histogram_n_bds", c.psmodel.histogram_n_bds);
        s.get("histogram_trials", c.psmodel.histogram_trials);
        s.finish();
    }
    {
        root.sub("sweep");
        Section s(j, "sweep", "");
        s.get("bytes_per_bd", c.sweep.bytes_per_bd);
        s.get("n_bds", c.sweep.n_bds);
        s.get("n_cycles", c.sweep.n_cycles);
        s.get_enum("placement", c.sweep.placement, placement_set_from_string);
        s.get("trials_per_point", c.sweep.trials_per_point);
        s.get("base_seed", c.sweep.base_seed);
        s.get("common_random_numbers", c.sweep.common_random_numbers);
        s.finish();
    }
    {
        root.sub("requirement");
        Section s(j, "requirement", "");
        s.get("min_throughput_MBps", c.requirement.min_throughput_MBps);
        s.get("min_bytes_per_bd", c.requirement.min_bytes_per_bd);
        s.finish();
    }
    if (j.contains("calibration")) {
        root.sub("calibration");
        Section s(j, "calibration", "");
        const json& node = j.at("calibration");
        if (node.contains("targets")) {
            s.sub("targets");
            Section t(node, "targets", "calibration");
            auto& tg = c.calibration.targets;
            t.get("latency_min_ns", tg.latency_min_ns);
            t.get("latency_max_ns", tg.latency_max_ns);
            t.get("worst_throughput_MBps", tg.worst_throughput_MBps);
            t.get("saturation_bytes_per_bd", tg.saturation_bytes_per_bd);
            t.get("saturation_ratio", tg.saturation_ratio);
            t.finish();
        }
        s.get("residual_bound", c.calibration.residual_bound);
        s.get("phase_step_ns", c.calibration.phase_step_ns);
        s.get("base_access_ns_max", c.calibration.base_access_ns_max);
        s.get("row_switch_penalty_ns_max", c.calibration.row_switch_penalty_ns_max);
        s.get("per_bd_overhead_cycles_max", c.calibration.per_bd_overhead_cycles_max);
        s.get("start_backlog_max_ns_max", c.calibration.start_backlog_max_ns_max);
        s.finish();
    }
    root.finish();
    c.validate();
    return c;
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Error(ErrorCode::BadArgs, "override '" + assignment + "' is not of the form key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object() || !node->contains(parts[i]))
            throw Error(ErrorCode::ConfigInvalid, "override key '" + key + "' does not name a config entry");
        node = &(*node)[parts[i]];
    }
    if (parts.empty() || !node->is_object() || !node->contains(parts.back()))
        throw Error(ErrorCode::ConfigInvalid, "override key '" + key + "' does not name a config entry");
    (*node)[parts.back()] = value;
}

SystemConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json j = to_json(SystemConfig{});
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
        json file = json::parse(in, nullptr, false, true);
        if (file.is_discarded()) throw Error(ErrorCode::ConfigInvalid, "config " + path.string() + " is not valid JSON");
        // Validate the file on its own first so unknown keys are reported
        // against the file rather than the merged document.
        config_from_json(file);
        j.merge_patch(file);
    }
    for (const auto& o : overrides) apply_override(j, o);
    return config_from_json(j);
}

}  // namespace sgdma
