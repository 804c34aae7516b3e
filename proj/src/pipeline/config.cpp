/*******************************************************************************
* Copyright 2026 The rcbev Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#include "rcbev/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rcbev/errors.hpp"

namespace rcbev {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

// Shortest text that parses back to the same double.
std::string real(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Every recognised key; anything else in a config file is rejected.
const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "bev.x_min", "bev.x_max", "bev.y_min", "bev.y_max", "bev.resolution",
        "backbone.stages", "backbone.widths", "backbone.heads", "backbone.cross_heads",
        "backbone.ffn_ratio", "backbone.out_channels",
        "scatter.radius_scale", "scatter.radius_cap",
        "rcs.lo", "rcs.hi",
        "encoder.rcs_channels", "encoder.channels", "encoder.blocks",
        "camera.channels",
        "fusion.heads", "fusion.points", "fusion.channels", "fusion.blocks",
        "scene.clusters", "scene.points_per_cluster", "scene.sweep_interval", "scene.range_min",
        "scene.range_max", "scene.radial_spread", "scene.azimuth_noise_deg", "scene.rcs_min",
        "scene.rcs_max", "scene.rcs_jitter", "scene.speed_max",
        "sweeps", "seed", "weights", "input", "camera", "output", "dump_intermediates",
    };
    return keys;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_real(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second;
    if (s == "inf") return HUGE_VAL;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError("config key '" + key + "': '" + s + "' is not a finite real");
    return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("config key '" + key + "': '" + s + "' is not a non-negative integer");
    return v;
}

std::size_t KeyValueConfig::get_size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(get_u64(key, fallback));
}

std::vector<std::size_t> KeyValueConfig::get_size_list(const std::string& key,
                                                       const std::vector<std::size_t>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::size_t> out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
            throw ConfigError("config key '" + key + "': '" + item + "' is not a non-negative integer");
        out.push_back(v);
    }
    return out;
}

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig c;
    c.finalize();
    return c;
}

PipelineConfig PipelineConfig::from_text(const std::string& text) {
    const auto kv = KeyValueConfig::parse(text);
    for (const auto& [key, value] : kv.values())
        if (known_keys().count(key) == 0) throw ConfigError("unknown config key '" + key + "'");

    PipelineConfig c;
    c.bev = BevSpec::make(kv.get_real("bev.x_min", c.bev.x_min), kv.get_real("bev.x_max", c.bev.x_max),
                          kv.get_real("bev.y_min", c.bev.y_min), kv.get_real("bev.y_max", c.bev.y_max),
                          kv.get_real("bev.resolution", c.bev.resolution));

    auto& bb = c.arch.backbone;
    bb.widths = kv.get_size_list("backbone.widths", bb.widths);
    if (kv.has("backbone.stages") && kv.get_size("backbone.stages", 0) != bb.widths.size())
        throw ConfigError("backbone.stages disagrees with the number of backbone.widths entries");
    bb.heads = kv.get_size("backbone.heads", bb.heads);
    bb.cross_heads = kv.get_size("backbone.cross_heads", bb.cross_heads);
    bb.ffn_ratio = kv.get_size("backbone.ffn_ratio", bb.ffn_ratio);
    bb.out_channels = kv.get_size("backbone.out_channels", bb.out_channels);

    c.scatter.radius_scale = kv.get_real("scatter.radius_scale", c.scatter.radius_scale);
    c.scatter.radius_cap = kv.get_real("scatter.radius_cap", c.scatter.radius_cap);
    c.rcs.lo = kv.get_real("rcs.lo", c.rcs.lo);
    c.rcs.hi = kv.get_real("rcs.hi", c.rcs.hi);

    auto& enc = c.arch.encoder;
    enc.rcs_channels = kv.get_size("encoder.rcs_channels", enc.rcs_channels);
    enc.out_channels = kv.get_size("encoder.channels", enc.out_channels);
    enc.blocks = kv.get_size("encoder.blocks", enc.blocks);

    auto& camf = c.arch.camf;
    camf.camera_channels = kv.get_size("camera.channels", camf.camera_channels);
    camf.heads = kv.get_size("fusion.heads", camf.heads);
    camf.points = kv.get_size("fusion.points", camf.points);
    camf.fused_channels = kv.get_size("fusion.channels", camf.fused_channels);
    camf.fuse_blocks = kv.get_size("fusion.blocks", camf.fuse_blocks);

    auto& sc = c.scene;
    sc.n_clusters = kv.get_size("scene.clusters", sc.n_clusters);
    sc.points_per_cluster = kv.get_size("scene.points_per_cluster", sc.points_per_cluster);
    sc.sweep_interval = kv.get_real("scene.sweep_interval", sc.sweep_interval);
    sc.range_min = kv.get_real("scene.range_min", sc.range_min);
    sc.range_max = kv.get_real("scene.range_max", sc.range_max);
    sc.radial_spread = kv.get_real("scene.radial_spread", sc.radial_spread);
    sc.azimuth_noise_deg = kv.get_real("scene.azimuth_noise_deg", sc.azimuth_noise_deg);
    sc.rcs_min = kv.get_real("scene.rcs_min", sc.rcs_min);
    sc.rcs_max = kv.get_real("scene.rcs_max", sc.rcs_max);
    sc.rcs_jitter = kv.get_real("scene.rcs_jitter", sc.rcs_jitter);
    sc.speed_max = kv.get_real("scene.speed_max", sc.speed_max);

    c.sweeps = kv.get_size("sweeps", c.sweeps);
    c.seed = kv.get_u64("seed", c.seed);
    c.weights = kv.get_string("weights", "");
    c.input = kv.get_string("input", "");
    c.camera = kv.get_string("camera", "");
    c.output = kv.get_string("output", "");
    const auto dump = kv.get_string("dump_intermediates", "false");
    c.dump_intermediates = dump == "true" || dump == "1";
    c.finalize();
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

void PipelineConfig::finalize() {
    scene.n_sweeps = sweeps;
    arch.encoder.point_channels = arch.backbone.out_channels;
    arch.camf.radar_channels = arch.radar_bev_channels();
    arch.camf.height = bev.height;
    arch.camf.width = bev.width;
    validate();
}

void PipelineConfig::validate() const {
    bev.validate();
    arch.validate();
    scatter.validate();
    if (!(rcs.lo < rcs.hi)) throw ConfigError("rcs.lo must be below rcs.hi");
    if (sweeps == 0) throw ConfigError("sweeps must be >= 1");
    if (arch.camf.height != bev.height || arch.camf.width != bev.width)
        throw ConfigError("fusion grid size disagrees with the BEV spec");
}

std::string PipelineConfig::to_text() const {
    std::ostringstream o;
    o << "# BEV grid: half-open metric extent, square pixels\n"
      << "bev.x_min = " << real(bev.x_min) << "\n"
      << "bev.x_max = " << real(bev.x_max) << "\n"
      << "bev.y_min = " << real(bev.y_min) << "\n"
      << "bev.y_max = " << real(bev.y_max) << "\n"
      << "bev.resolution = " << real(bev.resolution) << "   # m/pixel (default 0.8)\n"
      << "\n# dual-stream backbone; one width per stage (default 32,64,64)\n"
      << "backbone.stages = " << arch.backbone.stages() << "\n"
      << "backbone.widths = " << join(arch.backbone.widths) << "\n"
      << "backbone.heads = " << arch.backbone.heads << "   # DMSA heads (default 4)\n"
      << "backbone.cross_heads = " << arch.backbone.cross_heads << "   # injection/extraction heads (default 1)\n"
      << "backbone.ffn_ratio = " << arch.backbone.ffn_ratio << "\n"
      << "backbone.out_channels = " << arch.backbone.out_channels << "   # merged point feature width (default 64)\n"
      << "\n# RCS-aware scattering\n"
      << "scatter.radius_scale = " << real(scatter.radius_scale) << "   # default 0.02\n"
      << "scatter.radius_cap = " << real(scatter.radius_cap) << "   # pixels (default 5)\n"
      << "rcs.lo = " << real(rcs.lo) << "   # dBsm mapped to 0 (default -20)\n"
      << "rcs.hi = " << real(rcs.hi) << "   # dBsm mapped to 1 (default 30)\n"
      << "\n# BEV encoder\n"
      << "encoder.rcs_channels = " << arch.encoder.rcs_channels << "\n"
      << "encoder.channels = " << arch.encoder.out_channels << "   # radar BEV width (default 64)\n"
      << "encoder.blocks = " << arch.encoder.blocks << "   # residual conv blocks (default 2)\n"
      << "\n# fusion\n"
      << "camera.channels = " << arch.camf.camera_channels << "   # default 64\n"
      << "fusion.heads = " << arch.camf.heads << "   # deformable heads M (default 4)\n"
      << "fusion.points = " << arch.camf.points << "   # sampled keys K (default 4)\n"
      << "fusion.channels = " << arch.camf.fused_channels << "   # fused width (default 128)\n"
      << "fusion.blocks = " << arch.camf.fuse_blocks << "   # trailing CBR blocks (default 3)\n"
      << "\n# synthetic scene\n"
      << "scene.clusters = " << scene.n_clusters << "\n"
      << "scene.points_per_cluster = " << scene.points_per_cluster << "\n"
      << "scene.sweep_interval = " << real(scene.sweep_interval) << "\n"
      << "scene.range_min = " << real(scene.range_min) << "\n"
      << "scene.range_max = " << real(scene.range_max) << "\n"
      << "scene.radial_spread = " << real(scene.radial_spread) << "\n"
      << "scene.azimuth_noise_deg = " << real(scene.azimuth_noise_deg) << "\n"
      << "scene.rcs_min = " << real(scene.rcs_min) << "\n"
      << "scene.rcs_max = " << real(scene.rcs_max) << "\n"
      << "scene.rcs_jitter = " << real(scene.rcs_jitter) << "\n"
      << "scene.speed_max = " << real(scene.speed_max) << "\n"
      << "\nsweeps = " << sweeps << "   # default 6\n"
      << "seed = " << seed << "\n";
    if (!weights.empty()) o << "weights = " << weights.string() << "\n";
    if (!input.empty()) o << "input = " << input.string() << "\n";
    if (!camera.empty()) o << "camera = " << camera.string() << "\n";
    if (!output.empty()) o << "output = " << output.string() << "\n";
    o << "dump_intermediates = " << (dump_intermediates ? "true" : "false") << "\n";
    return o.str();
}

}  // namespace rcbev
