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

#include "rcbev/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "rcbev/errors.hpp"
#include "rcbev/grid_io.hpp"

namespace rcbev {
namespace {

using Clock = std::chrono::steady_clock;

// Runs `fn` under a stage name, recording wall time and rethrowing module
// errors as StageError.
template <typename Fn>
auto timed_stage(RunReport& report, const std::string& name, Fn&& fn) {
    const auto start = Clock::now();
    try {
        auto result = fn();
        const auto ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        report.stages.push_back({name, ms, 0});
        return result;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::uint64_t matrix_checksum(const Matrix& m) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(m.data().size() * 8);
    for (double v : m.data()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    return fnv1a64(bytes);
}

std::size_t nonzero_pixels(const BevGrid& grid) {
    const auto& f = grid.data;
    std::size_t count = 0;
    for (std::size_t p = 0; p < f.plane_size(); ++p) {
        for (std::size_t c = 0; c < f.channels(); ++c) {
            if (f.data()[c * f.plane_size() + p] != 0.0) {
                ++count;
                break;
            }
        }
    }
    return count;
}

// Covered-pixel count of the scatter (independent of feature values).
std::size_t covered_pixels(std::span<const ScatterPoint> geometry, const BevSpec& spec) {
    std::vector<char> hit(spec.height * spec.width, 0);
    const auto H = static_cast<long>(spec.height), W = static_cast<long>(spec.width);
    for (const auto& g : geometry) {
        const long r = static_cast<long>(std::min(std::ceil(g.radius), static_cast<double>(std::max(H, W))));
        for (long dy = -r; dy <= r; ++dy)
            for (long dx = -r; dx <= r; ++dx) {
                const long x = static_cast<long>(g.pixel.px) + dx, y = static_cast<long>(g.pixel.py) + dy;
                if (x >= 0 && x < W && y >= 0 && y < H && covers(dx, dy, g.radius))
                    hit[static_cast<std::size_t>(y * W + x)] = 1;
            }
    }
    return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
}

}  // namespace

GridStats grid_stats(const BevGrid& grid) {
    GridStats s;
    s.nonzero_pixels = nonzero_pixels(grid);
    for (std::size_t c = 0; c < grid.channels(); ++c) {
        auto plane = grid.data.plane(c);
        ChannelStats cs;
        if (!plane.empty()) {
            cs.min = *std::min_element(plane.begin(), plane.end());
            cs.max = *std::max_element(plane.begin(), plane.end());
            double sum = 0.0;
            for (double v : plane) sum += v;
            cs.mean = sum / static_cast<double>(plane.size());
        }
        s.channels.push_back(cs);
    }
    return s;
}

std::string RunReport::to_text() const {
    std::ostringstream o;
    char buf[160];
    o << "points: " << points << "\n";
    o << "backbone: stages=" << backbone.stages_run << " inject=" << backbone.inject_calls
      << " extract=" << backbone.extract_calls << "\n";
    o << "rcs scatter nonzero pixels: " << rcs_nonzero_pixels << "\n";
    o << "stage                     ms          checksum\n";
    for (const auto& s : stages) {
        std::snprintf(buf, sizeof buf, "%-20s %10.3f  %016llx\n", s.name.c_str(), s.millis,
                      static_cast<unsigned long long>(s.checksum));
        o << buf;
    }
    if (!fused_stats.channels.empty()) {
        o << "fused grid: nonzero pixels=" << fused_stats.nonzero_pixels << "\n";
        o << "channel        min          max         mean\n";
        for (std::size_t c = 0; c < fused_stats.channels.size(); ++c) {
            const auto& cs = fused_stats.channels[c];
            std::snprintf(buf, sizeof buf, "%7zu %12.5g %12.5g %12.5g\n", c, cs.min, cs.max, cs.mean);
            o << buf;
        }
    }
    return o.str();
}

WeightSet resolve_weights(const PipelineConfig& config) {
    try {
        if (!config.weights.empty()) return WeightSet::load(config.weights);
        return init_weights(config.arch, config.seed);
    } catch (const std::exception& e) {
        throw StageError("weights", e.what());
    }
}

PointCloud resolve_point_cloud(const PipelineConfig& config) {
    try {
        PointCloud cloud;
        if (config.input.empty())
            cloud = synth_scene(config.scene, config.seed).cloud;
        else if (config.input.extension() == ".bin")
            cloud = load_point_cloud_binary(config.input);
        else
            cloud = load_point_cloud(config.input);
        return filter_roi(cloud, config.bev);
    } catch (const std::exception& e) {
        throw StageError("ingest", e.what());
    }
}

BevGrid extract_radar_bev(const PointCloud& cloud, const WeightSet& ws, const PipelineConfig& config,
                          RunReport& report, Intermediates* dump) {
    const BevSpec& spec = config.bev;
    const PointCloud roi = filter_roi(cloud, spec);
    report.points = roi.size();
    const auto feats = timed_stage(report, "features", [&] { return assemble_features(roi, spec, config.rcs); });
    if (dump) dump->features = feats;

    const auto encoder = timed_stage(report, "load-params",
                                     [&] { return BevEncoderParams::from_weights(ws, config.arch.encoder); });
    const std::size_t c_r = config.arch.radar_bev_channels();

    if (feats.size() == 0) {
        BevGrid zero(c_r, spec);
        report.stages.push_back({"radar-bev", 0.0, grid_checksum(zero)});
        if (dump) {
            dump->f_rcs = BevGrid(config.arch.backbone.out_channels, spec);
            dump->g_rcs = BevGrid(1, spec);
            dump->f_rcs_prime = BevGrid(config.arch.encoder.rcs_channels, spec);
            dump->base = BevGrid(config.arch.backbone.out_channels, spec);
        }
        return zero;
    }

    BackboneTrace trace;
    const auto backbone = timed_stage(report, "backbone", [&] {
        return dual_backbone_forward(feats, BackboneParams::from_weights(ws, config.arch.backbone), &trace);
    });
    report.stages.back().checksum = matrix_checksum(backbone.fused);
    report.backbone = trace;

    const auto geometry =
        timed_stage(report, "scatter-geometry", [&] { return scatter_geometry(feats.coords, feats.rcs_norm, spec, config.scatter); });
    report.rcs_nonzero_pixels = covered_pixels(geometry, spec);

    auto f_rcs = timed_stage(report, "rcs-scatter", [&] {
        return rcs_scatter(backbone.fused, feats.coords, feats.rcs_norm, spec, config.scatter);
    });
    report.stages.back().checksum = grid_checksum(f_rcs);
    auto g_rcs = timed_stage(report, "gaussian-map", [&] { return gaussian_bev_map(geometry, spec); });
    report.stages.back().checksum = grid_checksum(g_rcs);
    auto f_prime = timed_stage(report, "rcs-feature", [&] { return rcs_bev_feature(f_rcs, g_rcs, encoder.rcs_mlp); });
    report.stages.back().checksum = grid_checksum(f_prime);
    auto base = timed_stage(report, "base-scatter", [&] {
        ScatterConfig single = config.scatter;
        single.radius_cap = 0.0;
        return rcs_scatter(backbone.fused, feats.coords, feats.rcs_norm, spec, single);
    });
    report.stages.back().checksum = grid_checksum(base);
    auto radar = timed_stage(report, "bev-encoder", [&] { return bev_encode(f_prime, base, encoder); });
    report.stages.back().checksum = grid_checksum(radar);

    if (dump) {
        dump->backbone = backbone;
        dump->f_rcs = std::move(f_rcs);
        dump->g_rcs = std::move(g_rcs);
        dump->f_rcs_prime = std::move(f_prime);
        dump->base = std::move(base);
    }
    return radar;
}

BevGrid fuse_bev(const BevGrid& camera, const BevGrid& radar, const WeightSet& ws, const PipelineConfig& config,
                 RunReport& report, Intermediates* dump) {
    const auto params = timed_stage(report, "load-fusion", [&] { return CamfParams::from_weights(ws, config.arch.camf); });
    auto aligned = timed_stage(report, "cross-align", [&] { return cross_align(camera, radar, params); });
    auto fused = timed_stage(report, "channel-spatial-fuse",
                             [&] { return channel_spatial_fuse(aligned.first, aligned.second, params); });
    report.stages.back().checksum = grid_checksum(fused);
    report.fused_stats = grid_stats(fused);
    if (dump) {
        dump->camera_aligned = std::move(aligned.first);
        dump->radar_aligned = std::move(aligned.second);
    }
    return fused;
}

FusionOutput run_pipeline(const PipelineConfig& config, const PointCloud& cloud, const WeightSet& ws,
                          RunReport& report) {
    FusionOutput out;
    Intermediates dump;
    Intermediates* dump_ptr = config.dump_intermediates ? &dump : nullptr;
    out.radar_bev = extract_radar_bev(cloud, ws, config, report, dump_ptr);
    out.camera_bev = timed_stage(report, "camera", [&] {
        if (!config.camera.empty()) return load_grid(config.camera);
        return gen_camera_bev(config.bev, config.arch.camf.camera_channels, config.seed);
    });
    if (out.camera_bev.spec != config.bev)
        throw StageError("camera", "camera BEV grid extent differs from the configured BEV spec");
    out.fused = fuse_bev(out.camera_bev, out.radar_bev, ws, config, report, dump_ptr);
    if (dump_ptr) out.intermediates = std::move(dump);
    return out;
}

FusionOutput run_pipeline(const PipelineConfig& config, RunReport& report) {
    config.validate();
    const WeightSet ws = resolve_weights(config);
    const PointCloud cloud = resolve_point_cloud(config);
    return run_pipeline(config, cloud, ws, report);
}

}  // namespace rcbev
