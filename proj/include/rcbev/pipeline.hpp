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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcbev/backbone.hpp"
#include "rcbev/bev.hpp"
#include "rcbev/config.hpp"
#include "rcbev/fusion.hpp"
#include "rcbev/radar.hpp"
#include "rcbev/weights.hpp"

namespace rcbev {

struct ChannelStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

struct GridStats {
    std::size_t nonzero_pixels = 0;  // pixels with any non-zero channel
    std::vector<ChannelStats> channels;
};

GridStats grid_stats(const BevGrid& grid);

struct StageReport {
    std::string name;
    double millis = 0.0;
    std::uint64_t checksum = 0;  // FNV-1a of the stage output
};

struct RunReport {
    std::vector<StageReport> stages;
    std::size_t points = 0;
    std::size_t rcs_nonzero_pixels = 0;  // covered pixels of the RCS scatter
    BackboneTrace backbone;
    GridStats fused_stats;

    std::string to_text() const;
};

/// Intermediate products kept when dumping is requested.
struct Intermediates {
    PointFeatureSet features;
    BackboneOutput backbone;
    BevGrid f_rcs;
    BevGrid g_rcs;
    BevGrid f_rcs_prime;
    BevGrid base;
    BevGrid camera_aligned;
    BevGrid radar_aligned;
};

struct FusionOutput {
    BevGrid radar_bev;
    BevGrid camera_bev;
    BevGrid fused;
    std::optional<Intermediates> intermediates;
};

/// Smooth random camera stand-in: per channel a seeded sum of integer-
/// frequency cosine modes, then mean-centred.
BevGrid gen_camera_bev(const BevSpec& spec, std::size_t channels, std::uint64_t seed);

/// Weights from config.weights when set, else init_weights(arch, seed).
WeightSet resolve_weights(const PipelineConfig& config);

/// Radar file (or synthetic scene) to point cloud, ROI-filtered.
PointCloud resolve_point_cloud(const PipelineConfig& config);

/// Radar branch: points -> backbone -> RCS-aware BEV feature. An empty
/// cloud yields an all-zero radar BEV grid.
BevGrid extract_radar_bev(const PointCloud& cloud, const WeightSet& ws, const PipelineConfig& config,
                          RunReport& report, Intermediates* dump = nullptr);

/// CAMF fusion of a camera and a radar BEV grid.
BevGrid fuse_bev(const BevGrid& camera, const BevGrid& radar, const WeightSet& ws, const PipelineConfig& config,
                 RunReport& report, Intermediates* dump = nullptr);

/// Ingest, radar branch, camera source and fusion. Module errors surface as
/// StageError naming the stage.
FusionOutput run_pipeline(const PipelineConfig& config, RunReport& report);
FusionOutput run_pipeline(const PipelineConfig& config, const PointCloud& cloud, const WeightSet& ws,
                          RunReport& report);

}  // namespace rcbev
