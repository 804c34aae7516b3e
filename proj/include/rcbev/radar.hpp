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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcbev/bev_spec.hpp"
#include "rcbev/tensor.hpp"

namespace rcbev {

/// One radar return in the ego frame.
struct RadarPoint {
    double x = 0.0;  // m
    double y = 0.0;  // m
    double z = 0.0;  // m
    double rcs_dbsm = 0.0;
    double vx = 0.0;  // m/s, ego-motion compensated
    double vy = 0.0;
    double sweep_offset = 0.0;  // s relative to the key frame, <= 0

    friend bool operator==(const RadarPoint&, const RadarPoint&) = default;
};

/// Throws DataError if a field is non-finite or sweep_offset > 0.
void validate_point(const RadarPoint& p);

struct PointCloud {
    std::vector<RadarPoint> points;
    std::string frame_id;
    bool compensated = true;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }

    /// Sorts by (sweep_offset, x, y, z) with the remaining fields as
    /// tie-breakers, making downstream accumulation order deterministic.
    void canonicalize();

    friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Rigid 2D transform from a past sweep's frame into the key frame.
struct SweepTransform {
    double angle = 0.0;  // radians, (-pi, pi]
    double tx = 0.0;
    double ty = 0.0;

    void validate() const;
};

struct RcsBounds {
    double lo = -20.0;  // dBsm
    double hi = 30.0;
};

/// Per-point network input plus the geometry kept for scattering.
struct PointFeatureSet {
    static constexpr std::size_t kChannels = 7;

    Matrix features;  // N x 7: x_norm, y_norm, z, rcs_norm, vx, vy, sweep_offset
    Matrix coords;    // N x 2 metric (x, y)
    std::vector<double> rcs_norm;

    std::size_t size() const noexcept { return features.rows(); }
    void validate() const;
};

// Radar CSV: optional "# frame=<id> compensated=<bool>" line, then the header
// x,y,z,rcs,vx,vy,sweep_offset (any column order) and one point per row.
PointCloud parse_point_cloud_csv(std::istream& in);
PointCloud load_point_cloud(const std::filesystem::path& path);
void write_point_cloud_csv(std::ostream& out, const PointCloud& cloud);
void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

// Binary twin: u32 little-endian count, then 7 little-endian f32 per point in
// CSV column order (28 bytes per point).
PointCloud load_point_cloud_binary(const std::filesystem::path& path);
void save_point_cloud_binary(const std::filesystem::path& path, const PointCloud& cloud);

PointCloud accumulate_sweeps(std::span<const std::pair<PointCloud, SweepTransform>> sweeps);
PointCloud filter_roi(const PointCloud& cloud, const BevSpec& spec);

/// Maps dBsm to [0, 1] over the given window. Throws ConfigError if lo >= hi.
double normalize_rcs(double rcs_dbsm, RcsBounds bounds = {});

/// Throws ContractError for points outside the ROI.
PointFeatureSet assemble_features(const PointCloud& cloud, const BevSpec& spec, RcsBounds bounds = {});

struct SceneConfig {
    std::size_t n_clusters = 3;
    std::size_t points_per_cluster = 24;
    std::size_t n_sweeps = 6;
    double sweep_interval = 0.05;  // s between sweeps
    double range_min = 8.0;        // m
    double range_max = 45.0;
    double radial_spread = 1.5;  // m, half-width of per-point range jitter
    double azimuth_noise_deg = 0.0;
    double rcs_min = -10.0;  // dBsm, per-cluster level drawn in [min, max]
    double rcs_max = 25.0;
    double rcs_jitter = 2.0;  // dBsm, per-point half-width
    double speed_max = 15.0;  // m/s radial
};

struct SynthCluster {
    double bearing_deg = 0.0;
    double range = 0.0;
    double rcs_dbsm = 0.0;
    double radial_speed = 0.0;
};

struct SynthScene {
    PointCloud cloud;
    std::vector<SynthCluster> clusters;
};

SynthScene synth_scene(const SceneConfig& config, std::uint64_t seed);

}  // namespace rcbev
