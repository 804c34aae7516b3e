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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rcbev/bev_spec.hpp"
#include "rcbev/layers.hpp"
#include "rcbev/params.hpp"
#include "rcbev/tensor.hpp"
#include "rcbev/weights.hpp"

namespace rcbev {

/// C x H x W feature array tied to its metric extent.
struct BevGrid {
    FeatureMap data;
    BevSpec spec;

    BevGrid() = default;
    BevGrid(std::size_t channels, const BevSpec& s) : data(channels, s.height, s.width), spec(s) {}
    BevGrid(FeatureMap f, const BevSpec& s) : data(std::move(f)), spec(s) {}

    std::size_t channels() const noexcept { return data.channels(); }
    /// Throws ShapeError if dims disagree with the spec, DataError on
    /// non-finite entries.
    void validate() const;

    friend bool operator==(const BevGrid&, const BevGrid&) = default;
};

struct ScatterConfig {
    double radius_scale = 0.02;  // multiplies (u^2 + v^2) * v_rcs
    double radius_cap = 5.0;     // pixels

    void validate() const;
};

/// Continuous and integer pixel coordinates of a metric point inside the ROI.
std::pair<PixelCoord, PixelIndex> to_pixel(double x, double y, const BevSpec& spec);

/// min(radius_scale * (u^2 + v^2) * v_rcs, radius_cap), in pixels.
double scatter_radius(PixelCoord c, double v_rcs, const ScatterConfig& cfg);

/// Whether a pixel at integer offset (dx, dy) from a point's own pixel is
/// covered: the own pixel always is, others when their distance is strictly
/// below the radius.
inline bool covers(long dx, long dy, double radius) {
    if (dx == 0 && dy == 0) return true;
    const double d2 = static_cast<double>(dx * dx + dy * dy);
    return d2 < radius * radius;
}

struct ScatterPoint {
    PixelCoord coord;
    PixelIndex pixel;
    double v_rcs = 0.0;
    double radius = 0.0;
};

/// Pixel geometry of each point, in input order. coords is N x 2 metric.
std::vector<ScatterPoint> scatter_geometry(const Matrix& coords, std::span<const double> rcs_norm,
                                           const BevSpec& spec, const ScatterConfig& cfg);

/// Summation-pooled scatter of per-point feature rows into every covered
/// pixel. Accumulation follows row order.
BevGrid rcs_scatter(const Matrix& features, const Matrix& coords, std::span<const double> rcs_norm,
                    const BevSpec& spec, const ScatterConfig& cfg);

/// Denominator of the per-point Gaussian, (1/3) (u^2 + v^2) v_rcs.
double gaussian_bandwidth(PixelCoord c, double v_rcs);

/// Pixel-wise max over per-point Gaussian weight maps (1 x H x W). Each
/// point's Gaussian is centred on its own pixel and truncated to its scatter
/// radius. A bandwidth below 1e-9 puts 1 on the own pixel only.
BevGrid gaussian_bev_map(std::span<const ScatterPoint> points, const BevSpec& spec);

/// Pixel-wise MLP over concat(f_rcs, g_rcs).
BevGrid rcs_bev_feature(const BevGrid& f_rcs, const BevGrid& g_rcs, const MlpParams& mlp);

struct BevEncoderConfig {
    std::size_t point_channels = 64;  // width of scattered point features
    std::size_t rcs_channels = 64;    // width of the RCS-aware feature
    std::size_t out_channels = 64;    // C_r
    std::size_t blocks = 2;

    std::size_t concat_channels() const noexcept { return rcs_channels + point_channels; }
    void validate() const;
};

struct ConvBnParams {
    ConvParams conv;
    BatchNormParams bn;
};

struct BevEncoderParams {
    MlpParams rcs_mlp;
    bool has_projection = false;
    Matrix proj_w;  // out x concat, 1x1
    std::vector<double> proj_b;
    std::vector<ConvBnParams> blocks;

    static BevEncoderParams from_weights(const WeightSet& ws, const BevEncoderConfig& config);
};

void add_bev_encoder_weights(WeightBuilder& b, const BevEncoderConfig& config);

/// relu(bn(conv3x3(x))).
FeatureMap conv_bn_relu(const FeatureMap& x, const ConvBnParams& p);

/// Concat(f_rcs_prime, base) followed by residual conv-bn-relu blocks
/// (x + cbr(x)); a 1x1 projection to the block width precedes the blocks
/// when the widths differ. With no blocks the concatenation is returned.
BevGrid bev_encode(const BevGrid& f_rcs_prime, const BevGrid& base, const BevEncoderParams& p);

}  // namespace rcbev
