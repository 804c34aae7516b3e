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

#include "rcbev/bev.hpp"
#include "rcbev/bev_spec.hpp"
#include "rcbev/params.hpp"
#include "rcbev/tensor.hpp"
#include "rcbev/weights.hpp"

namespace rcbev {

/// Deformable cross-attention with M heads and K sampled keys per head.
///
/// Queries come from one BEV stream and sample the other (the value stream,
/// width C_v). When the query stream width differs from C_v, a 1x1
/// projection brings it to C_v before the offset and weight projections.
struct DeformAttnParams {
    std::size_t heads = 1;   // M
    std::size_t points = 1;  // K

    bool has_query_proj = false;
    Matrix query_proj_w;  // C_v x C_q
    std::vector<double> query_proj_b;

    Matrix offset_w;  // 2MK x C_v, rows ordered (m, k, {dx, dy})
    std::vector<double> offset_b;
    Matrix attn_w;  // MK x C_v, rows ordered (m, k)
    std::vector<double> attn_b;

    Matrix value_w;   // C_v x C_v; rows [m*d, (m+1)*d) form W'_m
    Matrix output_w;  // C_v x C_v; columns [m*d, (m+1)*d) form W_m

    std::size_t value_channels() const noexcept { return value_w.rows(); }
    std::size_t head_dim() const noexcept { return value_w.rows() / heads; }
    void validate(std::size_t query_channels) const;

    /// Parameters that reproduce the value map at each reference point:
    /// zero offsets, uniform weights, identity W'_m and W_m.
    static DeformAttnParams identity(std::size_t channels, std::size_t heads, std::size_t points);
};

/// Per-query sampling plan: offsets in pixels and softmaxed weights.
struct DeformSampling {
    Matrix offsets;  // HW x 2MK
    Matrix weights;  // HW x MK, each (query, head) block of K sums to one
};

DeformSampling deform_sampling(const FeatureMap& queries, const DeformAttnParams& p);

/// One query per pixel of `queries`; `values` must share H and W. Reference
/// points default to each query pixel's own integer coordinate (x = column,
/// y = row); a non-empty `ref_points` must hold H*W row-major entries.
FeatureMap deform_attn(const FeatureMap& queries, const FeatureMap& values, const DeformAttnParams& p,
                       std::span<const PixelCoord> ref_points = {});

struct CamfConfig {
    std::size_t camera_channels = 64;  // C_c
    std::size_t radar_channels = 64;   // C_r
    std::size_t heads = 4;             // M
    std::size_t points = 4;            // K
    std::size_t fused_channels = 128;  // C_f
    std::size_t fuse_blocks = 3;       // CBR blocks after the residual one
    std::size_t height = 128;
    std::size_t width = 128;

    void validate() const;
};

struct CamfParams {
    FeatureMap pos_camera;  // C_c x H x W
    FeatureMap pos_radar;   // C_r x H x W
    DeformAttnParams to_camera;  // radar queries sample camera features
    DeformAttnParams to_radar;   // camera queries sample radar features
    ConvBnParams fuse_in;        // residual CBR on the concatenation
    bool has_projection = false;
    Matrix proj_w;  // C_f x (C_c + C_r)
    std::vector<double> proj_b;
    std::vector<ConvBnParams> fuse_blocks;

    static CamfParams from_weights(const WeightSet& ws, const CamfConfig& config);
};

void add_camf_weights(WeightBuilder& b, const CamfConfig& config);

BevGrid add_pos_embed(const BevGrid& f, const FeatureMap& embedding);

/// Simultaneous residual alignment; both updates read the embedded inputs:
///   F_c' = (F_c + E_c) + DeformAttn(F_r + E_r -> F_c + E_c)
///   F_r' = (F_r + E_r) + DeformAttn(F_c + E_c -> F_r + E_r)
std::pair<BevGrid, BevGrid> cross_align(const BevGrid& camera, const BevGrid& radar, const CamfParams& p);

/// relu(bn(conv3x3(x))).
FeatureMap cbr_block(const FeatureMap& x, const ConvBnParams& p);

/// y0 = cbr(F_multi) + proj(F_multi); output = cbr_n(...cbr_1(y0)).
BevGrid channel_spatial_fuse(const BevGrid& camera, const BevGrid& radar, const CamfParams& p);

/// cross_align followed by channel_spatial_fuse.
BevGrid camf_forward(const BevGrid& camera, const BevGrid& radar, const CamfParams& p);

}  // namespace rcbev
