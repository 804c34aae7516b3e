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

#include <span>
#include <vector>

#include "rcbev/backbone.hpp"
#include "rcbev/bev.hpp"
#include "rcbev/fusion.hpp"
#include "rcbev/layers.hpp"
#include "rcbev/tensor.hpp"

// Straight-line reference implementations. Each one recomputes its result
// from the definitions with plain loops and shares no kernel code with the
// production path, so agreement between the two is evidence of correctness.
namespace rcbev::oracle {

Matrix linear(const Matrix& x, const Matrix& w, const std::vector<double>& b);
Matrix mlp(const Matrix& x, const MlpParams& p);
Matrix layer_norm(const Matrix& x, const NormParams& p);
std::vector<double> column_max(const Matrix& x);

FeatureMap conv3x3(const FeatureMap& x, const ConvParams& p);
FeatureMap batch_norm(const FeatureMap& x, const BatchNormParams& p);
FeatureMap cbr(const FeatureMap& x, const ConvBnParams& p);
FeatureMap pixel_linear(const FeatureMap& x, const Matrix& w, const std::vector<double>& b);

/// Four-corner bilinear interpolation with zero padding.
std::vector<double> bilinear(const FeatureMap& grid, double x, double y);

Matrix sq_dist(const Matrix& coords);

/// Dense multi-head attention. With a non-empty p.beta the logits of head h
/// are reduced by beta_h * |c_i - c_j|^2 computed from `coords`.
Matrix attention(const Matrix& query, const Matrix& kv, const AttentionParams& p, const Matrix& coords);

/// Vanilla multi-head attention, ignoring any beta in `p`.
Matrix vanilla_attention(const Matrix& query, const Matrix& kv, const AttentionParams& p);

Matrix point_block(const Matrix& f, const MlpParams& p);
Matrix transformer_block(const Matrix& f, const Matrix& coords, const TransformerBlockParams& p);
Matrix inject(const Matrix& f_p, const Matrix& f_t, const InjectionParams& p);
Matrix extract(const Matrix& f_t, const Matrix& f_p, const ExtractionParams& p);
BackboneOutput backbone(const PointFeatureSet& feats, const BackboneParams& p);

/// Pixel-major brute-force scatter: for every pixel, every point in order
/// is tested against the coverage predicate and accumulated.
BevGrid scatter(const Matrix& features, const Matrix& coords, std::span<const double> rcs_norm,
                const BevSpec& spec, const ScatterConfig& cfg);

BevGrid bev_encode(const BevGrid& f_rcs_prime, const BevGrid& base, const BevEncoderParams& p);

/// Direct nested-loop evaluation of the deformable attention sum: sample the
/// raw value grid, then apply W'_m, the weights and W_m per query.
FeatureMap deform_attn(const FeatureMap& queries, const FeatureMap& values, const DeformAttnParams& p);

/// Per-(query, head) sums of the deformable attention weights.
std::vector<double> deform_weight_sums(const FeatureMap& queries, const DeformAttnParams& p);

BevGrid channel_spatial_fuse(const BevGrid& camera, const BevGrid& radar, const CamfParams& p);

/// Dense multi-head cross-attention over every pixel of `values`; O((HW)^2 C).
struct DenseCrossParams {
    std::size_t heads = 1;
    Matrix wq, wk, wv, wo;  // C x C
};
FeatureMap dense_cross_attention(const FeatureMap& queries, const FeatureMap& values, const DenseCrossParams& p);

}  // namespace rcbev::oracle
