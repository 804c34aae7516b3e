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
#include <vector>

#include "rcbev/backbone.hpp"
#include "rcbev/bev.hpp"
#include "rcbev/fusion.hpp"
#include "rcbev/random.hpp"

// Random parameter and input generators for oracle comparisons.
namespace rcbev::gen {

Matrix matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0);
std::vector<double> vec(Rng& rng, std::size_t n, double scale = 1.0);
FeatureMap feature_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w, double scale = 1.0);

/// beta is drawn in [0, 2) per head when `with_beta`, else left empty.
AttentionParams attention(Rng& rng, std::size_t channels, std::size_t heads, bool with_beta);
NormParams norm(Rng& rng, std::size_t channels);
MlpParams mlp(Rng& rng, const std::vector<std::size_t>& dims, const std::vector<bool>& relu);
ConvBnParams conv_bn(Rng& rng, std::size_t in, std::size_t out);

TransformerBlockParams transformer_block(Rng& rng, std::size_t width, std::size_t heads);
InjectionParams injection(Rng& rng, std::size_t width, std::size_t heads);
ExtractionParams extraction(Rng& rng, std::size_t width, std::size_t heads);

/// Every parameter random, including non-zero gammas.
BackboneParams backbone(Rng& rng, const BackboneConfig& config);

/// Offsets reach a few pixels beyond the grid edge.
DeformAttnParams deform(Rng& rng, std::size_t query_channels, std::size_t value_channels, std::size_t heads,
                        std::size_t points);

CamfParams camf_fuse(Rng& rng, std::size_t camera_channels, std::size_t radar_channels,
                     std::size_t fused_channels, std::size_t blocks);

/// N points uniformly inside the ROI of `spec`.
PointFeatureSet points(Rng& rng, std::size_t n, const BevSpec& spec);

std::vector<std::size_t> permutation(Rng& rng, std::size_t n);

}  // namespace rcbev::gen
