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

#include "rcbev/bev.hpp"
#include "rcbev/errors.hpp"

namespace rcbev {

void BevEncoderConfig::validate() const {
    if (point_channels == 0 || rcs_channels == 0 || out_channels == 0)
        throw ConfigError("BEV encoder channel counts must be positive");
}

void add_bev_encoder_weights(WeightBuilder& b, const BevEncoderConfig& config) {
    config.validate();
    b.mlp("bev.rcs_mlp", {config.point_channels + 1, config.rcs_channels, config.rcs_channels});
    if (config.blocks == 0) return;
    if (config.concat_channels() != config.out_channels)
        b.linear("bev.encoder.proj", config.concat_channels(), config.out_channels);
    for (std::size_t k = 0; k < config.blocks; ++k) {
        const std::string prefix = "bev.encoder.block" + std::to_string(k);
        b.conv3x3(prefix + ".conv", config.out_channels, config.out_channels);
        b.batch_norm(prefix + ".bn", config.out_channels);
    }
}

BevEncoderParams BevEncoderParams::from_weights(const WeightSet& ws, const BevEncoderConfig& config) {
    config.validate();
    BevEncoderParams p;
    p.rcs_mlp = read_mlp(ws, "bev.rcs_mlp", {true, false});
    if (p.rcs_mlp.in_dim() != config.point_channels + 1 || p.rcs_mlp.out_dim() != config.rcs_channels)
        throw ShapeError("bev.rcs_mlp does not map " + std::to_string(config.point_channels + 1) + " to " +
                         std::to_string(config.rcs_channels) + " channels");
    if (config.blocks == 0) return p;
    if (config.concat_channels() != config.out_channels) {
        p.has_projection = true;
        p.proj_w = ws.matrix("bev.encoder.proj.weight");
        p.proj_b = ws.vector("bev.encoder.proj.bias");
    }
    for (std::size_t k = 0; k < config.blocks; ++k) {
        const std::string prefix = "bev.encoder.block" + std::to_string(k);
        p.blocks.push_back({read_conv3x3(ws, prefix + ".conv"), read_batch_norm(ws, prefix + ".bn")});
    }
    return p;
}

BevGrid rcs_bev_feature(const BevGrid& f_rcs, const BevGrid& g_rcs, const MlpParams& mlp_params) {
    if (g_rcs.channels() != 1) throw ShapeError("rcs_bev_feature: weight map must have one channel");
    const FeatureMap joined = concat_channels(f_rcs.data, g_rcs.data);
    if (mlp_params.in_dim() != joined.channels())
        throw ShapeError("rcs_bev_feature: MLP expects " + std::to_string(mlp_params.in_dim()) + " channels, got " +
                         std::to_string(joined.channels()));
    const Matrix out = mlp(pixels_as_rows(joined), mlp_params);
    return {rows_as_pixels(out, joined.height(), joined.width()), f_rcs.spec};
}

FeatureMap conv_bn_relu(const FeatureMap& x, const ConvBnParams& p) {
    return relu(batch_norm(conv3x3(x, p.conv), p.bn));
}

BevGrid bev_encode(const BevGrid& f_rcs_prime, const BevGrid& base, const BevEncoderParams& p) {
    FeatureMap x = concat_channels(f_rcs_prime.data, base.data);
    if (p.blocks.empty()) return {std::move(x), f_rcs_prime.spec};
    if (p.has_projection) x = conv1x1(x, p.proj_w, p.proj_b);
    for (const auto& block : p.blocks) {
        const FeatureMap y = conv_bn_relu(x, block);
        if (!y.same_shape(x)) throw ShapeError("bev_encode: residual block changes the feature shape");
        for (std::size_t i = 0; i < x.data().size(); ++i) x.data()[i] += y.data()[i];
    }
    return {std::move(x), f_rcs_prime.spec};
}

}  // namespace rcbev
