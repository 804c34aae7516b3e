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

#include "rcbev/errors.hpp"
#include "rcbev/fusion.hpp"

namespace rcbev {
namespace {

void add_deform_weights(WeightBuilder& b, const std::string& prefix, std::size_t query_channels,
                        std::size_t value_channels, const CamfConfig& config) {
    const std::size_t mk = config.heads * config.points;
    if (query_channels != value_channels) b.linear(prefix + ".query_proj", query_channels, value_channels);
    b.linear(prefix + ".offset", value_channels, 2 * mk);
    b.linear(prefix + ".attn", value_channels, mk);
    b.uniform(prefix + ".value.weight", {value_channels, value_channels}, value_channels, value_channels);
    b.uniform(prefix + ".output.weight", {value_channels, value_channels}, value_channels, value_channels);
}

DeformAttnParams read_deform(const WeightSet& ws, const std::string& prefix, std::size_t query_channels,
                             const CamfConfig& config) {
    DeformAttnParams p;
    p.heads = config.heads;
    p.points = config.points;
    if (ws.contains(prefix + ".query_proj.weight")) {
        p.has_query_proj = true;
        p.query_proj_w = ws.matrix(prefix + ".query_proj.weight");
        p.query_proj_b = ws.vector(prefix + ".query_proj.bias");
    }
    p.offset_w = ws.matrix(prefix + ".offset.weight");
    p.offset_b = ws.vector(prefix + ".offset.bias");
    p.attn_w = ws.matrix(prefix + ".attn.weight");
    p.attn_b = ws.vector(prefix + ".attn.bias");
    p.value_w = ws.matrix(prefix + ".value.weight");
    p.output_w = ws.matrix(prefix + ".output.weight");
    p.validate(query_channels);
    return p;
}

void check_same_plane(const BevGrid& a, const BevGrid& b, const char* what) {
    if (a.data.height() != b.data.height() || a.data.width() != b.data.width())
        throw ShapeError(std::string(what) + ": camera grid " + shape_string(a.data) + " vs radar grid " +
                         shape_string(b.data));
}

}  // namespace

void CamfConfig::validate() const {
    if (camera_channels == 0 || radar_channels == 0 || fused_channels == 0)
        throw ConfigError("CAMF channel counts must be positive");
    if (heads == 0 || points == 0) throw ConfigError("CAMF heads and points must be >= 1");
    if (camera_channels % heads != 0 || radar_channels % heads != 0)
        throw ConfigError("CAMF channel counts must be divisible by the head count");
    if (height == 0 || width == 0) throw ConfigError("CAMF grid must be non-empty");
}

void add_camf_weights(WeightBuilder& b, const CamfConfig& config) {
    config.validate();
    const std::size_t plane = config.height * config.width;
    b.uniform("fusion.pos_embed.camera", {config.camera_channels, config.height, config.width}, plane, plane);
    b.uniform("fusion.pos_embed.radar", {config.radar_channels, config.height, config.width}, plane, plane);
    add_deform_weights(b, "fusion.to_camera", config.radar_channels, config.camera_channels, config);
    add_deform_weights(b, "fusion.to_radar", config.camera_channels, config.radar_channels, config);
    const std::size_t multi = config.camera_channels + config.radar_channels;
    b.conv3x3("fusion.fuse_in.conv", multi, config.fused_channels);
    b.batch_norm("fusion.fuse_in.bn", config.fused_channels);
    if (multi != config.fused_channels) b.linear("fusion.proj", multi, config.fused_channels);
    for (std::size_t k = 0; k < config.fuse_blocks; ++k) {
        const std::string prefix = "fusion.fuse" + std::to_string(k);
        b.conv3x3(prefix + ".conv", config.fused_channels, config.fused_channels);
        b.batch_norm(prefix + ".bn", config.fused_channels);
    }
}

CamfParams CamfParams::from_weights(const WeightSet& ws, const CamfConfig& config) {
    config.validate();
    CamfParams p;
    p.pos_camera = ws.feature_map("fusion.pos_embed.camera");
    p.pos_radar = ws.feature_map("fusion.pos_embed.radar");
    p.to_camera = read_deform(ws, "fusion.to_camera", config.radar_channels, config);
    p.to_radar = read_deform(ws, "fusion.to_radar", config.camera_channels, config);
    p.fuse_in = {read_conv3x3(ws, "fusion.fuse_in.conv"), read_batch_norm(ws, "fusion.fuse_in.bn")};
    if (ws.contains("fusion.proj.weight")) {
        p.has_projection = true;
        p.proj_w = ws.matrix("fusion.proj.weight");
        p.proj_b = ws.vector("fusion.proj.bias");
    }
    for (std::size_t k = 0; k < config.fuse_blocks; ++k) {
        const std::string prefix = "fusion.fuse" + std::to_string(k);
        p.fuse_blocks.push_back({read_conv3x3(ws, prefix + ".conv"), read_batch_norm(ws, prefix + ".bn")});
    }
    return p;
}

BevGrid add_pos_embed(const BevGrid& f, const FeatureMap& embedding) {
    if (!f.data.same_shape(embedding))
        throw ShapeError("add_pos_embed: feature " + shape_string(f.data) + " vs embedding " + shape_string(embedding));
    BevGrid out = f;
    for (std::size_t i = 0; i < out.data.data().size(); ++i) out.data.data()[i] += embedding.data()[i];
    return out;
}

std::pair<BevGrid, BevGrid> cross_align(const BevGrid& camera, const BevGrid& radar, const CamfParams& p) {
    check_same_plane(camera, radar, "cross_align");
    BevGrid cam = add_pos_embed(camera, p.pos_camera);
    BevGrid rad = add_pos_embed(radar, p.pos_radar);
    const FeatureMap cam_update = deform_attn(rad.data, cam.data, p.to_camera);
    const FeatureMap rad_update = deform_attn(cam.data, rad.data, p.to_radar);
    for (std::size_t i = 0; i < cam.data.data().size(); ++i) cam.data.data()[i] += cam_update.data()[i];
    for (std::size_t i = 0; i < rad.data.data().size(); ++i) rad.data.data()[i] += rad_update.data()[i];
    return {std::move(cam), std::move(rad)};
}

FeatureMap cbr_block(const FeatureMap& x, const ConvBnParams& p) { return conv_bn_relu(x, p); }

BevGrid channel_spatial_fuse(const BevGrid& camera, const BevGrid& radar, const CamfParams& p) {
    check_same_plane(camera, radar, "channel_spatial_fuse");
    const FeatureMap multi = concat_channels(camera.data, radar.data);
    FeatureMap y = cbr_block(multi, p.fuse_in);
    if (p.has_projection) {
        const FeatureMap skip = conv1x1(multi, p.proj_w, p.proj_b);
        if (!skip.same_shape(y)) throw ShapeError("channel_spatial_fuse: projection width differs from CBR width");
        for (std::size_t i = 0; i < y.data().size(); ++i) y.data()[i] += skip.data()[i];
    } else {
        if (!multi.same_shape(y))
            throw ShapeError("channel_spatial_fuse: residual needs a projection from " +
                             std::to_string(multi.channels()) + " to " + std::to_string(y.channels()) + " channels");
        for (std::size_t i = 0; i < y.data().size(); ++i) y.data()[i] += multi.data()[i];
    }
    for (const auto& block : p.fuse_blocks) y = cbr_block(y, block);
    return {std::move(y), camera.spec};
}

BevGrid camf_forward(const BevGrid& camera, const BevGrid& radar, const CamfParams& p) {
    const auto [cam, rad] = cross_align(camera, radar, p);
    return channel_spatial_fuse(cam, rad, p);
}

}  // namespace rcbev
