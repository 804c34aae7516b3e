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

#include <gtest/gtest.h>

#include <cmath>

#include "rcbev/errors.hpp"
#include "rcbev/fusion.hpp"
#include "rcbev/layers.hpp"
#include "rcbev/oracles.hpp"
#include "rcbev/testgen.hpp"

using namespace rcbev;

namespace {

BevSpec grid_spec(std::size_t h, std::size_t w) {
    return BevSpec::make(0.0, 0.5 * static_cast<double>(w), 0.0, 0.5 * static_cast<double>(h), 0.5);
}

FeatureMap nonnegative_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w) {
    FeatureMap f(c, h, w);
    for (double& v : f.data()) v = rng.uniform(0.0, 2.0);
    return f;
}

ConvBnParams identity_cbr(std::size_t channels) {
    ConvBnParams p;
    p.conv.in_channels = p.conv.out_channels = channels;
    p.conv.kernels.assign(channels * channels * 9, 0.0);
    p.conv.bias.assign(channels, 0.0);
    for (std::size_t c = 0; c < channels; ++c) p.conv.k(c, c, 1, 1) = 1.0;
    const double eps = std::ldexp(1.0, -20);  // var + eps is exactly one
    p.bn = BatchNormParams{std::vector<double>(channels, 1.0), std::vector<double>(channels, 0.0),
                           std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0 - eps), eps};
    return p;
}

CamfParams random_camf(Rng& rng, std::size_t cc, std::size_t cr, std::size_t cf, std::size_t heads,
                       std::size_t points, std::size_t h, std::size_t w) {
    CamfParams p = gen::camf_fuse(rng, cc, cr, cf, 1);
    p.pos_camera = gen::feature_map(rng, cc, h, w);
    p.pos_radar = gen::feature_map(rng, cr, h, w);
    p.to_camera = gen::deform(rng, cr, cc, heads, points);
    p.to_radar = gen::deform(rng, cc, cr, heads, points);
    return p;
}

FeatureMap sum(const FeatureMap& a, const FeatureMap& b) {
    FeatureMap out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

}  // namespace

TEST(PosEmbed, ZeroEmbeddingIsIdentity) {
    Rng rng(1);
    const BevGrid f(gen::feature_map(rng, 3, 4, 5), grid_spec(4, 5));
    EXPECT_EQ(add_pos_embed(f, FeatureMap(3, 4, 5)), f);
}

TEST(PosEmbed, ZeroFeatureGivesEmbedding) {
    Rng rng(2);
    const FeatureMap e = gen::feature_map(rng, 3, 4, 5);
    EXPECT_EQ(add_pos_embed(BevGrid(3, grid_spec(4, 5)), e).data, e);
}

TEST(PosEmbed, ShapeMismatch) {
    EXPECT_THROW(add_pos_embed(BevGrid(3, grid_spec(4, 5)), FeatureMap(3, 5, 4)), ShapeError);
}

TEST(DeformAttn, SingleHeadSinglePointIdentity) {
    Rng rng(3);
    const FeatureMap v = gen::feature_map(rng, 4, 5, 6);
    EXPECT_EQ(deform_attn(v, v, DeformAttnParams::identity(4, 1, 1)), v);
}

TEST(DeformAttn, MultiHeadIdentity) {
    Rng rng(4);
    const FeatureMap q = gen::feature_map(rng, 8, 5, 6), v = gen::feature_map(rng, 8, 5, 6);
    EXPECT_LE(max_abs_diff(deform_attn(q, v, DeformAttnParams::identity(8, 4, 3)), v), 1e-15);
}

TEST(DeformAttn, ZeroOffsetsApplyHeadProjections) {
    Rng rng(5);
    DeformAttnParams p = gen::deform(rng, 4, 4, 2, 2);
    std::fill(p.offset_w.data().begin(), p.offset_w.data().end(), 0.0);
    std::fill(p.offset_b.begin(), p.offset_b.end(), 0.0);
    const FeatureMap q = gen::feature_map(rng, 4, 3, 3), v = gen::feature_map(rng, 4, 3, 3);
    const FeatureMap out = deform_attn(q, v, p);
    const std::vector<double> zero(4, 0.0);
    const Matrix expect = oracle::linear(oracle::linear(pixels_as_rows(v), p.value_w, zero), p.output_w, zero);
    EXPECT_LE(max_abs_diff(pixels_as_rows(out), expect), 1e-12);
}

TEST(DeformAttn, MatchesNestedLoopOracle) {
    Rng rng(6);
    const DeformAttnParams p = gen::deform(rng, 4, 4, 2, 4);
    const FeatureMap q = gen::feature_map(rng, 4, 6, 6), v = gen::feature_map(rng, 4, 6, 6);
    EXPECT_LE(max_abs_diff(deform_attn(q, v, p), oracle::deform_attn(q, v, p)), 1e-10);
}

TEST(DeformAttn, RandomInstancesMatchOracle) {
    Rng rng(7);
    for (int t = 0; t < 60; ++t) {
        const std::size_t heads = 1 + rng.next() % 3, d = 1 + rng.next() % 3, points = 1 + rng.next() % 4;
        const std::size_t cv = heads * d, cq = rng.next() % 2 ? cv : cv + 1 + rng.next() % 3;
        const std::size_t h = 1 + rng.next() % 7, w = 1 + rng.next() % 7;
        const DeformAttnParams p = gen::deform(rng, cq, cv, heads, points);
        const FeatureMap q = gen::feature_map(rng, cq, h, w), v = gen::feature_map(rng, cv, h, w);
        EXPECT_LE(max_abs_diff(deform_attn(q, v, p), oracle::deform_attn(q, v, p)), 1e-10);
    }
}

TEST(DeformAttn, WeightsSumToOnePerHead) {
    Rng rng(8);
    for (int t = 0; t < 30; ++t) {
        const DeformAttnParams p = gen::deform(rng, 5, 6, 3, 1 + rng.next() % 5);
        for (double s : oracle::deform_weight_sums(gen::feature_map(rng, 5, 4, 4), p)) EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(DeformAttn, ReferencePointTranslation) {
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        const std::size_t h = 5, w = 7;
        const DeformAttnParams p = gen::deform(rng, 4, 4, 2, 3);
        const FeatureMap q = gen::feature_map(rng, 4, h, w);
        FeatureMap v = gen::feature_map(rng, 4, h, w);
        for (std::size_t c = 0; c < 4; ++c)
            for (std::size_t y = 0; y < h; ++y) v.at(c, y, 0) = 0.0;
        // shifted(x) = v(x + 1), so sampling `shifted` at p equals sampling `v` at p + 1.
        FeatureMap shifted(4, h, w);
        for (std::size_t c = 0; c < 4; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x + 1 < w; ++x) shifted.at(c, y, x) = v.at(c, y, x + 1);
        std::vector<PixelCoord> refs(h * w);
        for (std::size_t i = 0; i < refs.size(); ++i)
            refs[i] = {static_cast<double>(i % w) + 1.0, static_cast<double>(i / w)};
        EXPECT_LE(max_abs_diff(deform_attn(q, v, p, refs), deform_attn(q, shifted, p)), 1e-12);
    }
}

TEST(DeformAttn, ExplicitOwnReferencesMatchDefault) {
    Rng rng(10);
    const DeformAttnParams p = gen::deform(rng, 4, 4, 2, 3);
    const FeatureMap q = gen::feature_map(rng, 4, 3, 4), v = gen::feature_map(rng, 4, 3, 4);
    std::vector<PixelCoord> refs(12);
    for (std::size_t i = 0; i < 12; ++i) refs[i] = {static_cast<double>(i % 4), static_cast<double>(i / 4)};
    EXPECT_EQ(deform_attn(q, v, p, refs), deform_attn(q, v, p));
    refs.pop_back();
    EXPECT_THROW(deform_attn(q, v, p, refs), ShapeError);
}

TEST(DeformAttn, ShapeAndConfigErrors) {
    Rng rng(11);
    const DeformAttnParams p = gen::deform(rng, 4, 4, 2, 2);
    EXPECT_THROW(deform_attn(FeatureMap(4, 3, 3), FeatureMap(4, 3, 4), p), ShapeError);
    EXPECT_THROW(deform_attn(FeatureMap(4, 3, 3), FeatureMap(6, 3, 3), p), ShapeError);
    EXPECT_THROW(deform_attn(FeatureMap(5, 3, 3), FeatureMap(4, 3, 3), p), ShapeError);
    EXPECT_THROW(DeformAttnParams::identity(6, 4, 1).validate(6), ConfigError);
}

TEST(DeformAttn, NonFiniteOffsetRejected) {
    Rng rng(12);
    DeformAttnParams p = gen::deform(rng, 4, 4, 2, 2);
    p.offset_b[0] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(deform_attn(FeatureMap(4, 2, 2), FeatureMap(4, 2, 2), p), DataError);
}

TEST(CrossAlign, ZeroOutputProjectionKeepsEmbeddedInputs) {
    Rng rng(13);
    const std::size_t h = 4, w = 5;
    CamfParams p = random_camf(rng, 4, 6, 8, 2, 2, h, w);
    std::fill(p.to_camera.output_w.data().begin(), p.to_camera.output_w.data().end(), 0.0);
    std::fill(p.to_radar.output_w.data().begin(), p.to_radar.output_w.data().end(), 0.0);
    const BevGrid cam(gen::feature_map(rng, 4, h, w), grid_spec(h, w)), rad(gen::feature_map(rng, 6, h, w), grid_spec(h, w));
    const auto [c, r] = cross_align(cam, rad, p);
    EXPECT_EQ(c.data, sum(cam.data, p.pos_camera));
    EXPECT_EQ(r.data, sum(rad.data, p.pos_radar));
}

TEST(CrossAlign, IdentityAttentionDoublesEmbeddedInputs) {
    Rng rng(14);
    const std::size_t h = 4, w = 5;
    CamfParams p = random_camf(rng, 4, 4, 8, 2, 2, h, w);
    p.to_camera = DeformAttnParams::identity(4, 2, 2);
    p.to_radar = DeformAttnParams::identity(4, 2, 2);
    const BevGrid cam(gen::feature_map(rng, 4, h, w), grid_spec(h, w)), rad(gen::feature_map(rng, 4, h, w), grid_spec(h, w));
    const auto [c, r] = cross_align(cam, rad, p);
    const FeatureMap ec = sum(cam.data, p.pos_camera), er = sum(rad.data, p.pos_radar);
    EXPECT_LE(max_abs_diff(c.data, sum(ec, ec)), 1e-14);
    EXPECT_LE(max_abs_diff(r.data, sum(er, er)), 1e-14);
}

TEST(CrossAlign, ZeroRadarIsWellDefined) {
    Rng rng(15);
    const std::size_t h = 3, w = 3;
    const CamfParams p = random_camf(rng, 4, 2, 6, 2, 2, h, w);
    const BevGrid cam(gen::feature_map(rng, 4, h, w), grid_spec(h, w)), rad(2, grid_spec(h, w));
    const auto [c, r] = cross_align(cam, rad, p);
    for (double v : c.data.data()) EXPECT_TRUE(std::isfinite(v));
    for (double v : r.data.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(CrossAlign, MatchesTwoOracleAttentions) {
    Rng rng(16);
    for (int t = 0; t < 20; ++t) {
        const std::size_t h = 2 + rng.next() % 5, w = 2 + rng.next() % 5;
        const CamfParams p = random_camf(rng, 4, 2, 6, 2, 1 + rng.next() % 4, h, w);
        const BevGrid cam(gen::feature_map(rng, 4, h, w), grid_spec(h, w)), rad(gen::feature_map(rng, 2, h, w), grid_spec(h, w));
        const auto [c, r] = cross_align(cam, rad, p);
        const FeatureMap ec = sum(cam.data, p.pos_camera), er = sum(rad.data, p.pos_radar);
        EXPECT_LE(max_abs_diff(c.data, sum(ec, oracle::deform_attn(er, ec, p.to_camera))), 1e-10);
        EXPECT_LE(max_abs_diff(r.data, sum(er, oracle::deform_attn(ec, er, p.to_radar))), 1e-10);
    }
}

TEST(CrossAlign, PlaneMismatch) {
    Rng rng(17);
    const CamfParams p = random_camf(rng, 4, 2, 6, 2, 2, 3, 3);
    EXPECT_THROW(cross_align(BevGrid(4, grid_spec(3, 3)), BevGrid(2, grid_spec(3, 4)), p), ShapeError);
}

TEST(CbrBlock, IdentityOnNonNegativeInput) {
    Rng rng(18);
    const FeatureMap x = nonnegative_map(rng, 3, 5, 4);
    EXPECT_EQ(cbr_block(x, identity_cbr(3)), x);
}

TEST(CbrBlock, LargeNegativeShiftGivesZeros) {
    Rng rng(19);
    ConvBnParams p = gen::conv_bn(rng, 3, 2);
    std::fill(p.bn.shift.begin(), p.bn.shift.end(), -1e6);
    const FeatureMap out = cbr_block(gen::feature_map(rng, 3, 4, 4), p);
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(CbrBlock, MatchesOracle) {
    Rng rng(20);
    for (int t = 0; t < 30; ++t) {
        const ConvBnParams p = gen::conv_bn(rng, 1 + rng.next() % 4, 1 + rng.next() % 4);
        const FeatureMap x = gen::feature_map(rng, p.conv.in_channels, 1 + rng.next() % 6, 1 + rng.next() % 6);
        EXPECT_LE(max_abs_diff(cbr_block(x, p), oracle::cbr(x, p)), 1e-12);
    }
}

TEST(ChannelSpatialFuse, ReducesToProjectionWithInertBlocks) {
    Rng rng(21);
    const std::size_t h = 4, w = 4;
    CamfParams p = gen::camf_fuse(rng, 3, 2, 4, 2);
    std::fill(p.fuse_in.conv.kernels.begin(), p.fuse_in.conv.kernels.end(), 0.0);
    std::fill(p.fuse_in.conv.bias.begin(), p.fuse_in.conv.bias.end(), 0.0);
    p.fuse_in.bn = identity_cbr(4).bn;
    for (double& v : p.proj_w.data()) v = std::abs(v);
    for (double& v : p.proj_b) v = std::abs(v);
    for (auto& b : p.fuse_blocks) b = identity_cbr(4);
    const BevGrid cam(nonnegative_map(rng, 3, h, w), grid_spec(h, w)), rad(nonnegative_map(rng, 2, h, w), grid_spec(h, w));
    const FeatureMap expect = oracle::pixel_linear(concat_channels(cam.data, rad.data), p.proj_w, p.proj_b);
    EXPECT_LE(max_abs_diff(channel_spatial_fuse(cam, rad, p).data, expect), 1e-12);
}

TEST(ChannelSpatialFuse, DefaultWidthsConcatenateTo128) {
    Rng rng(22);
    const std::size_t h = 3, w = 3;
    const CamfParams p = gen::camf_fuse(rng, 64, 64, 128, 1);
    EXPECT_FALSE(p.has_projection);
    EXPECT_EQ(p.fuse_in.conv.in_channels, 128u);
    const BevGrid cam(gen::feature_map(rng, 64, h, w), grid_spec(h, w)), rad(gen::feature_map(rng, 64, h, w), grid_spec(h, w));
    const BevGrid out = channel_spatial_fuse(cam, rad, p);
    EXPECT_EQ(out.channels(), 128u);
    EXPECT_LE(max_abs_diff(out.data, oracle::channel_spatial_fuse(cam, rad, p).data), 1e-9);
}

TEST(ChannelSpatialFuse, MatchesOracle) {
    Rng rng(23);
    for (int t = 0; t < 20; ++t) {
        const std::size_t h = 1 + rng.next() % 6, w = 1 + rng.next() % 6;
        const std::size_t cc = 1 + rng.next() % 4, cr = 1 + rng.next() % 4, cf = 1 + rng.next() % 8;
        const CamfParams p = gen::camf_fuse(rng, cc, cr, cf, rng.next() % 3);
        const BevGrid cam(gen::feature_map(rng, cc, h, w), grid_spec(h, w)), rad(gen::feature_map(rng, cr, h, w), grid_spec(h, w));
        EXPECT_LE(max_abs_diff(channel_spatial_fuse(cam, rad, p).data, oracle::channel_spatial_fuse(cam, rad, p).data),
                  1e-9);
    }
}

TEST(ChannelSpatialFuse, MissingProjectionRejected) {
    Rng rng(24);
    CamfParams p = gen::camf_fuse(rng, 2, 2, 6, 0);
    p.has_projection = false;
    EXPECT_THROW(channel_spatial_fuse(BevGrid(2, grid_spec(3, 3)), BevGrid(2, grid_spec(3, 3)), p), ShapeError);
}

TEST(CamfWeights, FromWeightsMatchesConfig) {
    CamfConfig cfg;
    cfg.camera_channels = 8;
    cfg.radar_channels = 4;
    cfg.fused_channels = 8;
    cfg.heads = 2;
    cfg.points = 3;
    cfg.fuse_blocks = 2;
    cfg.height = cfg.width = 5;
    WeightBuilder wb(3);
    add_camf_weights(wb, cfg);
    const WeightSet ws = std::move(wb).finish();
    const CamfParams p = CamfParams::from_weights(ws, cfg);
    EXPECT_TRUE(p.to_camera.has_query_proj);
    EXPECT_TRUE(p.to_radar.has_query_proj);
    EXPECT_TRUE(p.has_projection);
    EXPECT_EQ(p.fuse_blocks.size(), 2u);
    EXPECT_EQ(p.to_camera.offset_w.rows(), 12u);
    const BevGrid cam(FeatureMap(8, 5, 5, 0.5), grid_spec(5, 5)), rad(FeatureMap(4, 5, 5, -0.5), grid_spec(5, 5));
    EXPECT_EQ(camf_forward(cam, rad, p).channels(), 8u);
}

TEST(CamfConfig, Validation) {
    CamfConfig cfg;
    cfg.heads = 3;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = CamfConfig{};
    cfg.points = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
