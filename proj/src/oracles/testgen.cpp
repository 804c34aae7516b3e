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

#include "rcbev/testgen.hpp"

#include <cmath>
#include <numeric>

namespace rcbev::gen {

Matrix matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-scale, scale);
    return m;
}

std::vector<double> vec(Rng& rng, std::size_t n, double scale) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
    return v;
}

FeatureMap feature_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w, double scale) {
    FeatureMap f(c, h, w);
    for (double& v : f.data()) v = rng.uniform(-scale, scale);
    return f;
}

AttentionParams attention(Rng& rng, std::size_t channels, std::size_t heads, bool with_beta) {
    AttentionParams p;
    p.heads = heads;
    const double s = 1.0 / std::sqrt(static_cast<double>(channels));
    p.wq = matrix(rng, channels, channels, s);
    p.wk = matrix(rng, channels, channels, s);
    p.wv = matrix(rng, channels, channels, s);
    p.wo = matrix(rng, channels, channels, s);
    p.bq = vec(rng, channels, 0.1);
    p.bk = vec(rng, channels, 0.1);
    p.bv = vec(rng, channels, 0.1);
    p.bo = vec(rng, channels, 0.1);
    if (with_beta) {
        p.beta.resize(heads);
        for (double& b : p.beta) b = rng.uniform(0.0, 2.0);
    }
    return p;
}

NormParams norm(Rng& rng, std::size_t channels) {
    NormParams p;
    p.scale.resize(channels);
    for (double& v : p.scale) v = rng.uniform(0.5, 1.5);
    p.shift = vec(rng, channels, 0.2);
    return p;
}

MlpParams mlp(Rng& rng, const std::vector<std::size_t>& dims, const std::vector<bool>& relu) {
    MlpParams p;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const double s = 1.0 / std::sqrt(static_cast<double>(dims[i]));
        p.layers.push_back({matrix(rng, dims[i + 1], dims[i], s), vec(rng, dims[i + 1], 0.1), relu[i]});
    }
    return p;
}

ConvBnParams conv_bn(Rng& rng, std::size_t in, std::size_t out) {
    ConvBnParams p;
    p.conv.in_channels = in;
    p.conv.out_channels = out;
    p.conv.kernels = vec(rng, out * in * 9, 1.0 / std::sqrt(9.0 * static_cast<double>(in)));
    p.conv.bias = vec(rng, out, 0.1);
    p.bn.scale.resize(out);
    for (double& v : p.bn.scale) v = rng.uniform(0.5, 1.5);
    p.bn.shift = vec(rng, out, 0.2);
    p.bn.mean = vec(rng, out, 0.2);
    p.bn.var.resize(out);
    for (double& v : p.bn.var) v = rng.uniform(0.5, 2.0);
    return p;
}

TransformerBlockParams transformer_block(Rng& rng, std::size_t width, std::size_t heads) {
    TransformerBlockParams p;
    p.ln_attn = norm(rng, width);
    p.attn = attention(rng, width, heads, true);
    p.ln_ffn = norm(rng, width);
    p.ffn = mlp(rng, {width, 2 * width, width}, {true, false});
    return p;
}

InjectionParams injection(Rng& rng, std::size_t width, std::size_t heads) {
    InjectionParams p;
    p.ln_query = norm(rng, width);
    p.ln_kv = norm(rng, width);
    p.attn = attention(rng, width, heads, false);
    p.gamma = vec(rng, width, 1.0);
    return p;
}

ExtractionParams extraction(Rng& rng, std::size_t width, std::size_t heads) {
    ExtractionParams p;
    p.ln_query = norm(rng, width);
    p.ln_kv = norm(rng, width);
    p.attn = attention(rng, width, heads, false);
    p.ln_ffn = norm(rng, width);
    p.ffn = mlp(rng, {width, 2 * width, width}, {true, false});
    return p;
}

BackboneParams backbone(Rng& rng, const BackboneConfig& config) {
    BackboneParams p;
    std::size_t in = config.in_channels;
    for (std::size_t w : config.widths) {
        StageParams st;
        st.width = w;
        st.point = mlp(rng, {in, w / 2, w / 2}, {true, true});
        st.tf_in_w = matrix(rng, w, in, 1.0 / std::sqrt(static_cast<double>(in)));
        st.tf_in_b = vec(rng, w, 0.1);
        st.tf = transformer_block(rng, w, config.heads);
        st.inject = injection(rng, w, config.cross_heads);
        st.extract = extraction(rng, w, config.cross_heads);
        p.stages.push_back(std::move(st));
        in = w;
    }
    p.merge_w = matrix(rng, config.out_channels, 2 * in, 1.0 / std::sqrt(2.0 * static_cast<double>(in)));
    p.merge_b = vec(rng, config.out_channels, 0.1);
    return p;
}

DeformAttnParams deform(Rng& rng, std::size_t query_channels, std::size_t value_channels, std::size_t heads,
                        std::size_t points) {
    DeformAttnParams p;
    p.heads = heads;
    p.points = points;
    if (query_channels != value_channels) {
        p.has_query_proj = true;
        p.query_proj_w = matrix(rng, value_channels, query_channels, 1.0);
        p.query_proj_b = vec(rng, value_channels, 0.1);
    }
    const std::size_t mk = heads * points;
    p.offset_w = matrix(rng, 2 * mk, value_channels, 0.8);
    p.offset_b = vec(rng, 2 * mk, 2.5);
    p.attn_w = matrix(rng, mk, value_channels, 1.0);
    p.attn_b = vec(rng, mk, 0.5);
    p.value_w = matrix(rng, value_channels, value_channels, 1.0);
    p.output_w = matrix(rng, value_channels, value_channels, 1.0);
    return p;
}

CamfParams camf_fuse(Rng& rng, std::size_t camera_channels, std::size_t radar_channels, std::size_t fused_channels,
                     std::size_t blocks) {
    CamfParams p;
    const std::size_t multi = camera_channels + radar_channels;
    p.fuse_in = conv_bn(rng, multi, fused_channels);
    if (multi != fused_channels) {
        p.has_projection = true;
        p.proj_w = matrix(rng, fused_channels, multi, 1.0 / std::sqrt(static_cast<double>(multi)));
        p.proj_b = vec(rng, fused_channels, 0.1);
    }
    for (std::size_t i = 0; i < blocks; ++i) p.fuse_blocks.push_back(conv_bn(rng, fused_channels, fused_channels));
    return p;
}

PointFeatureSet points(Rng& rng, std::size_t n, const BevSpec& spec) {
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) {
        RadarPoint p;
        p.x = rng.uniform(spec.x_min, spec.x_max);
        p.y = rng.uniform(spec.y_min, spec.y_max);
        p.z = rng.uniform(-1.0, 2.0);
        p.rcs_dbsm = rng.uniform(-20.0, 30.0);
        p.vx = rng.uniform(-10.0, 10.0);
        p.vy = rng.uniform(-10.0, 10.0);
        p.sweep_offset = -0.05 * static_cast<double>(rng.next() % 6);
        cloud.points.push_back(p);
    }
    return assemble_features(cloud, spec);
}

std::vector<std::size_t> permutation(Rng& rng, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.next() % i]);
    return perm;
}

}  // namespace rcbev::gen
