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

#include <algorithm>

#include "rcbev/backbone.hpp"
#include "rcbev/errors.hpp"

namespace rcbev {
namespace {

std::string stage_prefix(std::size_t s) { return "stage" + std::to_string(s); }

AttentionParams read_attention(const WeightSet& ws, const std::string& prefix, std::size_t heads, bool with_beta) {
    AttentionParams p;
    p.heads = heads;
    p.wq = ws.matrix(prefix + ".q.weight");
    p.bq = ws.vector(prefix + ".q.bias");
    p.wk = ws.matrix(prefix + ".k.weight");
    p.bk = ws.vector(prefix + ".k.bias");
    p.wv = ws.matrix(prefix + ".v.weight");
    p.bv = ws.vector(prefix + ".v.bias");
    p.wo = ws.matrix(prefix + ".o.weight");
    p.bo = ws.vector(prefix + ".o.bias");
    if (with_beta) {
        p.beta = ws.vector(prefix + ".beta");
        // beta stands in for 1/sigma^2; a negative value would reward distance.
        for (double& b : p.beta) b = std::max(b, 0.0);
    }
    p.validate(p.wq.rows());
    return p;
}

void add_attention(WeightBuilder& b, const std::string& prefix, std::size_t c, std::size_t heads, bool with_beta) {
    for (const char* proj : {".q", ".k", ".v", ".o"}) b.linear(prefix + proj, c, c);
    if (with_beta) b.constant(prefix + ".beta", {heads}, 1.0);
}

}  // namespace

void BackboneConfig::validate() const {
    if (in_channels == 0) throw ConfigError("backbone input channels must be positive");
    if (widths.empty()) throw ConfigError("backbone needs at least one stage");
    if (heads == 0 || cross_heads == 0 || ffn_ratio == 0 || out_channels == 0)
        throw ConfigError("backbone head counts, FFN ratio and output width must be positive");
    for (std::size_t s = 0; s < widths.size(); ++s) {
        const auto w = widths[s];
        if (w == 0 || w % 2 != 0)
            throw ConfigError("stage " + std::to_string(s) + " width must be positive and even");
        if (w % heads != 0 || w % cross_heads != 0)
            throw ConfigError("stage " + std::to_string(s) + " width " + std::to_string(w) +
                              " is not divisible by the head counts");
    }
}

void add_backbone_weights(WeightBuilder& b, const BackboneConfig& config) {
    config.validate();
    std::size_t c_in = config.in_channels;
    for (std::size_t s = 0; s < config.stages(); ++s) {
        const std::string sp = stage_prefix(s);
        const std::size_t w = config.widths[s];
        const std::size_t hidden = w * config.ffn_ratio;
        b.mlp(sp + ".point.mlp", {c_in, w / 2, w / 2});
        b.linear(sp + ".tf.in_proj", c_in, w);
        b.layer_norm(sp + ".tf.ln_attn", w);
        add_attention(b, sp + ".tf.attn", w, config.heads, true);
        b.layer_norm(sp + ".tf.ln_ffn", w);
        b.mlp(sp + ".tf.ffn", {w, hidden, w});
        b.layer_norm(sp + ".inject.ln_query", w);
        b.layer_norm(sp + ".inject.ln_kv", w);
        add_attention(b, sp + ".inject.attn", w, config.cross_heads, false);
        b.constant(sp + ".inject.gamma", {w}, 0.0);
        b.layer_norm(sp + ".extract.ln_query", w);
        b.layer_norm(sp + ".extract.ln_kv", w);
        add_attention(b, sp + ".extract.attn", w, config.cross_heads, false);
        b.layer_norm(sp + ".extract.ln_ffn", w);
        b.mlp(sp + ".extract.ffn", {w, hidden, w});
        c_in = w;
    }
    b.linear("merge", 2 * c_in, config.out_channels);
}

BackboneParams BackboneParams::from_weights(const WeightSet& ws, const BackboneConfig& config) {
    config.validate();
    BackboneParams p;
    std::size_t c_in = config.in_channels;
    for (std::size_t s = 0; s < config.stages(); ++s) {
        const std::string sp = stage_prefix(s);
        StageParams st;
        st.width = config.widths[s];
        st.point = read_mlp(ws, sp + ".point.mlp", {true, true});
        st.tf_in_w = ws.matrix(sp + ".tf.in_proj.weight");
        st.tf_in_b = ws.vector(sp + ".tf.in_proj.bias");
        st.tf.ln_attn = read_layer_norm(ws, sp + ".tf.ln_attn");
        st.tf.attn = read_attention(ws, sp + ".tf.attn", config.heads, true);
        st.tf.ln_ffn = read_layer_norm(ws, sp + ".tf.ln_ffn");
        st.tf.ffn = read_mlp(ws, sp + ".tf.ffn", {true, false});
        st.inject.ln_query = read_layer_norm(ws, sp + ".inject.ln_query");
        st.inject.ln_kv = read_layer_norm(ws, sp + ".inject.ln_kv");
        st.inject.attn = read_attention(ws, sp + ".inject.attn", config.cross_heads, false);
        st.inject.gamma = ws.vector(sp + ".inject.gamma");
        st.extract.ln_query = read_layer_norm(ws, sp + ".extract.ln_query");
        st.extract.ln_kv = read_layer_norm(ws, sp + ".extract.ln_kv");
        st.extract.attn = read_attention(ws, sp + ".extract.attn", config.cross_heads, false);
        st.extract.ln_ffn = read_layer_norm(ws, sp + ".extract.ln_ffn");
        st.extract.ffn = read_mlp(ws, sp + ".extract.ffn", {true, false});

        if (st.point.in_dim() != c_in || 2 * st.point.out_dim() != st.width)
            throw ShapeError(sp + ".point.mlp does not map " + std::to_string(c_in) + " to " +
                             std::to_string(st.width / 2) + " channels");
        if (st.tf_in_w.rows() != st.width || st.tf_in_w.cols() != c_in)
            throw ShapeError(sp + ".tf.in_proj has shape " + shape_string(st.tf_in_w));
        p.stages.push_back(std::move(st));
        c_in = config.widths[s];
    }
    p.merge_w = ws.matrix("merge.weight");
    p.merge_b = ws.vector("merge.bias");
    if (p.merge_w.cols() != 2 * c_in) throw ShapeError("merge.weight has shape " + shape_string(p.merge_w));
    return p;
}

BackboneOutput dual_backbone_forward(const PointFeatureSet& feats, const BackboneParams& p, BackboneTrace* trace) {
    if (feats.size() == 0) throw EmptyInputError("dual_backbone_forward: no points");
    if (p.stages.empty()) throw ConfigError("dual_backbone_forward: no stages");
    feats.validate();
    Matrix f_p = feats.features;
    Matrix f_t = feats.features;
    for (const auto& st : p.stages) {
        f_p = point_block(f_p, st.point);
        f_t = transformer_block(linear(f_t, st.tf_in_w, st.tf_in_b), feats.coords, st.tf);
        f_p = inject(f_p, f_t, st.inject);
        f_t = extract(f_t, f_p, st.extract);
        if (trace != nullptr) {
            ++trace->stages_run;
            ++trace->inject_calls;
            ++trace->extract_calls;
        }
    }
    BackboneOutput out;
    out.fused = linear(hconcat(f_p, f_t), p.merge_w, p.merge_b);
    out.point_stream = std::move(f_p);
    out.transformer_stream = std::move(f_t);
    return out;
}

BackboneOutput dual_backbone_forward(const PointFeatureSet& feats, const WeightSet& ws, const BackboneConfig& config,
                                     BackboneTrace* trace) {
    return dual_backbone_forward(feats, BackboneParams::from_weights(ws, config), trace);
}

}  // namespace rcbev
