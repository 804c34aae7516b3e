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
#include <string>
#include <vector>

#include "rcbev/layers.hpp"
#include "rcbev/params.hpp"
#include "rcbev/radar.hpp"
#include "rcbev/tensor.hpp"
#include "rcbev/weights.hpp"

namespace rcbev {

/// Multi-head projections. `beta` holds one locality coefficient per head
/// for distance-modulated self-attention and is empty for plain attention.
struct AttentionParams {
    std::size_t heads = 1;
    Matrix wq, wk, wv, wo;  // C x C
    std::vector<double> bq, bk, bv, bo;
    std::vector<double> beta;

    std::size_t channels() const noexcept { return wq.rows(); }
    void validate(std::size_t channels) const;
};

struct TransformerBlockParams {
    NormParams ln_attn;
    AttentionParams attn;
    NormParams ln_ffn;
    MlpParams ffn;
};

struct InjectionParams {
    NormParams ln_query;
    NormParams ln_kv;
    AttentionParams attn;
    std::vector<double> gamma;  // per channel
};

struct ExtractionParams {
    NormParams ln_query;
    NormParams ln_kv;
    AttentionParams attn;
    NormParams ln_ffn;
    MlpParams ffn;
};

struct StageParams {
    std::size_t width = 0;
    MlpParams point;   // C_in -> width / 2
    Matrix tf_in_w;    // width x C_in, lifts the transformer stream
    std::vector<double> tf_in_b;
    TransformerBlockParams tf;
    InjectionParams inject;
    ExtractionParams extract;
};

struct BackboneConfig {
    std::size_t in_channels = PointFeatureSet::kChannels;
    std::vector<std::size_t> widths = {32, 64, 64};
    std::size_t heads = 4;        // DMSA heads
    std::size_t cross_heads = 1;  // injection / extraction heads
    std::size_t ffn_ratio = 2;
    std::size_t out_channels = 64;

    std::size_t stages() const noexcept { return widths.size(); }
    void validate() const;
};

struct BackboneParams {
    std::vector<StageParams> stages;
    Matrix merge_w;  // out x 2*width_S
    std::vector<double> merge_b;

    /// Reads `stage{i}.point.*`, `stage{i}.tf.*`, `stage{i}.inject.*`,
    /// `stage{i}.extract.*` and `merge.*`. Negative beta values are clamped
    /// to zero.
    static BackboneParams from_weights(const WeightSet& ws, const BackboneConfig& config);
};

void add_backbone_weights(WeightBuilder& builder, const BackboneConfig& config);

/// Point block: concat(g, maxpool(g)) per row, with g = mlp(f).
Matrix point_block(const Matrix& f, const MlpParams& p);

/// Squared Euclidean distances between BEV-plane coordinates (N x 2).
Matrix pairwise_sq_dist(const Matrix& coords);

/// exp(-D2 / sigma^2). Throws ConfigError unless sigma > 0.
Matrix gaussian_modulation(const Matrix& d2, double sigma);

/// Row-stochastic weights softmax(Q K^T / sqrt(d) - beta * D2). An empty
/// `d2` means no distance term.
Matrix attention_weights(const Matrix& q, const Matrix& k, const Matrix& d2, double beta);

/// Single distance-modulated head.
Matrix dmsa_head(const Matrix& q, const Matrix& k, const Matrix& v, const Matrix& d2, double beta);

/// Multi-head attention of `query` rows over `kv` rows with output
/// projection. Uses per-head beta with `d2` when p.beta is non-empty.
Matrix multi_head_attention(const Matrix& query, const Matrix& kv, const AttentionParams& p,
                            const Matrix& d2);

Matrix multi_head_dmsa(const Matrix& f, const Matrix& coords, const AttentionParams& p);

/// Pre-norm residual block: x = f + DMSA(LN(f)); x + FFN(LN(x)).
Matrix transformer_block(const Matrix& f, const Matrix& coords, const TransformerBlockParams& p);

/// f_p + gamma * CrossAttention(LN(f_p), LN(f_t)).
Matrix inject(const Matrix& f_p, const Matrix& f_t, const InjectionParams& p);

/// x = f_t + CrossAttention(LN(f_t), LN(f_p)); x + FFN(LN(x)).
Matrix extract(const Matrix& f_t, const Matrix& f_p, const ExtractionParams& p);

struct BackboneOutput {
    Matrix point_stream;        // f_p after the last stage
    Matrix transformer_stream;  // f_t after the last stage
    Matrix fused;               // merge(concat(f_p, f_t))
};

/// Counters filled in by dual_backbone_forward when supplied.
struct BackboneTrace {
    std::size_t stages_run = 0;
    std::size_t inject_calls = 0;
    std::size_t extract_calls = 0;
};

BackboneOutput dual_backbone_forward(const PointFeatureSet& feats, const BackboneParams& p,
                                     BackboneTrace* trace = nullptr);
BackboneOutput dual_backbone_forward(const PointFeatureSet& feats, const WeightSet& ws,
                                     const BackboneConfig& config, BackboneTrace* trace = nullptr);

}  // namespace rcbev
