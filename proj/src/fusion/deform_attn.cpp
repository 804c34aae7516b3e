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
#include <cmath>

#include "rcbev/errors.hpp"
#include "rcbev/fusion.hpp"
#include "rcbev/layers.hpp"
#include "rcbev/parallel.hpp"

namespace rcbev {

void DeformAttnParams::validate(std::size_t query_channels) const {
    if (heads == 0 || points == 0) throw ConfigError("deform_attn: heads and points must be >= 1");
    const std::size_t cv = value_w.rows();
    if (cv == 0 || cv % heads != 0)
        throw ConfigError("deform_attn: value width " + std::to_string(cv) + " is not divisible by " +
                          std::to_string(heads) + " heads");
    if (value_w.cols() != cv || output_w.rows() != cv || output_w.cols() != cv)
        throw ShapeError("deform_attn: value/output projections must be square C_v x C_v");
    if (has_query_proj) {
        if (query_proj_w.rows() != cv || query_proj_w.cols() != query_channels || query_proj_b.size() != cv)
            throw ShapeError("deform_attn: query projection is " + shape_string(query_proj_w) + ", expected " +
                             std::to_string(cv) + "x" + std::to_string(query_channels));
    } else if (query_channels != cv) {
        throw ShapeError("deform_attn: query width " + std::to_string(query_channels) + " differs from value width " +
                         std::to_string(cv) + " and no query projection is configured");
    }
    const std::size_t mk = heads * points;
    if (offset_w.rows() != 2 * mk || offset_w.cols() != cv || offset_b.size() != 2 * mk)
        throw ShapeError("deform_attn: offset projection is " + shape_string(offset_w));
    if (attn_w.rows() != mk || attn_w.cols() != cv || attn_b.size() != mk)
        throw ShapeError("deform_attn: attention projection is " + shape_string(attn_w));
}

DeformAttnParams DeformAttnParams::identity(std::size_t channels, std::size_t heads, std::size_t points) {
    DeformAttnParams p;
    p.heads = heads;
    p.points = points;
    const std::size_t mk = heads * points;
    p.offset_w = Matrix(2 * mk, channels);
    p.offset_b.assign(2 * mk, 0.0);
    p.attn_w = Matrix(mk, channels);
    p.attn_b.assign(mk, 0.0);
    p.value_w = Matrix::identity(channels);
    p.output_w = Matrix::identity(channels);
    return p;
}

DeformSampling deform_sampling(const FeatureMap& queries, const DeformAttnParams& p) {
    p.validate(queries.channels());
    Matrix z = pixels_as_rows(queries);
    if (p.has_query_proj) z = linear(z, p.query_proj_w, p.query_proj_b);
    DeformSampling s;
    s.offsets = linear(z, p.offset_w, p.offset_b);
    s.weights = linear(z, p.attn_w, p.attn_b);
    for (double v : s.offsets.data())
        if (!std::isfinite(v)) throw DataError("deform_attn: non-finite sampling offset");
    for (std::size_t q = 0; q < s.weights.rows(); ++q) {
        auto row = s.weights.row(q);
        for (std::size_t m = 0; m < p.heads; ++m) softmax_inplace(row.subspan(m * p.points, p.points));
    }
    return s;
}

FeatureMap deform_attn(const FeatureMap& queries, const FeatureMap& values, const DeformAttnParams& p,
                       std::span<const PixelCoord> ref_points) {
    if (queries.height() != values.height() || queries.width() != values.width())
        throw ShapeError("deform_attn: query grid " + shape_string(queries) + " vs value grid " + shape_string(values));
    if (values.channels() != p.value_channels())
        throw ShapeError("deform_attn: value grid has " + std::to_string(values.channels()) +
                         " channels, parameters expect " + std::to_string(p.value_channels()));
    const std::size_t H = queries.height(), W = queries.width(), n_query = H * W;
    if (!ref_points.empty() && ref_points.size() != n_query)
        throw ShapeError("deform_attn: expected one reference point per query pixel");

    const DeformSampling plan = deform_sampling(queries, p);
    const std::size_t cv = p.value_channels(), d = p.head_dim();

    // W'_m F is linear, so projecting before sampling equals projecting the
    // bilinear samples.
    const std::vector<double> zero_bias(cv, 0.0);
    const FeatureMap projected = conv1x1(values, p.value_w, zero_bias);
    std::vector<FeatureMap> head_values;
    head_values.reserve(p.heads);
    for (std::size_t m = 0; m < p.heads; ++m) {
        FeatureMap hv(d, H, W);
        std::copy_n(projected.data().begin() + static_cast<std::ptrdiff_t>(m * d * H * W), d * H * W,
                    hv.data().begin());
        head_values.push_back(std::move(hv));
    }

    FeatureMap out(cv, H, W);
    parallel_for(n_query, [&](std::size_t q) {
        const double ref_x = ref_points.empty() ? static_cast<double>(q % W) : ref_points[q].u;
        const double ref_y = ref_points.empty() ? static_cast<double>(q / W) : ref_points[q].v;
        auto offsets = plan.offsets.row(q);
        auto weights = plan.weights.row(q);
        std::vector<double> sampled(cv, 0.0);
        for (std::size_t m = 0; m < p.heads; ++m) {
            std::span<double> acc(sampled.data() + m * d, d);
            for (std::size_t k = 0; k < p.points; ++k) {
                const std::size_t mk = m * p.points + k;
                bilinear_accumulate(head_values[m], ref_x + offsets[2 * mk], ref_y + offsets[2 * mk + 1], weights[mk],
                                    acc);
            }
        }
        for (std::size_t o = 0; o < cv; ++o) {
            auto w = p.output_w.row(o);
            double v = 0.0;
            for (std::size_t c = 0; c < cv; ++c) v += w[c] * sampled[c];
            out.data()[o * n_query + q] = v;
        }
    });
    return out;
}

}  // namespace rcbev
