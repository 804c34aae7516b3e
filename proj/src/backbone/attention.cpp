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

#include <cmath>
#include <limits>

#include "rcbev/backbone.hpp"
#include "rcbev/errors.hpp"

namespace rcbev {
namespace {

Matrix column_slice(const Matrix& m, std::size_t begin, std::size_t count) {
    Matrix out(m.rows(), count);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, begin + c);
    return out;
}

}  // namespace

void AttentionParams::validate(std::size_t c) const {
    if (heads == 0) throw ConfigError("attention needs at least one head");
    if (c % heads != 0)
        throw ConfigError("attention width " + std::to_string(c) + " is not divisible by " +
                          std::to_string(heads) + " heads");
    for (const Matrix* w : {&wq, &wk, &wv, &wo})
        if (w->rows() != c || w->cols() != c)
            throw ShapeError("attention projection is " + shape_string(*w) + ", expected " + std::to_string(c) +
                             "x" + std::to_string(c));
    for (const auto* b : {&bq, &bk, &bv, &bo})
        if (b->size() != c) throw ShapeError("attention bias length mismatch");
    if (!beta.empty() && beta.size() != heads)
        throw ShapeError("attention has " + std::to_string(beta.size()) + " beta values for " +
                         std::to_string(heads) + " heads");
}

Matrix point_block(const Matrix& f, const MlpParams& p) {
    if (f.rows() == 0) throw EmptyInputError("point_block: no points");
    const Matrix g = mlp(f, p);
    const auto pooled = max_pool_points(g);
    Matrix out(g.rows(), 2 * g.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
        auto row = out.row(i);
        auto gi = g.row(i);
        std::copy(gi.begin(), gi.end(), row.begin());
        std::copy(pooled.begin(), pooled.end(), row.begin() + static_cast<std::ptrdiff_t>(g.cols()));
    }
    return out;
}

Matrix pairwise_sq_dist(const Matrix& coords) {
    if (coords.cols() != 2) throw ShapeError("pairwise_sq_dist expects N x 2 coordinates, got " + shape_string(coords));
    const std::size_t n = coords.rows();
    Matrix d2(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = coords(i, 0) - coords(j, 0);
            const double dy = coords(i, 1) - coords(j, 1);
            d2(i, j) = d2(j, i) = dx * dx + dy * dy;
        }
    }
    return d2;
}

Matrix gaussian_modulation(const Matrix& d2, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("gaussian_modulation: sigma must be positive");
    Matrix g(d2.rows(), d2.cols());
    const double s2 = sigma * sigma;
    for (std::size_t i = 0; i < d2.data().size(); ++i) g.data()[i] = std::exp(-d2.data()[i] / s2);
    return g;
}

Matrix attention_weights(const Matrix& q, const Matrix& k, const Matrix& d2, double beta) {
    if (q.cols() != k.cols()) throw ShapeError("attention: query " + shape_string(q) + " vs key " + shape_string(k));
    const bool modulated = !d2.empty();
    if (modulated && (d2.rows() != q.rows() || d2.cols() != k.rows()))
        throw ShapeError("attention: distance matrix " + shape_string(d2) + " does not match " +
                         std::to_string(q.rows()) + "x" + std::to_string(k.rows()));
    if (beta < 0.0) throw ConfigError("attention: beta must be non-negative");
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Matrix a(q.rows(), k.rows());
    std::vector<double> terms(k.rows());
    for (std::size_t i = 0; i < q.rows(); ++i) {
        auto qi = q.row(i);
        auto ai = a.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k.rows(); ++j) {
            auto kj = k.row(j);
            double dot = 0.0;
            for (std::size_t c = 0; c < qi.size(); ++c) dot += qi[c] * kj[c];
            double logit = dot * scale;
            if (modulated) logit -= beta * d2(i, j);
            if (!std::isfinite(logit)) throw DataError("attention: non-finite logit");
            ai[j] = logit;
            mx = std::max(mx, logit);
        }
        for (std::size_t j = 0; j < ai.size(); ++j) terms[j] = ai[j] = std::exp(ai[j] - mx);
        const double denom = order_invariant_sum(terms);
        for (double& v : ai) v /= denom;
    }
    return a;
}

Matrix dmsa_head(const Matrix& q, const Matrix& k, const Matrix& v, const Matrix& d2, double beta) {
    if (k.rows() != v.rows()) throw ShapeError("attention: key " + shape_string(k) + " vs value " + shape_string(v));
    const Matrix a = attention_weights(q, k, d2, beta);
    Matrix out(q.rows(), v.cols());
    std::vector<double> terms(v.rows());
    for (std::size_t i = 0; i < q.rows(); ++i) {
        auto ai = a.row(i);
        for (std::size_t c = 0; c < v.cols(); ++c) {
            for (std::size_t j = 0; j < v.rows(); ++j) terms[j] = ai[j] * v(j, c);
            // Key-order independence keeps the block exactly permutation equivariant.
            out(i, c) = order_invariant_sum(terms);
        }
    }
    return out;
}

Matrix multi_head_attention(const Matrix& query, const Matrix& kv, const AttentionParams& p, const Matrix& d2) {
    const std::size_t c = query.cols();
    p.validate(c);
    if (kv.cols() != c) throw ShapeError("attention: query " + shape_string(query) + " vs key/value " + shape_string(kv));
    if (kv.rows() == 0) throw EmptyInputError("attention: no keys");
    const Matrix q = linear(query, p.wq, p.bq);
    const Matrix k = linear(kv, p.wk, p.bk);
    const Matrix v = linear(kv, p.wv, p.bv);
    const std::size_t d = c / p.heads;
    static const Matrix kNoDistance;
    Matrix heads(query.rows(), c);
    for (std::size_t h = 0; h < p.heads; ++h) {
        const bool modulated = !p.beta.empty();
        const Matrix out = dmsa_head(column_slice(q, h * d, d), column_slice(k, h * d, d), column_slice(v, h * d, d),
                                     modulated ? d2 : kNoDistance, modulated ? p.beta[h] : 0.0);
        for (std::size_t r = 0; r < out.rows(); ++r)
            for (std::size_t j = 0; j < d; ++j) heads(r, h * d + j) = out(r, j);
    }
    return linear(heads, p.wo, p.bo);
}

Matrix multi_head_dmsa(const Matrix& f, const Matrix& coords, const AttentionParams& p) {
    if (coords.rows() != f.rows()) throw ShapeError("multi_head_dmsa: coordinate rows do not match features");
    if (p.beta.empty()) throw ConfigError("multi_head_dmsa: parameters carry no beta values");
    return multi_head_attention(f, f, p, pairwise_sq_dist(coords));
}

Matrix transformer_block(const Matrix& f, const Matrix& coords, const TransformerBlockParams& p) {
    Matrix x = multi_head_dmsa(layer_norm(f, p.ln_attn), coords, p.attn);
    for (std::size_t i = 0; i < x.data().size(); ++i) x.data()[i] += f.data()[i];
    const Matrix y = mlp(layer_norm(x, p.ln_ffn), p.ffn);
    if (y.cols() != x.cols()) throw ShapeError("transformer_block: FFN output width differs from block width");
    for (std::size_t i = 0; i < x.data().size(); ++i) x.data()[i] += y.data()[i];
    return x;
}

Matrix inject(const Matrix& f_p, const Matrix& f_t, const InjectionParams& p) {
    if (f_p.rows() != f_t.rows() || f_p.cols() != f_t.cols())
        throw ShapeError("inject: point stream " + shape_string(f_p) + " vs transformer stream " + shape_string(f_t));
    if (p.gamma.size() != f_p.cols()) throw ShapeError("inject: gamma length does not match channels");
    static const Matrix kNoDistance;
    const Matrix attended =
        multi_head_attention(layer_norm(f_p, p.ln_query), layer_norm(f_t, p.ln_kv), p.attn, kNoDistance);
    Matrix out = f_p;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t c = 0; c < out.cols(); ++c)
            if (p.gamma[c] != 0.0) out(i, c) += p.gamma[c] * attended(i, c);
    return out;
}

Matrix extract(const Matrix& f_t, const Matrix& f_p, const ExtractionParams& p) {
    if (f_p.rows() != f_t.rows() || f_p.cols() != f_t.cols())
        throw ShapeError("extract: transformer stream " + shape_string(f_t) + " vs point stream " + shape_string(f_p));
    static const Matrix kNoDistance;
    Matrix x = multi_head_attention(layer_norm(f_t, p.ln_query), layer_norm(f_p, p.ln_kv), p.attn, kNoDistance);
    for (std::size_t i = 0; i < x.data().size(); ++i) x.data()[i] += f_t.data()[i];
    const Matrix y = mlp(layer_norm(x, p.ln_ffn), p.ffn);
    if (y.cols() != x.cols()) throw ShapeError("extract: FFN output width differs from stream width");
    for (std::size_t i = 0; i < x.data().size(); ++i) x.data()[i] += y.data()[i];
    return x;
}

}  // namespace rcbev
