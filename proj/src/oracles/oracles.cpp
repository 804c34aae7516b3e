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

#include "rcbev/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcbev/errors.hpp"

namespace rcbev::oracle {
namespace {

std::vector<double> softmax(std::vector<double> logits) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double l : logits) mx = std::max(mx, l);
    double sum = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        sum += l;
    }
    for (double& l : logits) l /= sum;
    return logits;
}

Matrix add(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
    return out;
}

Matrix attention_impl(const Matrix& query, const Matrix& kv, const AttentionParams& p, const Matrix& coords,
                      bool modulated) {
    const Matrix q = oracle::linear(query, p.wq, p.bq);
    const Matrix k = oracle::linear(kv, p.wk, p.bk);
    const Matrix v = oracle::linear(kv, p.wv, p.bv);
    const std::size_t c = q.cols(), d = c / p.heads;
    Matrix d2;
    if (modulated) d2 = oracle::sq_dist(coords);
    Matrix concat(query.rows(), c);
    for (std::size_t h = 0; h < p.heads; ++h) {
        for (std::size_t i = 0; i < q.rows(); ++i) {
            std::vector<double> logits(k.rows());
            for (std::size_t j = 0; j < k.rows(); ++j) {
                double dot = 0.0;
                for (std::size_t t = 0; t < d; ++t) dot += q(i, h * d + t) * k(j, h * d + t);
                logits[j] = dot / std::sqrt(static_cast<double>(d));
                if (modulated) logits[j] -= p.beta[h] * d2(i, j);
            }
            const auto a = softmax(logits);
            for (std::size_t t = 0; t < d; ++t) {
                double acc = 0.0;
                for (std::size_t j = 0; j < k.rows(); ++j) acc += a[j] * v(j, h * d + t);
                concat(i, h * d + t) = acc;
            }
        }
    }
    return oracle::linear(concat, p.wo, p.bo);
}

}  // namespace

Matrix linear(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix y(x.rows(), w.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t o = 0; o < w.rows(); ++o) {
            double acc = b[o];
            for (std::size_t c = 0; c < w.cols(); ++c) acc += x(i, c) * w(o, c);
            y(i, o) = acc;
        }
    return y;
}

Matrix mlp(const Matrix& x, const MlpParams& p) {
    Matrix h = x;
    for (const auto& layer : p.layers) {
        h = oracle::linear(h, layer.weight, layer.bias);
        if (layer.relu)
            for (double& v : h.data()) v = v > 0.0 ? v : 0.0;
    }
    return h;
}

Matrix layer_norm(const Matrix& x, const NormParams& p) {
    Matrix y(x.rows(), x.cols());
    const double n = static_cast<double>(x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) sum += x(i, c);
        const double mean = sum / n;
        for (std::size_t c = 0; c < x.cols(); ++c) sq += (x(i, c) - mean) * (x(i, c) - mean);
        const double sd = std::sqrt(sq / n + p.eps);
        for (std::size_t c = 0; c < x.cols(); ++c) y(i, c) = p.scale[c] * (x(i, c) - mean) / sd + p.shift[c];
    }
    return y;
}

std::vector<double> column_max(const Matrix& x) {
    std::vector<double> out(x.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < x.cols(); ++c)
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (x(i, c) > out[c]) out[c] = x(i, c);
    return out;
}

FeatureMap conv3x3(const FeatureMap& x, const ConvParams& p) {
    const auto H = static_cast<long>(x.height()), W = static_cast<long>(x.width());
    FeatureMap y(p.out_channels, x.height(), x.width());
    for (std::size_t o = 0; o < p.out_channels; ++o)
        for (long r = 0; r < H; ++r)
            for (long c = 0; c < W; ++c) {
                double acc = p.bias[o];
                for (std::size_t i = 0; i < p.in_channels; ++i)
                    for (long ky = 0; ky < 3; ++ky)
                        for (long kx = 0; kx < 3; ++kx) {
                            const long iy = r + ky - 1, ix = c + kx - 1;
                            if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                            acc += p.k(o, i, static_cast<std::size_t>(ky), static_cast<std::size_t>(kx)) *
                                   x.at(i, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
                        }
                y.at(o, static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
            }
    return y;
}

FeatureMap batch_norm(const FeatureMap& x, const BatchNormParams& p) {
    FeatureMap y(x.channels(), x.height(), x.width());
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::size_t r = 0; r < x.height(); ++r)
            for (std::size_t w = 0; w < x.width(); ++w)
                y.at(c, r, w) = p.scale[c] * (x.at(c, r, w) - p.mean[c]) / std::sqrt(p.var[c] + p.eps) + p.shift[c];
    return y;
}

FeatureMap cbr(const FeatureMap& x, const ConvBnParams& p) {
    FeatureMap y = oracle::batch_norm(oracle::conv3x3(x, p.conv), p.bn);
    for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
    return y;
}

FeatureMap pixel_linear(const FeatureMap& x, const Matrix& w, const std::vector<double>& b) {
    FeatureMap y(w.rows(), x.height(), x.width());
    for (std::size_t r = 0; r < x.height(); ++r)
        for (std::size_t c = 0; c < x.width(); ++c)
            for (std::size_t o = 0; o < w.rows(); ++o) {
                double acc = b[o];
                for (std::size_t i = 0; i < w.cols(); ++i) acc += w(o, i) * x.at(i, r, c);
                y.at(o, r, c) = acc;
            }
    return y;
}

std::vector<double> bilinear(const FeatureMap& grid, double x, double y) {
    std::vector<double> out(grid.channels(), 0.0);
    const double x0 = std::floor(x), y0 = std::floor(y);
    struct Corner {
        double cx, cy, w;
    };
    const Corner corners[4] = {{x0, y0, (x0 + 1 - x) * (y0 + 1 - y)},
                               {x0 + 1, y0, (x - x0) * (y0 + 1 - y)},
                               {x0, y0 + 1, (x0 + 1 - x) * (y - y0)},
                               {x0 + 1, y0 + 1, (x - x0) * (y - y0)}};
    for (const auto& k : corners) {
        if (k.cx < 0 || k.cy < 0 || k.cx > static_cast<double>(grid.width()) - 1 ||
            k.cy > static_cast<double>(grid.height()) - 1)
            continue;
        for (std::size_t c = 0; c < grid.channels(); ++c)
            out[c] += k.w * grid.at(c, static_cast<std::size_t>(k.cy), static_cast<std::size_t>(k.cx));
    }
    return out;
}

Matrix sq_dist(const Matrix& coords) {
    Matrix d(coords.rows(), coords.rows());
    for (std::size_t i = 0; i < coords.rows(); ++i)
        for (std::size_t j = 0; j < coords.rows(); ++j) {
            const double dx = coords(i, 0) - coords(j, 0), dy = coords(i, 1) - coords(j, 1);
            d(i, j) = dx * dx + dy * dy;
        }
    return d;
}

Matrix attention(const Matrix& query, const Matrix& kv, const AttentionParams& p, const Matrix& coords) {
    return attention_impl(query, kv, p, coords, !p.beta.empty());
}

Matrix vanilla_attention(const Matrix& query, const Matrix& kv, const AttentionParams& p) {
    return attention_impl(query, kv, p, Matrix{}, false);
}

Matrix point_block(const Matrix& f, const MlpParams& p) {
    const Matrix g = oracle::mlp(f, p);
    const auto pooled = oracle::column_max(g);
    Matrix out(g.rows(), 2 * g.cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t c = 0; c < g.cols(); ++c) {
            out(i, c) = g(i, c);
            out(i, g.cols() + c) = pooled[c];
        }
    return out;
}

Matrix transformer_block(const Matrix& f, const Matrix& coords, const TransformerBlockParams& p) {
    const Matrix n1 = oracle::layer_norm(f, p.ln_attn);
    const Matrix x = add(f, oracle::attention(n1, n1, p.attn, coords));
    return add(x, oracle::mlp(oracle::layer_norm(x, p.ln_ffn), p.ffn));
}

Matrix inject(const Matrix& f_p, const Matrix& f_t, const InjectionParams& p) {
    const Matrix a = oracle::vanilla_attention(oracle::layer_norm(f_p, p.ln_query), oracle::layer_norm(f_t, p.ln_kv), p.attn);
    Matrix out = f_p;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t c = 0; c < out.cols(); ++c) out(i, c) += p.gamma[c] * a(i, c);
    return out;
}

Matrix extract(const Matrix& f_t, const Matrix& f_p, const ExtractionParams& p) {
    const Matrix x = add(f_t, oracle::vanilla_attention(oracle::layer_norm(f_t, p.ln_query), oracle::layer_norm(f_p, p.ln_kv), p.attn));
    return add(x, oracle::mlp(oracle::layer_norm(x, p.ln_ffn), p.ffn));
}

BackboneOutput backbone(const PointFeatureSet& feats, const BackboneParams& p) {
    Matrix f_p = feats.features, f_t = feats.features;
    for (const auto& st : p.stages) {
        Matrix next_p = oracle::point_block(f_p, st.point);
        Matrix next_t = oracle::transformer_block(oracle::linear(f_t, st.tf_in_w, st.tf_in_b), feats.coords, st.tf);
        next_p = oracle::inject(next_p, next_t, st.inject);
        next_t = oracle::extract(next_t, next_p, st.extract);
        f_p = std::move(next_p);
        f_t = std::move(next_t);
    }
    Matrix joined(f_p.rows(), f_p.cols() + f_t.cols());
    for (std::size_t i = 0; i < f_p.rows(); ++i) {
        for (std::size_t c = 0; c < f_p.cols(); ++c) joined(i, c) = f_p(i, c);
        for (std::size_t c = 0; c < f_t.cols(); ++c) joined(i, f_p.cols() + c) = f_t(i, c);
    }
    return {f_p, f_t, oracle::linear(joined, p.merge_w, p.merge_b)};
}

BevGrid scatter(const Matrix& features, const Matrix& coords, std::span<const double> rcs_norm,
                const BevSpec& spec, const ScatterConfig& cfg) {
    const std::size_t n = features.rows();
    std::vector<long> px(n), py(n);
    std::vector<double> radius(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (coords(i, 0) - spec.x_min) / spec.resolution;
        const double v = (coords(i, 1) - spec.y_min) / spec.resolution;
        px[i] = std::min(static_cast<long>(std::floor(u)), static_cast<long>(spec.width) - 1);
        py[i] = std::min(static_cast<long>(std::floor(v)), static_cast<long>(spec.height) - 1);
        radius[i] = std::min(cfg.radius_scale * (u * u + v * v) * rcs_norm[i], cfg.radius_cap);
    }
    BevGrid grid(features.cols(), spec);
    for (long y = 0; y < static_cast<long>(spec.height); ++y)
        for (long x = 0; x < static_cast<long>(spec.width); ++x)
            for (std::size_t i = 0; i < n; ++i) {
                const long dx = x - px[i], dy = y - py[i];
                const bool own = dx == 0 && dy == 0;
                if (!own && !(static_cast<double>(dx * dx + dy * dy) < radius[i] * radius[i])) continue;
                for (std::size_t c = 0; c < features.cols(); ++c)
                    grid.data.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) += features(i, c);
            }
    return grid;
}

BevGrid bev_encode(const BevGrid& f_rcs_prime, const BevGrid& base, const BevEncoderParams& p) {
    const std::size_t ca = f_rcs_prime.channels(), cb = base.channels();
    FeatureMap x(ca + cb, f_rcs_prime.data.height(), f_rcs_prime.data.width());
    for (std::size_t r = 0; r < x.height(); ++r)
        for (std::size_t c = 0; c < x.width(); ++c) {
            for (std::size_t k = 0; k < ca; ++k) x.at(k, r, c) = f_rcs_prime.data.at(k, r, c);
            for (std::size_t k = 0; k < cb; ++k) x.at(ca + k, r, c) = base.data.at(k, r, c);
        }
    if (p.blocks.empty()) return {x, f_rcs_prime.spec};
    if (p.has_projection) x = oracle::pixel_linear(x, p.proj_w, p.proj_b);
    for (const auto& block : p.blocks) {
        const FeatureMap y = oracle::cbr(x, block);
        for (std::size_t i = 0; i < x.data().size(); ++i) x.data()[i] += y.data()[i];
    }
    return {x, f_rcs_prime.spec};
}

namespace {

std::vector<double> query_vector(const FeatureMap& queries, const DeformAttnParams& p, std::size_t r, std::size_t c) {
    std::vector<double> z(queries.channels());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = queries.at(k, r, c);
    if (!p.has_query_proj) return z;
    std::vector<double> projected(p.query_proj_w.rows());
    for (std::size_t o = 0; o < projected.size(); ++o) {
        double acc = p.query_proj_b[o];
        for (std::size_t k = 0; k < z.size(); ++k) acc += p.query_proj_w(o, k) * z[k];
        projected[o] = acc;
    }
    return projected;
}

double dot_row(const Matrix& w, std::size_t row, const std::vector<double>& z) {
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) acc += w(row, k) * z[k];
    return acc;
}

std::vector<double> head_weights(const DeformAttnParams& p, const std::vector<double>& z, std::size_t m) {
    std::vector<double> logits(p.points);
    for (std::size_t k = 0; k < p.points; ++k) logits[k] = dot_row(p.attn_w, m * p.points + k, z) + p.attn_b[m * p.points + k];
    return softmax(logits);
}

}  // namespace

FeatureMap deform_attn(const FeatureMap& queries, const FeatureMap& values, const DeformAttnParams& p) {
    const std::size_t cv = p.value_w.rows(), d = cv / p.heads;
    FeatureMap out(cv, queries.height(), queries.width());
    for (std::size_t r = 0; r < queries.height(); ++r)
        for (std::size_t c = 0; c < queries.width(); ++c) {
            const auto z = query_vector(queries, p, r, c);
            std::vector<double> result(cv, 0.0);
            for (std::size_t m = 0; m < p.heads; ++m) {
                const auto a = head_weights(p, z, m);
                std::vector<double> head(d, 0.0);
                for (std::size_t k = 0; k < p.points; ++k) {
                    const std::size_t idx = m * p.points + k;
                    const double dx = dot_row(p.offset_w, 2 * idx, z) + p.offset_b[2 * idx];
                    const double dy = dot_row(p.offset_w, 2 * idx + 1, z) + p.offset_b[2 * idx + 1];
                    const auto sample = oracle::bilinear(values, static_cast<double>(c) + dx, static_cast<double>(r) + dy);
                    for (std::size_t j = 0; j < d; ++j) {
                        double projected = 0.0;
                        for (std::size_t t = 0; t < cv; ++t) projected += p.value_w(m * d + j, t) * sample[t];
                        head[j] += a[k] * projected;
                    }
                }
                for (std::size_t o = 0; o < cv; ++o)
                    for (std::size_t j = 0; j < d; ++j) result[o] += p.output_w(o, m * d + j) * head[j];
            }
            for (std::size_t o = 0; o < cv; ++o) out.at(o, r, c) = result[o];
        }
    return out;
}

std::vector<double> deform_weight_sums(const FeatureMap& queries, const DeformAttnParams& p) {
    // Recomputed through the production sampling plan: the check is on the
    // plan's normalization, not on an independent route.
    const DeformSampling plan = deform_sampling(queries, p);
    std::vector<double> sums;
    for (std::size_t q = 0; q < plan.weights.rows(); ++q)
        for (std::size_t m = 0; m < p.heads; ++m) {
            double s = 0.0;
            for (std::size_t k = 0; k < p.points; ++k) s += plan.weights(q, m * p.points + k);
            sums.push_back(s);
        }
    return sums;
}

BevGrid channel_spatial_fuse(const BevGrid& camera, const BevGrid& radar, const CamfParams& p) {
    const std::size_t cc = camera.channels(), cr = radar.channels();
    FeatureMap multi(cc + cr, camera.data.height(), camera.data.width());
    for (std::size_t r = 0; r < multi.height(); ++r)
        for (std::size_t c = 0; c < multi.width(); ++c) {
            for (std::size_t k = 0; k < cc; ++k) multi.at(k, r, c) = camera.data.at(k, r, c);
            for (std::size_t k = 0; k < cr; ++k) multi.at(cc + k, r, c) = radar.data.at(k, r, c);
        }
    FeatureMap y = oracle::cbr(multi, p.fuse_in);
    const FeatureMap skip = p.has_projection ? pixel_linear(multi, p.proj_w, p.proj_b) : multi;
    for (std::size_t i = 0; i < y.data().size(); ++i) y.data()[i] += skip.data()[i];
    for (const auto& block : p.fuse_blocks) y = oracle::cbr(y, block);
    return {y, camera.spec};
}

FeatureMap dense_cross_attention(const FeatureMap& queries, const FeatureMap& values, const DenseCrossParams& p) {
    const std::size_t n = queries.plane_size(), c = p.wq.rows(), d = c / p.heads;
    // Token-major projections: row = pixel.
    auto project = [&](const FeatureMap& f, const Matrix& w) {
        std::vector<double> out(n * c, 0.0);
        for (std::size_t o = 0; o < c; ++o)
            for (std::size_t i = 0; i < f.channels(); ++i) {
                const double wi = w(o, i);
                auto plane = f.plane(i);
                for (std::size_t t = 0; t < n; ++t) out[t * c + o] += wi * plane[t];
            }
        return out;
    };
    const auto q = project(queries, p.wq);
    const auto k = project(values, p.wk);
    const auto v = project(values, p.wv);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    std::vector<double> concat(n * c, 0.0);
    std::vector<double> logits(n);
    for (std::size_t h = 0; h < p.heads; ++h)
        for (std::size_t i = 0; i < n; ++i) {
            const double* qi = &q[i * c + h * d];
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                const double* kj = &k[j * c + h * d];
                double dot = 0.0;
                for (std::size_t t = 0; t < d; ++t) dot += qi[t] * kj[t];
                logits[j] = dot * scale;
                mx = std::max(mx, logits[j]);
            }
            double sum = 0.0;
            for (double& l : logits) {
                l = std::exp(l - mx);
                sum += l;
            }
            double* out = &concat[i * c + h * d];
            for (std::size_t j = 0; j < n; ++j) {
                const double a = logits[j] / sum;
                const double* vj = &v[j * c + h * d];
                for (std::size_t t = 0; t < d; ++t) out[t] += a * vj[t];
            }
        }
    FeatureMap result(c, queries.height(), queries.width());
    for (std::size_t o = 0; o < c; ++o)
        for (std::size_t t = 0; t < n; ++t) {
            double acc = 0.0;
            for (std::size_t i = 0; i < c; ++i) acc += p.wo(o, i) * concat[t * c + i];
            result.data()[o * n + t] = acc;
        }
    return result;
}

}  // namespace rcbev::oracle
