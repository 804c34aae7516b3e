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

#include "rcbev/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rcbev/errors.hpp"
#include "rcbev/parallel.hpp"

namespace rcbev {

void MlpParams::validate() const {
    if (layers.empty()) throw ShapeError("MLP has no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (l.bias.size() != l.weight.rows())
            throw ShapeError("MLP layer " + std::to_string(k) + ": bias length " +
                             std::to_string(l.bias.size()) + " != out dim " +
                             std::to_string(l.weight.rows()));
        if (k > 0 && layers[k - 1].weight.rows() != l.weight.cols())
            throw ShapeError("MLP layer " + std::to_string(k) + " input " +
                             std::to_string(l.weight.cols()) + " does not chain with previous output " +
                             std::to_string(layers[k - 1].weight.rows()));
    }
}

std::size_t MlpParams::in_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
std::size_t MlpParams::out_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

void BatchNormParams::validate(std::size_t channels) const {
    if (scale.size() != channels || shift.size() != channels || mean.size() != channels ||
        var.size() != channels)
        throw ShapeError("batch norm parameters do not match " + std::to_string(channels) +
                         " channels");
    if (!(eps > 0.0)) throw ConfigError("batch norm epsilon must be positive");
    for (double v : var)
        if (v < 0.0) throw DataError("batch norm running variance is negative");
}

Matrix linear(const Matrix& x, const Matrix& w, std::span<const double> b) {
    if (x.cols() != w.cols())
        throw ShapeError("linear: input " + shape_string(x) + " vs weight " + shape_string(w));
    if (b.size() != w.rows())
        throw ShapeError("linear: bias length " + std::to_string(b.size()) + " vs weight " +
                         shape_string(w));
    Matrix y(x.rows(), w.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto xi = x.row(i);
        auto yi = y.row(i);
        for (std::size_t o = 0; o < w.rows(); ++o) {
            auto wo = w.row(o);
            double acc = 0.0;
            for (std::size_t c = 0; c < xi.size(); ++c) acc += wo[c] * xi[c];
            yi[o] = acc + b[o];
        }
    }
    return y;
}

Matrix relu(Matrix x) {
    for (double& v : x.data()) v = std::max(v, 0.0);
    return x;
}

Matrix mlp(const Matrix& x, const MlpParams& p) {
    p.validate();
    Matrix h = x;
    for (const auto& layer : p.layers) {
        h = linear(h, layer.weight, layer.bias);
        if (layer.relu) h = relu(std::move(h));
    }
    return h;
}

Matrix layer_norm(const Matrix& x, const NormParams& p) {
    if (p.scale.size() != x.cols() || p.shift.size() != x.cols())
        throw ShapeError("layer_norm: " + std::to_string(x.cols()) + " channels vs parameters of length " +
                         std::to_string(p.scale.size()));
    if (!(p.eps > 0.0)) throw ConfigError("layer_norm epsilon must be positive");
    Matrix y(x.rows(), x.cols());
    const double n = static_cast<double>(x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto xi = x.row(i);
        double mean = 0.0;
        for (double v : xi) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : xi) var += (v - mean) * (v - mean);
        var /= n;
        const double inv = 1.0 / std::sqrt(var + p.eps);
        auto yi = y.row(i);
        for (std::size_t c = 0; c < xi.size(); ++c)
            yi[c] = (xi[c] - mean) * inv * p.scale[c] + p.shift[c];
    }
    return y;
}

void softmax_inplace(std::span<double> v) {
    if (v.empty()) return;
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        if (!std::isfinite(x)) throw DataError("softmax: non-finite input");
        mx = std::max(mx, x);
    }
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

Matrix softmax(const Matrix& x, Axis axis) {
    Matrix y = x;
    if (axis == Axis::kRows) {
        for (std::size_t i = 0; i < y.rows(); ++i) softmax_inplace(y.row(i));
        return y;
    }
    std::vector<double> col(y.rows());
    for (std::size_t c = 0; c < y.cols(); ++c) {
        for (std::size_t r = 0; r < y.rows(); ++r) col[r] = y(r, c);
        softmax_inplace(col);
        for (std::size_t r = 0; r < y.rows(); ++r) y(r, c) = col[r];
    }
    return y;
}

std::vector<double> max_pool_points(const Matrix& x) {
    if (x.rows() == 0) throw EmptyInputError("max_pool_points: no points");
    std::vector<double> out(x.row(0).begin(), x.row(0).end());
    for (std::size_t i = 1; i < x.rows(); ++i) {
        auto xi = x.row(i);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::max(out[c], xi[c]);
    }
    return out;
}

FeatureMap conv3x3(const FeatureMap& x, const ConvParams& p, std::size_t stride, std::size_t pad) {
    if (x.channels() != p.in_channels)
        throw ShapeError("conv3x3: input has " + std::to_string(x.channels()) +
                         " channels, kernels expect " + std::to_string(p.in_channels));
    if (p.kernels.size() != p.out_channels * p.in_channels * 9 || p.bias.size() != p.out_channels)
        throw ShapeError("conv3x3: kernel/bias sizes inconsistent with channel counts");
    if (stride == 0) throw ConfigError("conv3x3: stride must be positive");
    if (x.height() == 0 || x.width() == 0) throw ShapeError("conv3x3: empty spatial extent");
    if (x.height() + 2 * pad < 3 || x.width() + 2 * pad < 3)
        throw ShapeError("conv3x3: input smaller than kernel");

    const std::size_t H = x.height(), W = x.width();
    const std::size_t out_h = (H + 2 * pad - 3) / stride + 1;
    const std::size_t out_w = (W + 2 * pad - 3) / stride + 1;
    FeatureMap y(p.out_channels, out_h, out_w);

    parallel_for(p.out_channels, [&](std::size_t o) {
        auto out = y.plane(o);
        std::fill(out.begin(), out.end(), p.bias[o]);
        for (std::size_t i = 0; i < p.in_channels; ++i) {
            auto in = x.plane(i);
            for (std::size_t ky = 0; ky < 3; ++ky) {
                for (std::size_t kx = 0; kx < 3; ++kx) {
                    const double w = p.k(o, i, ky, kx);
                    if (w == 0.0) continue;
                    for (std::size_t oy = 0; oy < out_h; ++oy) {
                        const auto iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                        static_cast<std::ptrdiff_t>(pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
                        const double* src = in.data() + static_cast<std::size_t>(iy) * W;
                        double* dst = out.data() + oy * out_w;
                        if (stride == 1) {
                            // ix = ox + kx - pad must land in [0, W).
                            const std::ptrdiff_t shift =
                                static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(pad);
                            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
                            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
                                static_cast<std::ptrdiff_t>(out_w), static_cast<std::ptrdiff_t>(W) - shift);
                            for (std::ptrdiff_t ox = lo; ox < hi; ++ox) dst[ox] += w * src[ox + shift];
                        } else {
                            for (std::size_t ox = 0; ox < out_w; ++ox) {
                                const auto ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                                static_cast<std::ptrdiff_t>(pad);
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                                dst[ox] += w * src[ix];
                            }
                        }
                    }
                }
            }
        }
    });
    return y;
}

FeatureMap batch_norm(const FeatureMap& x, const BatchNormParams& p) {
    p.validate(x.channels());
    FeatureMap y = x;
    for (std::size_t c = 0; c < x.channels(); ++c) {
        const double inv = 1.0 / std::sqrt(p.var[c] + p.eps);
        for (double& v : y.plane(c)) v = (v - p.mean[c]) * inv * p.scale[c] + p.shift[c];
    }
    return y;
}

FeatureMap relu(FeatureMap x) {
    for (double& v : x.data()) v = std::max(v, 0.0);
    return x;
}

FeatureMap conv1x1(const FeatureMap& x, const Matrix& w, std::span<const double> b) {
    if (w.cols() != x.channels())
        throw ShapeError("conv1x1: input has " + std::to_string(x.channels()) + " channels, weight is " +
                         shape_string(w));
    if (b.size() != w.rows()) throw ShapeError("conv1x1: bias length mismatch");
    FeatureMap y(w.rows(), x.height(), x.width());
    parallel_for(w.rows(), [&](std::size_t o) {
        auto out = y.plane(o);
        std::fill(out.begin(), out.end(), b[o]);
        for (std::size_t i = 0; i < x.channels(); ++i) {
            const double wi = w(o, i);
            if (wi == 0.0) continue;
            auto in = x.plane(i);
            for (std::size_t p = 0; p < out.size(); ++p) out[p] += wi * in[p];
        }
    });
    return y;
}

void bilinear_accumulate(const FeatureMap& grid, double x, double y, double weight,
                         std::span<double> out) {
    if (out.size() != grid.channels()) throw ShapeError("bilinear_accumulate: output size mismatch");
    const double H = static_cast<double>(grid.height());
    const double W = static_cast<double>(grid.width());
    if (!(x > -1.0 && y > -1.0 && x < W && y < H)) return;
    const double x0f = std::floor(x), y0f = std::floor(y);
    const double fx = x - x0f, fy = y - y0f;
    const auto x0 = static_cast<std::ptrdiff_t>(x0f);
    const auto y0 = static_cast<std::ptrdiff_t>(y0f);
    const std::ptrdiff_t corners_x[2] = {x0, x0 + 1};
    const std::ptrdiff_t corners_y[2] = {y0, y0 + 1};
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    const auto h = static_cast<std::ptrdiff_t>(grid.height());
    const auto w = static_cast<std::ptrdiff_t>(grid.width());
    for (int a = 0; a < 2; ++a) {
        const std::ptrdiff_t cy = corners_y[a];
        if (cy < 0 || cy >= h || wy[a] == 0.0) continue;
        for (int b = 0; b < 2; ++b) {
            const std::ptrdiff_t cx = corners_x[b];
            if (cx < 0 || cx >= w || wx[b] == 0.0) continue;
            const double cw = weight * wy[a] * wx[b];
            const std::size_t offset = static_cast<std::size_t>(cy * w + cx);
            for (std::size_t c = 0; c < out.size(); ++c)
                out[c] += cw * grid.data()[c * grid.plane_size() + offset];
        }
    }
}

std::vector<double> bilinear_sample(const FeatureMap& grid, double x, double y) {
    std::vector<double> out(grid.channels(), 0.0);
    bilinear_accumulate(grid, x, y, 1.0, out);
    return out;
}

}  // namespace rcbev
