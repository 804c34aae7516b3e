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

#include "rcbev/params.hpp"

#include <cmath>

#include "rcbev/errors.hpp"

namespace rcbev {

MlpParams read_mlp(const WeightSet& ws, const std::string& prefix, const std::vector<bool>& relu) {
    MlpParams p;
    for (std::size_t k = 0; k < relu.size(); ++k) {
        const std::string base = prefix + "." + std::to_string(k);
        p.layers.push_back({ws.matrix(base + ".weight"), ws.vector(base + ".bias"), relu[k]});
    }
    p.validate();
    return p;
}

NormParams read_layer_norm(const WeightSet& ws, const std::string& prefix) {
    NormParams p{ws.vector(prefix + ".scale"), ws.vector(prefix + ".shift"), 1e-5};
    if (p.scale.size() != p.shift.size()) throw ShapeError("layer norm '" + prefix + "' scale/shift lengths differ");
    return p;
}

BatchNormParams read_batch_norm(const WeightSet& ws, const std::string& prefix) {
    BatchNormParams p{ws.vector(prefix + ".scale"), ws.vector(prefix + ".shift"), ws.vector(prefix + ".mean"),
                      ws.vector(prefix + ".var"), 1e-5};
    p.validate(p.scale.size());
    return p;
}

ConvParams read_conv3x3(const WeightSet& ws, const std::string& prefix) {
    const auto& w = ws.get(prefix + ".weight");
    if (w.shape.size() != 4 || w.shape[2] != 3 || w.shape[3] != 3)
        throw ShapeError("conv weight '" + prefix + ".weight' must be out x in x 3 x 3");
    ConvParams p;
    p.out_channels = w.shape[0];
    p.in_channels = w.shape[1];
    p.kernels = w.values;
    p.bias = ws.vector(prefix + ".bias");
    if (p.bias.size() != p.out_channels) throw ShapeError("conv bias '" + prefix + ".bias' length mismatch");
    return p;
}

void WeightBuilder::uniform(const std::string& name, std::vector<std::size_t> shape, std::size_t fan_in,
                            std::size_t fan_out) {
    if (fan_in + fan_out == 0) throw ConfigError("weight '" + name + "' has zero fan");
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t{std::move(shape), {}};
    t.values.resize(t.numel());
    for (double& v : t.values) v = static_cast<double>(static_cast<float>(a * (2.0 * rng_.uniform() - 1.0)));
    ws_.insert(name, std::move(t));
}

void WeightBuilder::constant(const std::string& name, std::vector<std::size_t> shape, double value) {
    Tensor t{std::move(shape), {}};
    t.values.assign(t.numel(), static_cast<double>(static_cast<float>(value)));
    ws_.insert(name, std::move(t));
}

void WeightBuilder::linear(const std::string& prefix, std::size_t in, std::size_t out) {
    if (in == 0 || out == 0) throw ConfigError("layer '" + prefix + "' has a zero dimension");
    uniform(prefix + ".weight", {out, in}, in, out);
    constant(prefix + ".bias", {out}, 0.0);
}

void WeightBuilder::mlp(const std::string& prefix, const std::vector<std::size_t>& dims) {
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) linear(prefix + "." + std::to_string(k), dims[k], dims[k + 1]);
}

void WeightBuilder::layer_norm(const std::string& prefix, std::size_t channels) {
    if (channels == 0) throw ConfigError("layer norm '" + prefix + "' has zero channels");
    constant(prefix + ".scale", {channels}, 1.0);
    constant(prefix + ".shift", {channels}, 0.0);
}

void WeightBuilder::batch_norm(const std::string& prefix, std::size_t channels) {
    if (channels == 0) throw ConfigError("batch norm '" + prefix + "' has zero channels");
    constant(prefix + ".scale", {channels}, 1.0);
    constant(prefix + ".shift", {channels}, 0.0);
    constant(prefix + ".mean", {channels}, 0.0);
    constant(prefix + ".var", {channels}, 1.0);
}

void WeightBuilder::conv3x3(const std::string& prefix, std::size_t in, std::size_t out) {
    if (in == 0 || out == 0) throw ConfigError("conv '" + prefix + "' has a zero dimension");
    uniform(prefix + ".weight", {out, in, 3, 3}, in * 9, out * 9);
    constant(prefix + ".bias", {out}, 0.0);
}

}  // namespace rcbev
