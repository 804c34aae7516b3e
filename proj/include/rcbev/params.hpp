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

#include <cstdint>
#include <string>
#include <vector>

#include "rcbev/layers.hpp"
#include "rcbev/random.hpp"
#include "rcbev/weights.hpp"

namespace rcbev {

// Readers that assemble layer parameters from a WeightSet under a dotted
// prefix. Missing tensors raise LookupError.
MlpParams read_mlp(const WeightSet& ws, const std::string& prefix, const std::vector<bool>& relu);
NormParams read_layer_norm(const WeightSet& ws, const std::string& prefix);
BatchNormParams read_batch_norm(const WeightSet& ws, const std::string& prefix);
ConvParams read_conv3x3(const WeightSet& ws, const std::string& prefix);

/// Deterministic parameter initializer. Weights are drawn uniformly from
/// [-a, a] with a = sqrt(6 / (fan_in + fan_out)) and rounded to f32 so a
/// save/load cycle is bit-exact.
class WeightBuilder {
public:
    explicit WeightBuilder(std::uint64_t seed) : rng_(seed) { ws_.seed = seed; }

    void uniform(const std::string& name, std::vector<std::size_t> shape, std::size_t fan_in,
                 std::size_t fan_out);
    void constant(const std::string& name, std::vector<std::size_t> shape, double value);

    void linear(const std::string& prefix, std::size_t in, std::size_t out);
    void mlp(const std::string& prefix, const std::vector<std::size_t>& dims);
    void layer_norm(const std::string& prefix, std::size_t channels);
    void batch_norm(const std::string& prefix, std::size_t channels);
    void conv3x3(const std::string& prefix, std::size_t in, std::size_t out);

    WeightSet finish() && { return std::move(ws_); }

private:
    WeightSet ws_;
    Rng rng_;
};

}  // namespace rcbev
