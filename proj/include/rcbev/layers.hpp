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
#include <vector>

#include "rcbev/tensor.hpp"

namespace rcbev {

struct MlpLayer {
    Matrix weight;  // out x in
    std::vector<double> bias;
    bool relu = false;
};

struct MlpParams {
    std::vector<MlpLayer> layers;

    /// Throws ShapeError unless every layer is self-consistent and
    /// consecutive layers chain.
    void validate() const;
    std::size_t in_dim() const;
    std::size_t out_dim() const;
};

/// LayerNorm affine parameters.
struct NormParams {
    std::vector<double> scale;
    std::vector<double> shift;
    double eps = 1e-5;
};

/// Inference-mode batch normalization over channels.
struct BatchNormParams {
    std::vector<double> scale;
    std::vector<double> shift;
    std::vector<double> mean;
    std::vector<double> var;
    double eps = 1e-5;

    void validate(std::size_t channels) const;
};

/// 3x3 kernels stored as [out][in][ky][kx].
struct ConvParams {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::vector<double> kernels;
    std::vector<double> bias;

    double& k(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) {
        return kernels[((o * in_channels + i) * 3 + ky) * 3 + kx];
    }
    double k(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
        return kernels[((o * in_channels + i) * 3 + ky) * 3 + kx];
    }
};

enum class Axis { kRows, kCols };

Matrix linear(const Matrix& x, const Matrix& w, std::span<const double> b);
Matrix mlp(const Matrix& x, const MlpParams& p);
Matrix relu(Matrix x);
Matrix layer_norm(const Matrix& x, const NormParams& p);

/// Softmax along `axis`: kRows normalizes each row, kCols each column.
/// Throws DataError on non-finite input.
Matrix softmax(const Matrix& x, Axis axis = Axis::kRows);
/// In-place stable softmax of one vector (max-subtracted).
void softmax_inplace(std::span<double> v);

/// Column-wise max over rows. Throws EmptyInputError for zero rows.
std::vector<double> max_pool_points(const Matrix& x);

/// Zero-padded cross-correlation with 3x3 kernels.
FeatureMap conv3x3(const FeatureMap& x, const ConvParams& p, std::size_t stride = 1,
                   std::size_t pad = 1);
FeatureMap batch_norm(const FeatureMap& x, const BatchNormParams& p);
FeatureMap relu(FeatureMap x);
/// Per-pixel linear map (1x1 convolution); w is out x in.
FeatureMap conv1x1(const FeatureMap& x, const Matrix& w, std::span<const double> b);

/// Bilinear lookup at continuous pixel coordinate (x along width, y along
/// height). Each of the four neighbouring pixel centers outside the grid
/// contributes zero.
std::vector<double> bilinear_sample(const FeatureMap& grid, double x, double y);
/// Accumulates weight * sample into out without allocating.
void bilinear_accumulate(const FeatureMap& grid, double x, double y, double weight,
                         std::span<double> out);

}  // namespace rcbev
