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

namespace rcbev {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    /// Builds a matrix from nested rows; all rows must have equal length.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    Matrix transpose() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Channel-major C x H x W array of doubles.
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0)
        : channels_(channels), height_(height), width_(width),
          data_(channels * height * width, fill) {}

    std::size_t channels() const noexcept { return channels_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept { return height_ * width_; }

    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * height_ + y) * width_ + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * height_ + y) * width_ + x];
    }

    std::span<double> plane(std::size_t c) { return {data_.data() + c * plane_size(), plane_size()}; }
    std::span<const double> plane(std::size_t c) const {
        return {data_.data() + c * plane_size(), plane_size()};
    }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool same_shape(const FeatureMap& other) const noexcept {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// Concatenates matrices with equal row counts along columns.
Matrix hconcat(const Matrix& a, const Matrix& b);

/// Stacks feature maps with equal H, W along the channel axis.
FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);

/// Per-pixel channel vectors as an (H*W) x C matrix, and the inverse.
Matrix pixels_as_rows(const FeatureMap& f);
FeatureMap rows_as_pixels(const Matrix& m, std::size_t height, std::size_t width);

/// Reorders rows: out.row(i) = m.row(perm[i]).
Matrix permute_rows(const Matrix& m, std::span<const std::size_t> perm);

double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(const FeatureMap& a, const FeatureMap& b);

/// Sum whose result depends only on the multiset of terms, not their order.
/// Terms are sorted before accumulation; the span is reordered in place.
double order_invariant_sum(std::span<double> terms);

std::string shape_string(const Matrix& m);
std::string shape_string(const FeatureMap& f);

}  // namespace rcbev
