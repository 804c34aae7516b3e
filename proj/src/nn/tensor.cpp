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

#include "rcbev/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "rcbev/errors.hpp"

namespace rcbev {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw ShapeError("matrix data size " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw ShapeError("ragged rows in Matrix::from_rows");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("hconcat row mismatch: " + shape_string(a) + " vs " + shape_string(b));
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto dst = out.row(r);
        std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
        std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return out;
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
    if (a.height() != b.height() || a.width() != b.width())
        throw ShapeError("concat_channels spatial mismatch: " + shape_string(a) + " vs " +
                         shape_string(b));
    FeatureMap out(a.channels() + b.channels(), a.height(), a.width());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(a.data().size()));
    return out;
}

Matrix pixels_as_rows(const FeatureMap& f) {
    Matrix m(f.plane_size(), f.channels());
    for (std::size_t c = 0; c < f.channels(); ++c) {
        auto plane = f.plane(c);
        for (std::size_t p = 0; p < plane.size(); ++p) m(p, c) = plane[p];
    }
    return m;
}

FeatureMap rows_as_pixels(const Matrix& m, std::size_t height, std::size_t width) {
    if (m.rows() != height * width)
        throw ShapeError("rows_as_pixels: " + shape_string(m) + " does not cover " +
                         std::to_string(height) + "x" + std::to_string(width));
    FeatureMap f(m.cols(), height, width);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        auto plane = f.plane(c);
        for (std::size_t p = 0; p < plane.size(); ++p) plane[p] = m(p, c);
    }
    return f;
}

Matrix permute_rows(const Matrix& m, std::span<const std::size_t> perm) {
    if (perm.size() != m.rows()) throw ShapeError("permutation length does not match row count");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        auto src = m.row(perm[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("max_abs_diff: " + shape_string(a) + " vs " + shape_string(b));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
    if (!a.same_shape(b))
        throw ShapeError("max_abs_diff: " + shape_string(a) + " vs " + shape_string(b));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

double order_invariant_sum(std::span<double> terms) {
    std::sort(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
}

std::string shape_string(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::string shape_string(const FeatureMap& f) {
    return std::to_string(f.channels()) + "x" + std::to_string(f.height()) + "x" +
           std::to_string(f.width());
}

}  // namespace rcbev
