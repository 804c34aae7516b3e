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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcbev/tensor.hpp"

namespace rcbev {

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    std::size_t numel() const;
};

/// Named parameter store. Names are dotted paths such as
/// "stage0.tf.attn.q.weight". Every stored value is finite.
class WeightSet {
public:
    static constexpr int kFormatVersion = 1;

    /// Adds or replaces a tensor. Throws ShapeError if the shape does not
    /// cover the values and DataError on non-finite values.
    void insert(std::string name, Tensor tensor);

    bool contains(std::string_view name) const;
    const Tensor& get(std::string_view name) const;
    Tensor& get_mutable(std::string_view name);

    /// Typed views; the rank must match exactly.
    Matrix matrix(std::string_view name) const;
    std::vector<double> vector(std::string_view name) const;
    FeatureMap feature_map(std::string_view name) const;

    const std::map<std::string, Tensor, std::less<>>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    std::optional<std::uint64_t> seed;

    /// Manifest JSON text referencing `payload_name`, tensors in name order.
    std::string manifest_text(const std::string& payload_name) const;
    /// Little-endian f32 payload in manifest order.
    std::vector<std::uint8_t> payload_bytes() const;

    /// Writes `<manifest>` and its payload next to it (`<stem>.bin`).
    void save(const std::filesystem::path& manifest) const;
    static WeightSet load(const std::filesystem::path& manifest);
    static WeightSet parse(const std::string& manifest_text, const std::vector<std::uint8_t>& payload);

    friend bool operator==(const WeightSet& a, const WeightSet& b);

private:
    std::map<std::string, Tensor, std::less<>> entries_;
};

bool operator==(const Tensor& a, const Tensor& b);

}  // namespace rcbev
