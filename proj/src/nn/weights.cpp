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

#include "rcbev/weights.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "rcbev/errors.hpp"

namespace rcbev {
namespace {

constexpr const char* kFormatName = "rcbev-weights";

void check_finite(std::string_view name, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw DataError("tensor '" + std::string(name) + "' has non-finite value at index " +
                            std::to_string(i));
}

std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

double get_f32(const std::uint8_t* p) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace

std::size_t Tensor::numel() const { return product(shape); }

bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape == b.shape && a.values == b.values;
}

bool operator==(const WeightSet& a, const WeightSet& b) {
    return a.seed == b.seed && a.entries_ == b.entries_;
}

void WeightSet::insert(std::string name, Tensor tensor) {
    if (name.empty()) throw ConfigError("tensor name must not be empty");
    if (tensor.numel() != tensor.values.size())
        throw ShapeError("tensor '" + name + "': shape covers " + std::to_string(tensor.numel()) +
                         " values but " + std::to_string(tensor.values.size()) + " were given");
    check_finite(name, tensor.values);
    entries_.insert_or_assign(std::move(name), std::move(tensor));
}

bool WeightSet::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

const Tensor& WeightSet::get(std::string_view name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw LookupError("missing weight '" + std::string(name) + "'");
    return it->second;
}

Tensor& WeightSet::get_mutable(std::string_view name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw LookupError("missing weight '" + std::string(name) + "'");
    return it->second;
}

Matrix WeightSet::matrix(std::string_view name) const {
    const auto& t = get(name);
    if (t.shape.size() != 2)
        throw ShapeError("weight '" + std::string(name) + "' is rank " + std::to_string(t.shape.size()) +
                         ", expected a matrix");
    return Matrix(t.shape[0], t.shape[1], t.values);
}

std::vector<double> WeightSet::vector(std::string_view name) const {
    const auto& t = get(name);
    if (t.shape.size() != 1)
        throw ShapeError("weight '" + std::string(name) + "' is rank " + std::to_string(t.shape.size()) +
                         ", expected a vector");
    return t.values;
}

FeatureMap WeightSet::feature_map(std::string_view name) const {
    const auto& t = get(name);
    if (t.shape.size() != 3)
        throw ShapeError("weight '" + std::string(name) + "' is rank " + std::to_string(t.shape.size()) +
                         ", expected CxHxW");
    FeatureMap f(t.shape[0], t.shape[1], t.shape[2]);
    f.data() = t.values;
    return f;
}

std::string WeightSet::manifest_text(const std::string& payload_name) const {
    nlohmann::ordered_json doc;
    doc["format"] = kFormatName;
    doc["format_version"] = kFormatVersion;
    doc["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    doc["payload"] = payload_name;
    auto tensors = nlohmann::ordered_json::array();
    std::size_t offset = 0;
    for (const auto& [name, t] : entries_) {
        nlohmann::ordered_json e;
        e["name"] = name;
        e["shape"] = t.shape;
        e["dtype"] = "f32";
        e["byte_offset"] = offset;
        e["byte_length"] = t.values.size() * 4;
        offset += t.values.size() * 4;
        tensors.push_back(std::move(e));
    }
    doc["tensors"] = std::move(tensors);
    return doc.dump(2) + "\n";
}

std::vector<std::uint8_t> WeightSet::payload_bytes() const {
    std::vector<std::uint8_t> out;
    for (const auto& [name, t] : entries_)
        for (double v : t.values) put_f32(out, v);
    return out;
}

void WeightSet::save(const std::filesystem::path& manifest) const {
    auto payload_path = manifest;
    payload_path.replace_extension(".bin");
    {
        std::ofstream m(manifest, std::ios::binary);
        if (!m) throw FormatError("cannot write weight manifest " + manifest.string());
        m << manifest_text(payload_path.filename().string());
    }
    const auto bytes = payload_bytes();
    std::ofstream p(payload_path, std::ios::binary);
    if (!p) throw FormatError("cannot write weight payload " + payload_path.string());
    p.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

WeightSet WeightSet::parse(const std::string& manifest_text, const std::vector<std::uint8_t>& payload) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(manifest_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("weight manifest is not valid JSON: ") + e.what());
    }
    try {
        if (doc.value("format", std::string{}) != kFormatName)
            throw FormatError("weight manifest: unexpected format tag");
        const int version = doc.at("format_version").get<int>();
        if (version != kFormatVersion)
            throw FormatError("weight manifest: unsupported format_version " + std::to_string(version));

        WeightSet ws;
        if (doc.contains("seed") && !doc["seed"].is_null()) ws.seed = doc["seed"].get<std::uint64_t>();

        for (const auto& e : doc.at("tensors")) {
            const auto name = e.at("name").get<std::string>();
            if (e.at("dtype").get<std::string>() != "f32")
                throw FormatError("tensor '" + name + "': only dtype f32 is supported");
            Tensor t;
            t.shape = e.at("shape").get<std::vector<std::size_t>>();
            const auto offset = e.at("byte_offset").get<std::size_t>();
            const auto length = e.at("byte_length").get<std::size_t>();
            if (length != t.numel() * 4)
                throw FormatError("tensor '" + name + "': shape declares " + std::to_string(t.numel()) +
                                  " f32 values but byte_length is " + std::to_string(length));
            if (offset > payload.size() || payload.size() - offset < length)
                throw FormatError("tensor '" + name + "': byte range exceeds payload size " +
                                  std::to_string(payload.size()));
            t.values.resize(t.numel());
            for (std::size_t i = 0; i < t.values.size(); ++i)
                t.values[i] = get_f32(payload.data() + offset + 4 * i);
            ws.insert(name, std::move(t));
        }
        return ws;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("weight manifest: ") + e.what());
    }
}

WeightSet WeightSet::load(const std::filesystem::path& manifest) {
    std::ifstream m(manifest, std::ios::binary);
    if (!m) throw FormatError("cannot open weight manifest " + manifest.string());
    std::stringstream text;
    text << m.rdbuf();

    std::string payload_name;
    try {
        payload_name = nlohmann::json::parse(text.str()).at("payload").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("weight manifest: ") + e.what());
    }
    const auto payload_path = manifest.parent_path() / payload_name;
    std::ifstream p(payload_path, std::ios::binary);
    if (!p) throw FormatError("cannot open weight payload " + payload_path.string());
    std::vector<std::uint8_t> payload((std::istreambuf_iterator<char>(p)), std::istreambuf_iterator<char>());
    return parse(text.str(), payload);
}

}  // namespace rcbev
