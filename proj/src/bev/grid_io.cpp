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

#include "rcbev/grid_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "rcbev/errors.hpp"

namespace rcbev {
namespace {

constexpr char kMagic[4] = {'R', 'B', 'E', 'V'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 4 + 5 * 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_grid(const BevGrid& grid) {
    grid.validate();
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + grid.data.data().size() * 4);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, kGridFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(grid.data.channels()));
    put_u32(out, static_cast<std::uint32_t>(grid.data.height()));
    put_u32(out, static_cast<std::uint32_t>(grid.data.width()));
    for (double v : {grid.spec.x_min, grid.spec.x_max, grid.spec.y_min, grid.spec.y_max, grid.spec.resolution})
        put_u64(out, std::bit_cast<std::uint64_t>(v));
    for (double v : grid.data.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

BevGrid decode_grid(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kHeaderBytes || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
        throw FormatError("not a BEV grid file");
    const std::uint32_t version = get_u32(bytes.data() + 4);
    if (version != kGridFormatVersion)
        throw FormatError("unsupported BEV grid version " + std::to_string(version));
    const std::size_t c = get_u32(bytes.data() + 8);
    const std::size_t h = get_u32(bytes.data() + 12);
    const std::size_t w = get_u32(bytes.data() + 16);
    double spec_values[5];
    for (int i = 0; i < 5; ++i) spec_values[i] = std::bit_cast<double>(get_u64(bytes.data() + 20 + 8 * i));
    const BevSpec spec = BevSpec::make(spec_values[0], spec_values[1], spec_values[2], spec_values[3], spec_values[4]);
    if (spec.height != h || spec.width != w) throw FormatError("BEV grid dims disagree with its spatial spec");
    if (bytes.size() != kHeaderBytes + c * h * w * 4)
        throw FormatError("BEV grid payload size " + std::to_string(bytes.size() - kHeaderBytes) +
                          " does not match " + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w));
    BevGrid grid(c, spec);
    auto& data = grid.data.data();
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes.data() + kHeaderBytes + 4 * i)));
    grid.validate();
    return grid;
}

void save_grid(const std::filesystem::path& path, const BevGrid& grid) {
    const auto bytes = encode_grid(grid);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write BEV grid " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

BevGrid load_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open BEV grid " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_grid(bytes);
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t grid_checksum(const BevGrid& grid) { return fnv1a64(encode_grid(grid)); }

}  // namespace rcbev
