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
#include <vector>

#include "rcbev/bev.hpp"

namespace rcbev {

// BEV grid file: "RBEV" magic, u32 version, u32 C, H, W, then x_min, x_max,
// y_min, y_max, resolution as f64, then C*H*W f32 in channel-major,
// row-major order. All little-endian.
inline constexpr std::uint32_t kGridFormatVersion = 1;

std::vector<std::uint8_t> encode_grid(const BevGrid& grid);
BevGrid decode_grid(const std::vector<std::uint8_t>& bytes);

void save_grid(const std::filesystem::path& path, const BevGrid& grid);
BevGrid load_grid(const std::filesystem::path& path);

/// FNV-1a 64 over the encoded file bytes.
std::uint64_t grid_checksum(const BevGrid& grid);
std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes);

}  // namespace rcbev
