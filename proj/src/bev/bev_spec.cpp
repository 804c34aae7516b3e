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

#include "rcbev/bev_spec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rcbev/errors.hpp"

namespace rcbev {
namespace {

std::size_t exact_cells(double lo, double hi, double res, const char* axis) {
    const double cells = (hi - lo) / res;
    const double rounded = std::round(cells);
    if (!(rounded >= 1.0) || std::abs(cells - rounded) > 1e-9)
        throw ConfigError(std::string("BEV extent along ") + axis + " is not a positive multiple of the resolution");
    return static_cast<std::size_t>(rounded);
}

}  // namespace

BevSpec BevSpec::make(double x_min, double x_max, double y_min, double y_max, double resolution) {
    if (!(resolution > 0.0)) throw ConfigError("BEV resolution must be positive");
    BevSpec s;
    s.x_min = x_min;
    s.x_max = x_max;
    s.y_min = y_min;
    s.y_max = y_max;
    s.resolution = resolution;
    s.width = exact_cells(x_min, x_max, resolution, "x");
    s.height = exact_cells(y_min, y_max, resolution, "y");
    return s;
}

void BevSpec::validate() const {
    if (!(resolution > 0.0)) throw ConfigError("BEV resolution must be positive");
    if (exact_cells(x_min, x_max, resolution, "x") != width)
        throw ConfigError("BEV width does not match (x_max - x_min) / resolution");
    if (exact_cells(y_min, y_max, resolution, "y") != height)
        throw ConfigError("BEV height does not match (y_max - y_min) / resolution");
}

bool BevSpec::contains(double x, double y) const noexcept {
    return x >= x_min && x < x_max && y >= y_min && y < y_max;
}

PixelCoord BevSpec::to_continuous(double x, double y) const {
    if (!contains(x, y))
        throw ContractError("point (" + std::to_string(x) + ", " + std::to_string(y) + ") lies outside the BEV ROI");
    return {(x - x_min) / resolution, (y - y_min) / resolution};
}

PixelIndex BevSpec::to_index(double x, double y) const {
    const PixelCoord c = to_continuous(x, y);
    // Rounding in the division can push a point just below x_max onto W.
    const auto px = std::min(static_cast<std::size_t>(std::floor(c.u)), width - 1);
    const auto py = std::min(static_cast<std::size_t>(std::floor(c.v)), height - 1);
    return {px, py};
}

}  // namespace rcbev
