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

#include <algorithm>
#include <cmath>

#include "rcbev/bev.hpp"
#include "rcbev/errors.hpp"

namespace rcbev {
namespace {

constexpr double kMinBandwidth = 1e-9;

// Half-width of the pixel window that can hold covered pixels.
long window_half_width(double radius, const BevSpec& spec) {
    const double limit = static_cast<double>(std::max(spec.height, spec.width));
    return static_cast<long>(std::min(std::ceil(radius), limit));
}

}  // namespace

void BevGrid::validate() const {
    if (data.height() != spec.height || data.width() != spec.width)
        throw ShapeError("BEV grid " + shape_string(data) + " does not match spec " + std::to_string(spec.height) +
                         "x" + std::to_string(spec.width));
    for (double v : data.data())
        if (!std::isfinite(v)) throw DataError("BEV grid holds a non-finite value");
}

void ScatterConfig::validate() const {
    if (!(radius_scale >= 0.0)) throw ConfigError("scatter radius_scale must be >= 0");
    if (!(radius_cap >= 0.0)) throw ConfigError("scatter radius_cap must be >= 0");
}

std::pair<PixelCoord, PixelIndex> to_pixel(double x, double y, const BevSpec& spec) {
    return {spec.to_continuous(x, y), spec.to_index(x, y)};
}

double scatter_radius(PixelCoord c, double v_rcs, const ScatterConfig& cfg) {
    return std::min(cfg.radius_scale * (c.u * c.u + c.v * c.v) * v_rcs, cfg.radius_cap);
}

std::vector<ScatterPoint> scatter_geometry(const Matrix& coords, std::span<const double> rcs_norm,
                                           const BevSpec& spec, const ScatterConfig& cfg) {
    cfg.validate();
    if (coords.cols() != 2 || coords.rows() != rcs_norm.size())
        throw ShapeError("scatter_geometry: coords " + shape_string(coords) + " vs " + std::to_string(rcs_norm.size()) +
                         " RCS values");
    std::vector<ScatterPoint> out;
    out.reserve(coords.rows());
    for (std::size_t i = 0; i < coords.rows(); ++i) {
        const double v = rcs_norm[i];
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("scatter_geometry: normalized RCS outside [0, 1]");
        const auto [c, p] = to_pixel(coords(i, 0), coords(i, 1), spec);
        out.push_back({c, p, v, scatter_radius(c, v, cfg)});
    }
    return out;
}

BevGrid rcs_scatter(const Matrix& features, const Matrix& coords, std::span<const double> rcs_norm,
                    const BevSpec& spec, const ScatterConfig& cfg) {
    if (features.rows() != coords.rows())
        throw ShapeError("rcs_scatter: " + std::to_string(features.rows()) + " feature rows vs " +
                         std::to_string(coords.rows()) + " coordinates");
    const auto geometry = scatter_geometry(coords, rcs_norm, spec, cfg);
    BevGrid grid(features.cols(), spec);
    const auto H = static_cast<long>(spec.height), W = static_cast<long>(spec.width);
    const std::size_t plane = grid.data.plane_size();
    auto& data = grid.data.data();
    // Sequential on purpose: each pixel must see contributions in point order.
    for (std::size_t i = 0; i < geometry.size(); ++i) {
        const auto& g = geometry[i];
        const long r = window_half_width(g.radius, spec);
        const auto px = static_cast<long>(g.pixel.px), py = static_cast<long>(g.pixel.py);
        auto f = features.row(i);
        for (long dy = -r; dy <= r; ++dy) {
            const long y = py + dy;
            if (y < 0 || y >= H) continue;
            for (long dx = -r; dx <= r; ++dx) {
                const long x = px + dx;
                if (x < 0 || x >= W || !covers(dx, dy, g.radius)) continue;
                const auto offset = static_cast<std::size_t>(y * W + x);
                for (std::size_t c = 0; c < f.size(); ++c) data[c * plane + offset] += f[c];
            }
        }
    }
    return grid;
}

double gaussian_bandwidth(PixelCoord c, double v_rcs) { return (c.u * c.u + c.v * c.v) * v_rcs / 3.0; }

BevGrid gaussian_bev_map(std::span<const ScatterPoint> points, const BevSpec& spec) {
    BevGrid grid(1, spec);
    const auto H = static_cast<long>(spec.height), W = static_cast<long>(spec.width);
    auto& data = grid.data.data();
    for (const auto& g : points) {
        const auto px = static_cast<long>(g.pixel.px), py = static_cast<long>(g.pixel.py);
        const double bw = gaussian_bandwidth(g.coord, g.v_rcs);
        if (bw < kMinBandwidth) {
            auto& cell = data[static_cast<std::size_t>(py * W + px)];
            cell = std::max(cell, 1.0);
            continue;
        }
        const long r = window_half_width(g.radius, spec);
        for (long dy = -r; dy <= r; ++dy) {
            const long y = py + dy;
            if (y < 0 || y >= H) continue;
            for (long dx = -r; dx <= r; ++dx) {
                const long x = px + dx;
                if (x < 0 || x >= W || !covers(dx, dy, g.radius)) continue;
                const double value = std::exp(-static_cast<double>(dx * dx + dy * dy) / bw);
                auto& cell = data[static_cast<std::size_t>(y * W + x)];
                cell = std::max(cell, value);
            }
        }
    }
    return grid;
}

}  // namespace rcbev
