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

#include <cmath>
#include <numbers>

#include "rcbev/errors.hpp"
#include "rcbev/pipeline.hpp"
#include "rcbev/random.hpp"

namespace rcbev {

BevGrid gen_camera_bev(const BevSpec& spec, std::size_t channels, std::uint64_t seed) {
    spec.validate();
    constexpr std::size_t kModes = 4;
    constexpr double kMaxFrequency = 4.0;
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    BevGrid grid(channels, spec);
    const double H = static_cast<double>(spec.height), W = static_cast<double>(spec.width);
    for (std::size_t c = 0; c < channels; ++c) {
        auto plane = grid.data.plane(c);
        for (std::size_t m = 0; m < kModes; ++m) {
            const double amp = rng.uniform(0.2, 1.0);
            // Integer frequencies, at least one non-zero, so each mode
            // integrates to zero over the grid.
            double fx = std::floor(rng.uniform(0.0, kMaxFrequency + 1.0));
            const double fy = std::floor(rng.uniform(0.0, kMaxFrequency + 1.0));
            if (fx == 0.0 && fy == 0.0) fx = 1.0;
            const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            for (std::size_t y = 0; y < spec.height; ++y)
                for (std::size_t x = 0; x < spec.width; ++x)
                    plane[y * spec.width + x] +=
                        amp * std::cos(2.0 * std::numbers::pi * (fx * static_cast<double>(x) / W +
                                                                 fy * static_cast<double>(y) / H) +
                                       phase);
        }
        double mean = 0.0;
        for (double v : plane) mean += v;
        mean /= static_cast<double>(plane.size());
        for (double& v : plane) v -= mean;
    }
    return grid;
}

}  // namespace rcbev
