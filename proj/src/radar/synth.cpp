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

#include "rcbev/random.hpp"
#include "rcbev/radar.hpp"

namespace rcbev {

SynthScene synth_scene(const SceneConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    SynthScene scene;
    scene.cloud.frame_id = "synth-" + std::to_string(seed);
    scene.cloud.compensated = true;

    const double deg = std::numbers::pi / 180.0;
    for (std::size_t k = 0; k < config.n_clusters; ++k) {
        SynthCluster c;
        c.bearing_deg = rng.uniform(-180.0, 180.0);
        c.range = rng.uniform(config.range_min, config.range_max);
        c.rcs_dbsm = rng.uniform(config.rcs_min, config.rcs_max);
        c.radial_speed = rng.uniform(-config.speed_max, config.speed_max);
        scene.clusters.push_back(c);
    }

    const std::size_t sweeps = config.n_sweeps == 0 ? 1 : config.n_sweeps;
    for (const auto& c : scene.clusters) {
        for (std::size_t j = 0; j < config.points_per_cluster; ++j) {
            const auto sweep = static_cast<std::size_t>(rng.uniform() * static_cast<double>(sweeps));
            const double range = c.range + rng.uniform(-config.radial_spread, config.radial_spread);
            double bearing = c.bearing_deg;
            if (config.azimuth_noise_deg > 0.0) bearing += config.azimuth_noise_deg * rng.normal();
            const double b = bearing * deg;
            RadarPoint p;
            p.x = range * std::cos(b);
            p.y = range * std::sin(b);
            p.z = 0.5 + rng.uniform(-0.3, 0.3);
            p.rcs_dbsm = c.rcs_dbsm + rng.uniform(-config.rcs_jitter, config.rcs_jitter);
            p.vx = c.radial_speed * std::cos(b);
            p.vy = c.radial_speed * std::sin(b);
            p.sweep_offset = -static_cast<double>(sweep) * config.sweep_interval;
            scene.cloud.points.push_back(p);
        }
    }
    scene.cloud.canonicalize();
    return scene;
}

}  // namespace rcbev
