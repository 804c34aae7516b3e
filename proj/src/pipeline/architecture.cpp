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

#include "rcbev/architecture.hpp"

#include "rcbev/errors.hpp"
#include "rcbev/params.hpp"

namespace rcbev {

void ArchConfig::validate() const {
    backbone.validate();
    encoder.validate();
    camf.validate();
    if (encoder.point_channels != backbone.out_channels)
        throw ConfigError("BEV encoder expects " + std::to_string(encoder.point_channels) +
                          "-channel point features but the backbone emits " + std::to_string(backbone.out_channels));
    if (camf.radar_channels != radar_bev_channels())
        throw ConfigError("fusion expects " + std::to_string(camf.radar_channels) +
                          " radar channels but the encoder emits " + std::to_string(radar_bev_channels()));
}

WeightSet init_weights(const ArchConfig& config, std::uint64_t seed) {
    config.validate();
    WeightBuilder b(seed);
    add_backbone_weights(b, config.backbone);
    add_bev_encoder_weights(b, config.encoder);
    add_camf_weights(b, config.camf);
    return std::move(b).finish();
}

}  // namespace rcbev
