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

#include "rcbev/backbone.hpp"
#include "rcbev/bev.hpp"
#include "rcbev/fusion.hpp"
#include "rcbev/weights.hpp"

namespace rcbev {

/// Every learned component of the radar branch and the fusion head.
struct ArchConfig {
    BackboneConfig backbone;
    BevEncoderConfig encoder;
    CamfConfig camf;

    /// Width of the radar BEV feature leaving the encoder.
    std::size_t radar_bev_channels() const noexcept {
        return encoder.blocks == 0 ? encoder.concat_channels() : encoder.out_channels;
    }

    /// Checks every component and that their widths chain.
    void validate() const;
};

/// Seeded initialization of every tensor the architecture reads. Identical
/// (config, seed) pairs give bit-identical sets; biases start at zero, the
/// injection gammas at 0 and the DMSA betas at 1.
WeightSet init_weights(const ArchConfig& config, std::uint64_t seed);

}  // namespace rcbev
