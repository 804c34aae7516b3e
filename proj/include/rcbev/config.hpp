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
#include <string>
#include <vector>

#include "rcbev/architecture.hpp"
#include "rcbev/bev.hpp"
#include "rcbev/bev_spec.hpp"
#include "rcbev/radar.hpp"

namespace rcbev {

/// Flat "dotted.key = value" text with '#' comments.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_real(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<std::size_t> get_size_list(const std::string& key, const std::vector<std::size_t>& fallback) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct PipelineConfig {
    BevSpec bev;
    ArchConfig arch;
    ScatterConfig scatter;
    RcsBounds rcs;
    SceneConfig scene;
    std::size_t sweeps = 6;
    std::uint64_t seed = 0;
    std::filesystem::path weights;  // empty: seeded init
    std::filesystem::path input;    // radar file; empty: synthetic scene
    std::filesystem::path camera;   // camera BEV file; empty: synthetic field
    std::filesystem::path output;
    bool dump_intermediates = false;

    /// Defaults: 128x128 BEV at 0.8 m over [-51.2, 51.2]^2, three stages.
    static PipelineConfig defaults();
    /// Applies keys over the defaults. Unknown keys raise ConfigError.
    static PipelineConfig from_text(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);

    /// Config file listing every key with its current value.
    std::string to_text() const;

    /// Syncs grid-dependent architecture fields with `bev` and validates.
    void finalize();
    void validate() const;
};

}  // namespace rcbev
