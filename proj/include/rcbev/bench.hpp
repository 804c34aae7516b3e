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

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace rcbev {

struct BenchConfig {
    std::vector<std::size_t> sides = {16, 32, 64, 128};  // H = W; H*W = 256 .. 16384
    std::size_t channels = 16;
    std::size_t heads = 4;
    std::size_t points = 4;
    std::size_t repeats = 3;  // minimum timed runs; short calls repeat for 200 ms
    std::uint64_t seed = 11;
};

struct BenchRow {
    std::string method;  // "deform" or "dense"
    std::size_t cells = 0;
    double millis = 0.0;
    /// Runtime growth per doubling of H*W relative to the previous size:
    /// (t_i / t_{i-1})^(1 / log2(cells_i / cells_{i-1})). Zero on the first row.
    double doubling_ratio = 0.0;
};

struct BenchTable {
    std::vector<BenchRow> rows;

    std::vector<BenchRow> method_rows(const std::string& method) const;
    void print_text(std::ostream& out) const;
    void print_csv(std::ostream& out) const;
};

/// Times deform_attn and a dense cross-attention over the same grids.
/// Runs single-threaded so the growth ratios reflect the algorithms.
BenchTable bench(const BenchConfig& config = {});

}  // namespace rcbev
