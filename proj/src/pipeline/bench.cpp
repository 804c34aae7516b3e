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

#include "rcbev/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>

#include "rcbev/fusion.hpp"
#include "rcbev/oracles.hpp"
#include "rcbev/parallel.hpp"
#include "rcbev/testgen.hpp"

namespace rcbev {
namespace {

// Best of at least `repeats` timed calls, repeating short calls until
// 200 ms have been spent; stops early once 20 s have been spent.
template <typename F>
double best_millis(std::size_t repeats, F&& f) {
    double best = std::numeric_limits<double>::infinity();
    double spent = 0.0;
    for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1) || spent < 200.0; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, ms);
        spent += ms;
        if (spent > 20000.0) break;
    }
    return best;
}

void fill_ratios(std::vector<BenchRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double doublings = std::log2(static_cast<double>(rows[i].cells) / static_cast<double>(rows[i - 1].cells));
        rows[i].doubling_ratio = std::pow(rows[i].millis / rows[i - 1].millis, 1.0 / doublings);
    }
}

}  // namespace

std::vector<BenchRow> BenchTable::method_rows(const std::string& method) const {
    std::vector<BenchRow> out;
    for (const auto& r : rows)
        if (r.method == method) out.push_back(r);
    return out;
}

void BenchTable::print_text(std::ostream& out) const {
    out << std::left << std::setw(8) << "method" << std::right << std::setw(8) << "H*W" << std::setw(14) << "ms"
        << std::setw(10) << "ratio" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(8) << r.method << std::right << std::setw(8) << r.cells << std::setw(14)
            << std::fixed << std::setprecision(3) << r.millis << std::setw(10);
        if (r.doubling_ratio > 0.0)
            out << std::setprecision(2) << r.doubling_ratio;
        else
            out << "-";
        out << '\n';
    }
    out << std::defaultfloat;
}

void BenchTable::print_csv(std::ostream& out) const {
    out << "method,cells,millis,doubling_ratio\n";
    for (const auto& r : rows) out << r.method << ',' << r.cells << ',' << r.millis << ',' << r.doubling_ratio << '\n';
}

BenchTable bench(const BenchConfig& config) {
    set_thread_count(1);
    Rng rng(config.seed);
    const std::size_t c = config.channels;
    const DeformAttnParams dp = gen::deform(rng, c, c, config.heads, config.points);
    oracle::DenseCrossParams dense;
    dense.heads = config.heads;
    const double s = 1.0 / std::sqrt(static_cast<double>(c));
    dense.wq = gen::matrix(rng, c, c, s);
    dense.wk = gen::matrix(rng, c, c, s);
    dense.wv = gen::matrix(rng, c, c, s);
    dense.wo = gen::matrix(rng, c, c, s);

    std::vector<BenchRow> deform_rows, dense_rows;
    double sink = 0.0;
    for (std::size_t side : config.sides) {
        const FeatureMap q = gen::feature_map(rng, c, side, side), v = gen::feature_map(rng, c, side, side);
        const std::size_t cells = side * side;
        deform_rows.push_back({"deform", cells, best_millis(config.repeats, [&] {
                                   sink += deform_attn(q, v, dp).data()[0];
                               }), 0.0});
        dense_rows.push_back({"dense", cells, best_millis(config.repeats, [&] {
                                  sink += oracle::dense_cross_attention(q, v, dense).data()[0];
                              }), 0.0});
    }
    set_thread_count(0);
    (void)sink;
    fill_ratios(deform_rows);
    fill_ratios(dense_rows);
    BenchTable table;
    table.rows = deform_rows;
    table.rows.insert(table.rows.end(), dense_rows.begin(), dense_rows.end());
    return table;
}

}  // namespace rcbev
