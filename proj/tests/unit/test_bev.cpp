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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rcbev/bev.hpp"
#include "rcbev/errors.hpp"
#include "rcbev/grid_io.hpp"
#include "rcbev/oracles.hpp"
#include "rcbev/parallel.hpp"
#include "rcbev/testgen.hpp"

using namespace rcbev;

namespace {

BevSpec square(std::size_t side) {
    const double half = 0.8 * static_cast<double>(side) / 2.0;
    return BevSpec::make(-half, half, -half, half, 0.8);
}

// Metric position of continuous pixel coordinate (u, v).
Matrix at_pixel(const BevSpec& spec, double u, double v) {
    return Matrix::from_rows({{spec.x_min + u * spec.resolution, spec.y_min + v * spec.resolution}});
}

std::size_t nonzero_pixels(const BevGrid& g) {
    std::size_t n = 0;
    for (std::size_t y = 0; y < g.data.height(); ++y)
        for (std::size_t x = 0; x < g.data.width(); ++x) {
            bool any = false;
            for (std::size_t c = 0; c < g.channels(); ++c) any = any || g.data.at(c, y, x) != 0.0;
            n += any ? 1 : 0;
        }
    return n;
}

// Integer-valued features keep every partial sum exact.
Matrix integer_features(Rng& rng, std::size_t n, std::size_t c) {
    Matrix m(n, c);
    for (double& v : m.data()) v = static_cast<double>(1 + rng.next() % 9);
    return m;
}

}  // namespace

TEST(BevSpec, MakeDerivesDims) {
    const BevSpec s = BevSpec::make(-51.2, 51.2, -51.2, 51.2, 0.8);
    EXPECT_EQ(s.width, 128u);
    EXPECT_EQ(s.height, 128u);
    EXPECT_THROW(BevSpec::make(0, 10, 0, 10, 0.3), ConfigError);
    EXPECT_THROW(BevSpec::make(0, 10, 0, 10, 0.0), ConfigError);
}

TEST(ToPixel, Corner) {
    const BevSpec s;
    const auto [c, p] = to_pixel(s.x_min, s.y_min, s);
    EXPECT_EQ(p.px, 0u);
    EXPECT_EQ(p.py, 0u);
    EXPECT_EQ(c.u, 0.0);
}

TEST(ToPixel, FloorRule) {
    const BevSpec s;
    const auto [c, p] = to_pixel(s.x_min + 1.5 * s.resolution, 0.0, s);
    EXPECT_EQ(p.px, 1u);
    EXPECT_NEAR(c.u, 1.5, 1e-12);
}

TEST(ToPixel, UpperBoundary) {
    const BevSpec s;
    const auto [c, p] = to_pixel(std::nextafter(s.x_max, 0.0), std::nextafter(s.y_max, 0.0), s);
    EXPECT_EQ(p.px, s.width - 1);
    EXPECT_EQ(p.py, s.height - 1);
}

TEST(ToPixel, OutsideRoi) {
    const BevSpec s;
    EXPECT_THROW(to_pixel(s.x_max, 0.0, s), ContractError);
    EXPECT_THROW(to_pixel(0.0, s.y_min - 1.0, s), ContractError);
}

TEST(ScatterRadius, ZeroRcs) { EXPECT_EQ(scatter_radius({40, 70}, 0.0, ScatterConfig{}), 0.0); }

TEST(ScatterRadius, ScalarArithmetic) {
    const ScatterConfig cfg{1.0, std::numeric_limits<double>::infinity()};
    EXPECT_NEAR(scatter_radius({3, 4}, 0.08, cfg), 2.0, 1e-15);
}

TEST(ScatterRadius, Cap) { EXPECT_EQ(scatter_radius({100, 100}, 1.0, ScatterConfig{1.0, 5.0}), 5.0); }

TEST(ScatterConfig, RejectsNegative) {
    EXPECT_THROW((ScatterConfig{-1.0, 5.0}.validate()), ConfigError);
    EXPECT_THROW((ScatterConfig{1.0, -5.0}.validate()), ConfigError);
}

TEST(RcsScatter, RadiusZeroSinglePixel) {
    const BevSpec s = square(16);
    const Matrix f = Matrix::from_rows({{1.5, -2.0}});
    const std::vector<double> rcs{0.0};
    const BevGrid g = rcs_scatter(f, at_pixel(s, 5.5, 7.5), rcs, s, ScatterConfig{});
    EXPECT_EQ(nonzero_pixels(g), 1u);
    EXPECT_EQ(g.data.at(0, 7, 5), 1.5);
    EXPECT_EQ(g.data.at(1, 7, 5), -2.0);
}

TEST(RcsScatter, RadiusTwoCoversNinePixels) {
    const BevSpec s = square(16);
    // u = v = 5.5, choose v_rcs so that r = 2 exactly: 2 = 1 * (5.5^2 + 5.5^2) * v
    const double v = 2.0 / (5.5 * 5.5 * 2);
    const auto geo = scatter_geometry(at_pixel(s, 5.5, 5.5), std::vector<double>{v}, s, ScatterConfig{1.0, 10.0});
    ASSERT_NEAR(geo[0].radius, 2.0, 1e-12);
    const ScatterConfig cfg{1.0, 2.0};  // exact radius 2 through the cap
    const BevGrid g = rcs_scatter(Matrix::from_rows({{1.0}}), at_pixel(s, 5.5, 5.5), std::vector<double>{1.0}, s, cfg);
    EXPECT_EQ(nonzero_pixels(g), 9u);
    for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) EXPECT_EQ(g.data.at(0, 5 + dy, 5 + dx), 1.0);
    EXPECT_EQ(g.data.at(0, 5, 7), 0.0);
}

TEST(RcsScatter, CoincidentPointsSum) {
    const BevSpec s = square(8);
    Matrix coords(2, 2);
    coords(0, 0) = coords(1, 0) = 0.3;
    coords(0, 1) = coords(1, 1) = -0.5;
    const BevGrid g = rcs_scatter(Matrix::from_rows({{1.25}, {2.5}}), coords, std::vector<double>{0, 0}, s, {});
    const auto [c, p] = to_pixel(0.3, -0.5, s);
    EXPECT_EQ(g.data.at(0, p.py, p.px), 3.75);
}

TEST(RcsScatter, MatchesBruteForceOracle) {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const BevSpec s = square(8 * (1 + rng.next() % 8));
        const auto pts = gen::points(rng, rng.next() % 201, s);
        const Matrix f = gen::matrix(rng, pts.size(), 1 + rng.next() % 4);
        const ScatterConfig cfg{rng.uniform(0.0, 0.01), rng.uniform(0.0, 6.0)};
        EXPECT_EQ(rcs_scatter(f, pts.coords, pts.rcs_norm, s, cfg), oracle::scatter(f, pts.coords, pts.rcs_norm, s, cfg));
    }
}

TEST(RcsScatter, MassConservation) {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const BevSpec s = square(24);
        const auto pts = gen::points(rng, rng.next() % 40, s);
        const Matrix f = integer_features(rng, pts.size(), 2);
        const ScatterConfig cfg{0.005, 4.0};
        const BevGrid g = rcs_scatter(f, pts.coords, pts.rcs_norm, s, cfg);
        const auto geo = scatter_geometry(pts.coords, pts.rcs_norm, s, cfg);
        double expect = 0.0, total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::size_t covered = 0;
            for (long y = 0; y < 24; ++y)
                for (long x = 0; x < 24; ++x)
                    covered += covers(x - static_cast<long>(geo[i].pixel.px), y - static_cast<long>(geo[i].pixel.py),
                                      geo[i].radius);
            expect += (f(i, 0) + f(i, 1)) * static_cast<double>(covered);
        }
        for (double v : g.data.data()) total += v;
        EXPECT_EQ(total, expect);

        const BevGrid base = rcs_scatter(f, pts.coords, pts.rcs_norm, s, ScatterConfig{0.005, 0.0});
        double plain = 0.0, base_total = 0.0;
        for (double v : f.data()) plain += v;
        for (double v : base.data.data()) base_total += v;
        EXPECT_EQ(base_total, plain);
    }
}

TEST(RcsScatter, MonotoneCoverage) {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const BevSpec s = square(32);
        const auto pts = gen::points(rng, 1 + rng.next() % 30, s);
        const Matrix f = integer_features(rng, pts.size(), 1);
        std::size_t prev = 0;
        for (double cap : {0.0, 0.5, 1.0, 1.5, 2.5, 4.0, 8.0}) {
            const std::size_t n = nonzero_pixels(rcs_scatter(f, pts.coords, pts.rcs_norm, s, ScatterConfig{0.01, cap}));
            EXPECT_GE(n, prev);
            prev = n;
        }
    }
}

TEST(RcsScatter, DeterministicAcrossThreadCounts) {
    Rng rng(4);
    const BevSpec s = square(64);
    const auto pts = gen::points(rng, 200, s);
    const Matrix f = gen::matrix(rng, 200, 8);
    set_thread_count(1);
    const BevGrid a = rcs_scatter(f, pts.coords, pts.rcs_norm, s, {});
    set_thread_count(4);
    const BevGrid b = rcs_scatter(f, pts.coords, pts.rcs_norm, s, {});
    set_thread_count(0);
    EXPECT_EQ(a, b);
}

TEST(GaussianMap, OwnPixelIsOne) {
    Rng rng(5);
    const BevSpec s = square(32);
    for (int t = 0; t < 100; ++t) {
        const auto pts = gen::points(rng, 1 + rng.next() % 5, s);
        const auto geo = scatter_geometry(pts.coords, pts.rcs_norm, s, ScatterConfig{0.01, 5.0});
        const BevGrid g = gaussian_bev_map(geo, s);
        for (const auto& p : geo) EXPECT_EQ(g.data.at(0, p.pixel.py, p.pixel.px), 1.0);
        for (double v : g.data.data()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(GaussianMap, ScalarEvaluation) {
    Rng rng(6);
    const BevSpec s = square(32);
    for (int t = 0; t < 100; ++t) {
        const auto pts = gen::points(rng, 1, s);
        const auto geo = scatter_geometry(pts.coords, pts.rcs_norm, s, ScatterConfig{0.01, 6.0});
        const BevGrid g = gaussian_bev_map(geo, s);
        const auto& p = geo[0];
        const double cx = static_cast<double>(p.pixel.px), cy = static_cast<double>(p.pixel.py);
        const double denom = (p.coord.u * p.coord.u + p.coord.v * p.coord.v) * p.v_rcs / 3.0;
        for (std::size_t y = 0; y < s.height; ++y)
            for (std::size_t x = 0; x < s.width; ++x) {
                const double d2 = (cx - x) * (cx - x) + (cy - y) * (cy - y);
                const bool own = d2 == 0.0;
                if (!own && !(d2 < p.radius * p.radius)) {
                    EXPECT_EQ(g.data.at(0, y, x), 0.0);
                    continue;
                }
                const double expect = denom < 1e-9 ? (own ? 1.0 : 0.0) : std::exp(-d2 / denom);
                EXPECT_NEAR(g.data.at(0, y, x), expect, 1e-12);
            }
    }
}

TEST(GaussianMap, PointwiseMaxOfSingles) {
    Rng rng(7);
    const BevSpec s = square(16);
    for (int t = 0; t < 100; ++t) {
        const auto pts = gen::points(rng, 2, s);
        const auto geo = scatter_geometry(pts.coords, pts.rcs_norm, s, ScatterConfig{0.02, 6.0});
        const BevGrid a = gaussian_bev_map(std::span(&geo[0], 1), s), b = gaussian_bev_map(std::span(&geo[1], 1), s);
        const BevGrid both = gaussian_bev_map(geo, s);
        for (std::size_t i = 0; i < both.data.data().size(); ++i)
            EXPECT_EQ(both.data.data()[i], std::max(a.data.data()[i], b.data.data()[i]));
    }
}

TEST(GaussianMap, EmptyAndDegenerate) {
    const BevSpec s = square(8);
    const BevGrid empty = gaussian_bev_map({}, s);
    for (double v : empty.data.data()) EXPECT_EQ(v, 0.0);
    const auto geo = scatter_geometry(at_pixel(s, 0.0, 0.0), std::vector<double>{1.0}, s, ScatterConfig{1.0, 5.0});
    const BevGrid g = gaussian_bev_map(geo, s);
    EXPECT_EQ(g.data.at(0, 0, 0), 1.0);
    EXPECT_EQ(nonzero_pixels(g), 1u);
}

TEST(RcsBevFeature, IdentityMlpConcatenates) {
    Rng rng(8);
    const BevSpec s = square(4);
    const BevGrid f(gen::feature_map(rng, 3, 4, 4), s), g(gen::feature_map(rng, 1, 4, 4), s);
    MlpParams p;
    p.layers.push_back({Matrix::identity(4), std::vector<double>(4, 0.0), false});
    EXPECT_EQ(rcs_bev_feature(f, g, p).data, concat_channels(f.data, g.data));
}

TEST(RcsBevFeature, ZeroInputZeroBias) {
    Rng rng(9);
    const BevSpec s = square(4);
    MlpParams p = gen::mlp(rng, {4, 6, 5}, {true, false});
    for (auto& l : p.layers) std::fill(l.bias.begin(), l.bias.end(), 0.0);
    const BevGrid out = rcs_bev_feature(BevGrid(3, s), BevGrid(1, s), p);
    for (double v : out.data.data()) EXPECT_EQ(v, 0.0);
}

TEST(RcsBevFeature, MatchesPixelLoopOracle) {
    Rng rng(10);
    const BevSpec s = BevSpec::make(0, 2.4, 0, 2.4, 0.8);
    for (int t = 0; t < 100; ++t) {
        const BevGrid f(gen::feature_map(rng, 3, 3, 3), s), g(gen::feature_map(rng, 1, 3, 3), s);
        const MlpParams p = gen::mlp(rng, {4, 5, 2}, {true, false});
        const BevGrid out = rcs_bev_feature(f, g, p);
        for (std::size_t y = 0; y < 3; ++y)
            for (std::size_t x = 0; x < 3; ++x) {
                Matrix row(1, 4);
                for (std::size_t c = 0; c < 3; ++c) row(0, c) = f.data.at(c, y, x);
                row(0, 3) = g.data.at(0, y, x);
                const Matrix expect = oracle::mlp(row, p);
                for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(out.data.at(c, y, x), expect(0, c), 1e-10);
            }
    }
}

TEST(RcsBevFeature, ChannelMismatch) {
    Rng rng(11);
    const BevSpec s = square(4);
    EXPECT_THROW(rcs_bev_feature(BevGrid(3, s), BevGrid(1, s), gen::mlp(rng, {5, 2}, {false})), ShapeError);
}

TEST(BevEncode, NoBlocksGivesConcat) {
    Rng rng(12);
    const BevSpec s = square(4);
    const BevGrid a(gen::feature_map(rng, 2, 4, 4), s), b(gen::feature_map(rng, 3, 4, 4), s);
    EXPECT_EQ(bev_encode(a, b, BevEncoderParams{}).data, concat_channels(a.data, b.data));
}

TEST(BevEncode, ZeroKernelsResidualIdentityAfterProjection) {
    Rng rng(13);
    const BevSpec s = square(4);
    BevEncoderParams p;
    p.has_projection = true;
    p.proj_w = gen::matrix(rng, 3, 5);
    p.proj_b = gen::vec(rng, 3);
    for (int k = 0; k < 2; ++k) {
        ConvBnParams cb = gen::conv_bn(rng, 3, 3);
        std::fill(cb.conv.kernels.begin(), cb.conv.kernels.end(), 0.0);
        std::fill(cb.conv.bias.begin(), cb.conv.bias.end(), 0.0);
        cb.bn = BatchNormParams{{1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}};
        p.blocks.push_back(cb);
    }
    const BevGrid a(gen::feature_map(rng, 2, 4, 4), s), b(gen::feature_map(rng, 3, 4, 4), s);
    EXPECT_EQ(bev_encode(a, b, p).data, conv1x1(concat_channels(a.data, b.data), p.proj_w, p.proj_b));
}

TEST(BevEncode, MatchesComposedOracle) {
    Rng rng(14);
    const BevSpec s = square(8);
    for (int t = 0; t < 30; ++t) {
        BevEncoderParams p;
        p.has_projection = true;
        p.proj_w = gen::matrix(rng, 4, 6);
        p.proj_b = gen::vec(rng, 4);
        for (int k = 0; k < 2; ++k) p.blocks.push_back(gen::conv_bn(rng, 4, 4));
        const BevGrid a(gen::feature_map(rng, 3, 8, 8), s), b(gen::feature_map(rng, 3, 8, 8), s);
        EXPECT_LE(max_abs_diff(bev_encode(a, b, p).data, oracle::bev_encode(a, b, p).data), 1e-9);
    }
}

TEST(BevEncoderWeights, FromWeightsShapes) {
    WeightBuilder wb(2);
    const BevEncoderConfig cfg{16, 8, 12, 2};
    add_bev_encoder_weights(wb, cfg);
    const WeightSet ws = std::move(wb).finish();
    const auto p = BevEncoderParams::from_weights(ws, cfg);
    EXPECT_EQ(p.rcs_mlp.in_dim(), 17u);
    EXPECT_EQ(p.rcs_mlp.out_dim(), 8u);
    EXPECT_TRUE(p.has_projection);
    EXPECT_EQ(p.blocks.size(), 2u);
}

TEST(GridIo, RoundTripAndChecksum) {
    Rng rng(15);
    const BevSpec s = square(8);
    BevGrid g(gen::feature_map(rng, 3, 8, 8), s);
    for (double& v : g.data.data()) v = static_cast<double>(static_cast<float>(v));
    const auto bytes = encode_grid(g);
    EXPECT_EQ(bytes.size(), 4u + 4u * 4u + 5u * 8u + 3u * 64u * 4u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RBEV");
    EXPECT_EQ(decode_grid(bytes), g);
    EXPECT_EQ(grid_checksum(g), fnv1a64(bytes));
    const auto path = std::filesystem::temp_directory_path() / "rcbev_grid_test.rbev";
    save_grid(path, g);
    EXPECT_EQ(load_grid(path), g);
    std::filesystem::remove(path);
}

TEST(GridIo, Fnv1aKnownVectors) {
    EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64({'a'}), 0xaf63dc4c8601ec8cULL);
}

TEST(GridIo, RejectsCorruptFiles) {
    Rng rng(16);
    const BevGrid g(gen::feature_map(rng, 1, 8, 8), square(8));
    auto bytes = encode_grid(g);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_grid(bad_magic), FormatError);
    auto short_file = bytes;
    short_file.pop_back();
    EXPECT_THROW(decode_grid(short_file), FormatError);
    auto bad_version = bytes;
    bad_version[4] = 9;
    EXPECT_THROW(decode_grid(bad_version), FormatError);
}
