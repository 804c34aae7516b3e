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
#include <numbers>
#include <sstream>

#include "rcbev/errors.hpp"
#include "rcbev/radar.hpp"
#include "rcbev/random.hpp"

using namespace rcbev;

namespace {

PointCloud parse(const std::string& text) {
    std::istringstream in(text);
    return parse_point_cloud_csv(in);
}

PointCloud random_cloud(Rng& rng, std::size_t n, double extent = 60.0) {
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i)
        c.points.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-1, 2),
                            rng.uniform(-30, 40), rng.uniform(-9, 9), rng.uniform(-9, 9),
                            -0.05 * static_cast<double>(rng.next() % 4)});
    return c;
}

}  // namespace

TEST(RadarCsv, EmptyDataSection) {
    const PointCloud c = parse("x,y,z,rcs,vx,vy,sweep_offset\n");
    EXPECT_TRUE(c.empty());
}

TEST(RadarCsv, ThreeRowsCanonicalOrder) {
    const PointCloud c = parse(
        "# frame=key42 compensated=true\n"
        "x,y,z,rcs,vx,vy,sweep_offset\n"
        "3,0,0,1,0,0,0\n"
        "1,5,0,1,0,0,-0.1\n"
        "2,0,0,1,0,0,0\n");
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c.frame_id, "key42");
    EXPECT_TRUE(c.compensated);
    EXPECT_EQ(c.points[0].sweep_offset, -0.1);
    EXPECT_EQ(c.points[1].x, 2.0);
    EXPECT_EQ(c.points[2].x, 3.0);
}

TEST(RadarCsv, ColumnsInAnyOrder) {
    const PointCloud c = parse("rcs,sweep_offset,vy,vx,z,y,x\n4,-0.05,6,5,3,2,1\n");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c.points[0], (RadarPoint{1, 2, 3, 4, 5, 6, -0.05}));
}

TEST(RadarCsv, MissingColumnNamed) {
    try {
        parse("x,y,z,vx,vy,sweep_offset\n1,2,3,4,5,0\n");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("rcs"), std::string::npos);
    }
}

TEST(RadarCsv, NonFiniteValue) {
    EXPECT_THROW(parse("x,y,z,rcs,vx,vy,sweep_offset\n1,2,3,nan,0,0,0\n"), DataError);
    EXPECT_THROW(parse("x,y,z,rcs,vx,vy,sweep_offset\n1,2,3,inf,0,0,0\n"), DataError);
}

TEST(RadarCsv, PositiveSweepOffsetRejected) {
    EXPECT_THROW(parse("x,y,z,rcs,vx,vy,sweep_offset\n1,2,3,4,0,0,0.1\n"), DataError);
}

TEST(RadarCsv, MalformedRows) {
    EXPECT_THROW(parse("x,y,z,rcs,vx,vy,sweep_offset\n1,2,3\n"), FormatError);
    EXPECT_THROW(parse("x,y,z,rcs,vx,vy,sweep_offset\n1,2,3,abc,0,0,0\n"), FormatError);
    EXPECT_THROW(parse(""), FormatError);
}

TEST(RadarCsv, FileRoundTrip) {
    Rng rng(1);
    PointCloud c = random_cloud(rng, 40);
    c.frame_id = "f7";
    c.canonicalize();
    const auto dir = std::filesystem::temp_directory_path() / "rcbev_radar_test";
    std::filesystem::create_directories(dir);
    save_point_cloud(dir / "c.csv", c);
    EXPECT_EQ(load_point_cloud(dir / "c.csv"), c);
    std::filesystem::remove_all(dir);
}

TEST(RadarBinary, RoundTripAtFloatPrecision) {
    Rng rng(2);
    PointCloud c = random_cloud(rng, 25);
    const auto f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };
    for (auto& p : c.points)
        p = {f32(p.x), f32(p.y), f32(p.z), f32(p.rcs_dbsm), f32(p.vx), f32(p.vy), f32(p.sweep_offset)};
    for (const auto& p : c.points) ASSERT_EQ(p.vy, f32(p.vy));
    c.canonicalize();
    const auto path = std::filesystem::temp_directory_path() / "rcbev_radar_test.bin";
    save_point_cloud_binary(path, c);
    EXPECT_EQ(std::filesystem::file_size(path), 4u + 28u * c.size());
    const PointCloud back = load_point_cloud_binary(path);
    EXPECT_EQ(back.points, c.points);
    std::filesystem::remove(path);
}

TEST(Accumulate, IdentitySingleSweep) {
    Rng rng(3);
    PointCloud c = random_cloud(rng, 12);
    c.canonicalize();
    const std::vector<std::pair<PointCloud, SweepTransform>> sweeps{{c, SweepTransform{}}};
    EXPECT_EQ(accumulate_sweeps(sweeps).points, c.points);
}

TEST(Accumulate, QuarterTurn) {
    PointCloud c;
    c.points.push_back({1, 0, 0.5, 3, 2, 0, 0});
    const std::vector<std::pair<PointCloud, SweepTransform>> sweeps{{c, SweepTransform{std::numbers::pi / 2, 0, 0}}};
    const RadarPoint p = accumulate_sweeps(sweeps).points.at(0);
    EXPECT_NEAR(p.x, 0.0, 1e-12);
    EXPECT_NEAR(p.y, 1.0, 1e-12);
    EXPECT_NEAR(p.vx, 0.0, 1e-12);
    EXPECT_NEAR(p.vy, 2.0, 1e-12);
    EXPECT_EQ(p.z, 0.5);
    EXPECT_EQ(p.rcs_dbsm, 3.0);
}

TEST(Accumulate, Cardinality) {
    Rng rng(4);
    const std::vector<std::pair<PointCloud, SweepTransform>> sweeps{{random_cloud(rng, 5), SweepTransform{}},
                                                                    {random_cloud(rng, 5), SweepTransform{0.3, 1, -2}}};
    EXPECT_EQ(accumulate_sweeps(sweeps).size(), 10u);
}

TEST(Accumulate, RotationPreservesRangeAndCount) {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const PointCloud c = random_cloud(rng, 1 + rng.next() % 20);
        const std::vector<std::pair<PointCloud, SweepTransform>> sweeps{
            {c, SweepTransform{rng.uniform(-3.14, 3.14), 0, 0}}};
        const PointCloud out = accumulate_sweeps(sweeps);
        ASSERT_EQ(out.size(), c.size());
        std::vector<double> r_in, r_out;
        for (const auto& p : c.points) r_in.push_back(std::hypot(p.x, p.y));
        for (const auto& p : out.points) r_out.push_back(std::hypot(p.x, p.y));
        std::sort(r_in.begin(), r_in.end());
        std::sort(r_out.begin(), r_out.end());
        for (std::size_t i = 0; i < r_in.size(); ++i) EXPECT_NEAR(r_in[i], r_out[i], 1e-9);
    }
}

TEST(Accumulate, InvalidAngle) {
    const std::vector<std::pair<PointCloud, SweepTransform>> sweeps{{PointCloud{}, SweepTransform{4.0, 0, 0}}};
    EXPECT_THROW(accumulate_sweeps(sweeps), ConfigError);
}

TEST(FilterRoi, HalfOpenBoundaries) {
    const BevSpec spec;
    PointCloud c;
    c.points.push_back({spec.x_min, 0, 0, 0, 0, 0, 0});
    c.points.push_back({spec.x_max, 0, 0, 0, 0, 0, 0});
    c.points.push_back({0, spec.y_max, 0, 0, 0, 0, 0});
    const PointCloud f = filter_roi(c, spec);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f.points[0].x, spec.x_min);
}

TEST(FilterRoi, AllInsideIsIdentityAndIdempotent) {
    Rng rng(6);
    const BevSpec spec;
    const PointCloud inside = random_cloud(rng, 30, 50.0);
    EXPECT_EQ(filter_roi(inside, spec), inside);
    for (int t = 0; t < 100; ++t) {
        const PointCloud c = random_cloud(rng, 20, 80.0);
        const PointCloud once = filter_roi(c, spec);
        EXPECT_EQ(filter_roi(once, spec), once);
        for (const auto& p : once.points) EXPECT_TRUE(spec.contains(p.x, p.y));
    }
}

TEST(NormalizeRcs, Endpoints) {
    EXPECT_EQ(normalize_rcs(-20.0), 0.0);
    EXPECT_EQ(normalize_rcs(30.0), 1.0);
    EXPECT_EQ(normalize_rcs(5.0), 0.5);
    EXPECT_EQ(normalize_rcs(-100.0), 0.0);
    EXPECT_EQ(normalize_rcs(100.0), 1.0);
}

TEST(NormalizeRcs, MonotoneInUnitRange) {
    Rng rng(7);
    for (int t = 0; t < 1000; ++t) {
        const double a = rng.uniform(-60, 60), b = a + rng.uniform(0, 30);
        const double na = normalize_rcs(a), nb = normalize_rcs(b);
        EXPECT_LE(na, nb);
        EXPECT_GE(na, 0.0);
        EXPECT_LE(nb, 1.0);
    }
}

TEST(NormalizeRcs, BadBounds) {
    EXPECT_THROW(normalize_rcs(0.0, {5.0, 5.0}), ConfigError);
    EXPECT_THROW(normalize_rcs(0.0, {6.0, 5.0}), ConfigError);
}

TEST(Features, CornerAndShape) {
    const BevSpec spec;
    PointCloud c;
    c.points.push_back({spec.x_min, spec.y_min, 0, 0, 0, 0, 0});
    c.points.push_back({1, 2, 0, 0, 0, 0, 0});
    const auto f = assemble_features(c, spec);
    EXPECT_EQ(f.features.rows(), 2u);
    EXPECT_EQ(f.features.cols(), 7u);
    EXPECT_EQ(f.features(0, 0), 0.0);
    EXPECT_EQ(f.features(0, 1), 0.0);
}

TEST(Features, HandComputedRow) {
    const BevSpec spec;
    PointCloud c;
    c.points.push_back({25.6, -12.8, 0.7, 10.0, 3.0, -4.0, -0.1});
    const auto f = assemble_features(c, spec);
    // x_norm = (25.6 + 51.2) / 102.4 = 0.75, y_norm = 38.4 / 102.4 = 0.375, rcs = 30/50 = 0.6
    EXPECT_NEAR(f.features(0, 0), 0.75, 1e-15);
    EXPECT_NEAR(f.features(0, 1), 0.375, 1e-15);
    EXPECT_EQ(f.features(0, 2), 0.7);
    EXPECT_NEAR(f.features(0, 3), 0.6, 1e-15);
    EXPECT_EQ(f.features(0, 4), 3.0);
    EXPECT_EQ(f.features(0, 5), -4.0);
    EXPECT_EQ(f.features(0, 6), -0.1);
    EXPECT_EQ(f.coords(0, 0), 25.6);
    EXPECT_EQ(f.coords(0, 1), -12.8);
    EXPECT_NEAR(f.rcs_norm[0], 0.6, 1e-15);
}

TEST(Features, OutsideRoiIsContractError) {
    PointCloud c;
    c.points.push_back({60, 0, 0, 0, 0, 0, 0});
    EXPECT_THROW(assemble_features(c, BevSpec{}), ContractError);
}

TEST(Synth, Deterministic) {
    const SceneConfig cfg;
    EXPECT_EQ(synth_scene(cfg, 9).cloud, synth_scene(cfg, 9).cloud);
    EXPECT_NE(synth_scene(cfg, 9).cloud, synth_scene(cfg, 10).cloud);
}

TEST(Synth, NoAzimuthNoiseStaysOnBearing) {
    SceneConfig cfg;
    cfg.azimuth_noise_deg = 0.0;
    const SynthScene s = synth_scene(cfg, 3);
    ASSERT_EQ(s.cloud.size(), cfg.n_clusters * cfg.points_per_cluster);
    for (const auto& p : s.cloud.points) {
        const double bearing = std::atan2(p.y, p.x) * 180.0 / std::numbers::pi;
        double best = 1e9;
        for (const auto& c : s.clusters) {
            double d = std::abs(bearing - c.bearing_deg);
            d = std::min(d, 360.0 - d);
            best = std::min(best, d);
        }
        EXPECT_LT(best, 1e-9);
    }
}

TEST(Synth, AzimuthNoiseSpreadsBearings) {
    SceneConfig cfg;
    cfg.n_clusters = 1;
    cfg.points_per_cluster = 400;
    cfg.azimuth_noise_deg = 2.0;
    const SynthScene s = synth_scene(cfg, 5);
    double sum = 0.0, sq = 0.0;
    for (const auto& p : s.cloud.points) {
        double d = std::atan2(p.y, p.x) * 180.0 / std::numbers::pi - s.clusters[0].bearing_deg;
        if (d > 180) d -= 360;
        if (d < -180) d += 360;
        sum += d;
        sq += d * d;
    }
    const double n = static_cast<double>(s.cloud.size());
    const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
    EXPECT_NEAR(sd, 2.0, 0.3);
}

TEST(Synth, NoClustersIsEmpty) {
    SceneConfig cfg;
    cfg.n_clusters = 0;
    EXPECT_TRUE(synth_scene(cfg, 1).cloud.empty());
}

TEST(Ingest, BitDeterministic) {
    Rng rng(8);
    PointCloud c = random_cloud(rng, 50);
    PointCloud shuffled = c;
    std::reverse(shuffled.points.begin(), shuffled.points.end());
    c.canonicalize();
    shuffled.canonicalize();
    EXPECT_EQ(c, shuffled);
    const auto a = assemble_features(filter_roi(c, BevSpec{}), BevSpec{});
    const auto b = assemble_features(filter_roi(shuffled, BevSpec{}), BevSpec{});
    EXPECT_EQ(a.features, b.features);
}
