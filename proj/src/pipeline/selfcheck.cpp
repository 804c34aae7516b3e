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

#include "rcbev/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>

#include "rcbev/grid_io.hpp"
#include "rcbev/oracles.hpp"
#include "rcbev/pipeline.hpp"
#include "rcbev/testgen.hpp"
#include "rcbev/weights.hpp"

namespace rcbev {
namespace {

constexpr std::size_t kTrials = 12;

BevSpec small_spec(std::size_t side) {
    const double half = 0.8 * static_cast<double>(side) / 2.0;
    return BevSpec::make(-half, half, -half, half, 0.8);
}

// Worst error over `trials` runs of `trial`.
double worst(std::size_t trials, const std::function<double(std::size_t)>& trial) {
    double w = 0.0;
    for (std::size_t t = 0; t < trials; ++t) w = std::max(w, trial(t));
    return w;
}

double mismatch(bool equal) { return equal ? 0.0 : 1.0; }

class Suite {
public:
    explicit Suite(const SelfcheckOptions& o) : opt_(o) {}

    void run(const std::string& name, double tolerance, const std::function<double(Rng&)>& body) {
        Rng rng(opt_.seed + 7919 * report_.checks.size());
        CheckResult r{name, tolerance, 0.0, false};
        try {
            r.measured = body(rng);
            r.passed = std::isfinite(r.measured) && r.measured <= tolerance;
        } catch (const std::exception&) {
            r.measured = std::numeric_limits<double>::infinity();
        }
        report_.checks.push_back(r);
    }

    const SelfcheckOptions& options() const { return opt_; }
    SelfcheckReport take() { return std::move(report_); }

private:
    SelfcheckOptions opt_;
    SelfcheckReport report_;
};

void attention_checks(Suite& s) {
    s.run("dmsa_beta0_matches_vanilla_attention", 1e-10, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t heads = 1 + rng.next() % 4, c = heads * (1 + rng.next() % 6), n = 1 + rng.next() % 24;
            AttentionParams p = gen::attention(rng, c, heads, true);
            std::fill(p.beta.begin(), p.beta.end(), 0.0);
            const Matrix f = gen::matrix(rng, n, c), coords = gen::matrix(rng, n, 2, 20.0);
            return max_abs_diff(multi_head_dmsa(f, coords, p), oracle::vanilla_attention(f, f, p));
        });
    });
    const bool perturb = s.options().perturb_dmsa_weight;
    s.run("dmsa_matches_dense_oracle", 1e-10, [perturb](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t heads = 1 + rng.next() % 4, c = heads * (1 + rng.next() % 6), n = 2 + rng.next() % 24;
            const AttentionParams p = gen::attention(rng, c, heads, true);
            AttentionParams seen = p;
            if (perturb) seen.wq(0, 0) += 0.5;
            const Matrix f = gen::matrix(rng, n, c), coords = gen::matrix(rng, n, 2, 3.0);
            return max_abs_diff(multi_head_dmsa(f, coords, seen), oracle::attention(f, f, p, coords));
        });
    });
    s.run("attention_rows_sum_to_one", 1e-12, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t n = 1 + rng.next() % 20, d = 1 + rng.next() % 8;
            const Matrix q = gen::matrix(rng, n, d, 3.0), k = gen::matrix(rng, n, d, 3.0);
            const Matrix w = attention_weights(q, k, pairwise_sq_dist(gen::matrix(rng, n, 2, 5.0)), rng.uniform(0, 2));
            double e = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0.0;
                for (double v : w.row(i)) sum += v;
                e = std::max(e, std::abs(sum - 1.0));
            }
            return e;
        });
    });
}

void backbone_checks(Suite& s) {
    s.run("point_block_matches_oracle", 1e-10, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t n = 1 + rng.next() % 30, in = 1 + rng.next() % 8, h = 1 + rng.next() % 8;
            const MlpParams p = gen::mlp(rng, {in, h, h}, {true, true});
            const Matrix f = gen::matrix(rng, n, in);
            return max_abs_diff(point_block(f, p), oracle::point_block(f, p));
        });
    });
    s.run("transformer_block_matches_oracle", 1e-10, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t heads = 1 + rng.next() % 4, c = heads * (1 + rng.next() % 4), n = 1 + rng.next() % 20;
            const auto p = gen::transformer_block(rng, c, heads);
            const Matrix f = gen::matrix(rng, n, c), coords = gen::matrix(rng, n, 2, 3.0);
            return max_abs_diff(transformer_block(f, coords, p), oracle::transformer_block(f, coords, p));
        });
    });
    s.run("inject_extract_match_oracle", 1e-10, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t c = 2 + rng.next() % 10, n = 1 + rng.next() % 20;
            const auto ip = gen::injection(rng, c, 1);
            const auto ep = gen::extraction(rng, c, 1);
            const Matrix fp = gen::matrix(rng, n, c), ft = gen::matrix(rng, n, c);
            return std::max(max_abs_diff(inject(fp, ft, ip), oracle::inject(fp, ft, ip)),
                            max_abs_diff(extract(ft, fp, ep), oracle::extract(ft, fp, ep)));
        });
    });
    s.run("inject_gamma_zero_is_identity", 0.0, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t c = 2 + rng.next() % 10, n = 1 + rng.next() % 20;
            auto p = gen::injection(rng, c, 1);
            std::fill(p.gamma.begin(), p.gamma.end(), 0.0);
            const Matrix fp = gen::matrix(rng, n, c), ft = gen::matrix(rng, n, c);
            return mismatch(inject(fp, ft, p) == fp);
        });
    });
    s.run("dual_backbone_matches_oracle", 1e-9, [](Rng& rng) {
        return worst(4, [&](std::size_t) {
            BackboneConfig cfg;
            cfg.widths = {8, 12};
            cfg.heads = 2;
            cfg.out_channels = 6;
            const auto p = gen::backbone(rng, cfg);
            const auto pts = gen::points(rng, 5 + rng.next() % 20, BevSpec{});
            const auto a = dual_backbone_forward(pts, p);
            const auto b = oracle::backbone(pts, p);
            return max_abs_diff(a.fused, b.fused);
        });
    });
    s.run("dual_backbone_permutation_equivariant", 0.0, [](Rng& rng) {
        return worst(4, [&](std::size_t) {
            BackboneConfig cfg;
            cfg.widths = {8, 8};
            cfg.heads = 2;
            cfg.out_channels = 4;
            const auto p = gen::backbone(rng, cfg);
            const auto pts = gen::points(rng, 4 + rng.next() % 20, BevSpec{});
            const auto perm = gen::permutation(rng, pts.size());
            PointFeatureSet shuffled = pts;
            shuffled.features = permute_rows(pts.features, perm);
            shuffled.coords = permute_rows(pts.coords, perm);
            for (std::size_t i = 0; i < perm.size(); ++i) shuffled.rcs_norm[i] = pts.rcs_norm[perm[i]];
            const Matrix expect = permute_rows(dual_backbone_forward(pts, p).fused, perm);
            return mismatch(dual_backbone_forward(shuffled, p).fused == expect);
        });
    });
}

void bev_checks(Suite& s) {
    s.run("rcs_scatter_matches_bruteforce", 0.0, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const BevSpec spec = small_spec(8 + 8 * (rng.next() % 4));
            const auto pts = gen::points(rng, rng.next() % 60, spec);
            const Matrix feats = gen::matrix(rng, pts.size(), 3);
            const ScatterConfig cfg{0.002, 4.0};
            return mismatch(rcs_scatter(feats, pts.coords, pts.rcs_norm, spec, cfg) ==
                            oracle::scatter(feats, pts.coords, pts.rcs_norm, spec, cfg));
        });
    });
    s.run("gaussian_map_point_evaluation", 1e-12, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const BevSpec spec = small_spec(32);
            const auto pts = gen::points(rng, 1, spec);
            const auto geo = scatter_geometry(pts.coords, pts.rcs_norm, spec, ScatterConfig{0.01, 6.0});
            const auto map = gaussian_bev_map(geo, spec);
            const auto& g = geo[0];
            const double bw = (g.coord.u * g.coord.u + g.coord.v * g.coord.v) * g.v_rcs / 3.0;
            double e = std::abs(map.data.at(0, g.pixel.py, g.pixel.px) - 1.0);
            for (std::size_t y = 0; y < spec.height; ++y)
                for (std::size_t x = 0; x < spec.width; ++x) {
                    const double dx = static_cast<double>(x) - static_cast<double>(g.pixel.px);
                    const double dy = static_cast<double>(y) - static_cast<double>(g.pixel.py);
                    const bool own = dx == 0 && dy == 0;
                    const bool inside = own || dx * dx + dy * dy < g.radius * g.radius;
                    double expect = 0.0;
                    if (inside) expect = bw < 1e-9 ? (own ? 1.0 : 0.0) : std::exp(-(dx * dx + dy * dy) / bw);
                    e = std::max(e, std::abs(map.data.at(0, y, x) - expect));
                }
            return e;
        });
    });
    s.run("gaussian_map_is_pointwise_max", 0.0, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const BevSpec spec = small_spec(24);
            const auto pts = gen::points(rng, 2 + rng.next() % 8, spec);
            const auto geo = scatter_geometry(pts.coords, pts.rcs_norm, spec, ScatterConfig{0.01, 6.0});
            FeatureMap expect(1, spec.height, spec.width);
            for (const auto& g : geo) {
                const auto one = gaussian_bev_map(std::span(&g, 1), spec);
                for (std::size_t i = 0; i < expect.data().size(); ++i)
                    expect.data()[i] = std::max(expect.data()[i], one.data.data()[i]);
            }
            return mismatch(gaussian_bev_map(geo, spec).data == expect);
        });
    });
    s.run("conv_bn_relu_matches_oracle", 1e-11, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t in = 1 + rng.next() % 5, out = 1 + rng.next() % 5;
            const auto p = gen::conv_bn(rng, in, out);
            const FeatureMap x = gen::feature_map(rng, in, 1 + rng.next() % 9, 1 + rng.next() % 9);
            return max_abs_diff(conv_bn_relu(x, p), oracle::cbr(x, p));
        });
    });
    s.run("bev_encode_matches_oracle", 1e-10, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const BevSpec spec = small_spec(8);
            const std::size_t ca = 1 + rng.next() % 4, cb = 1 + rng.next() % 4, out = 1 + rng.next() % 6;
            BevEncoderParams p;
            p.has_projection = ca + cb != out;
            if (p.has_projection) {
                p.proj_w = gen::matrix(rng, out, ca + cb);
                p.proj_b = gen::vec(rng, out);
            }
            const std::size_t width = p.has_projection ? out : ca + cb;
            for (std::size_t b = 0; b < 1 + rng.next() % 2; ++b) p.blocks.push_back(gen::conv_bn(rng, width, width));
            const BevGrid a(gen::feature_map(rng, ca, 8, 8), spec), base(gen::feature_map(rng, cb, 8, 8), spec);
            return max_abs_diff(bev_encode(a, base, p).data, oracle::bev_encode(a, base, p).data);
        });
    });
}

void fusion_checks(Suite& s) {
    s.run("bilinear_matches_oracle", 1e-13, [](Rng& rng) {
        return worst(kTrials * 8, [&](std::size_t) {
            const FeatureMap f = gen::feature_map(rng, 3, 1 + rng.next() % 6, 1 + rng.next() % 6);
            const double x = rng.uniform(-2.0, 8.0), y = rng.uniform(-2.0, 8.0);
            const auto a = bilinear_sample(f, x, y), b = oracle::bilinear(f, x, y);
            double e = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) e = std::max(e, std::abs(a[c] - b[c]));
            return e;
        });
    });
    s.run("deform_attn_matches_oracle", 1e-10, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t m = 1 + rng.next() % 2, k = 1 + rng.next() % 4, cv = m * (1 + rng.next() % 4);
            const std::size_t cq = 1 + rng.next() % 8, side = 1 + rng.next() % 8;
            const auto p = gen::deform(rng, cq, cv, m, k);
            const FeatureMap q = gen::feature_map(rng, cq, side, side), v = gen::feature_map(rng, cv, side, side);
            return max_abs_diff(deform_attn(q, v, p), oracle::deform_attn(q, v, p));
        });
    });
    s.run("deform_weights_sum_to_one", 1e-6, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t m = 1 + rng.next() % 2, k = 1 + rng.next() % 4, cv = m * 2;
            const auto p = gen::deform(rng, cv, cv, m, k);
            double e = 0.0;
            for (double sum : oracle::deform_weight_sums(gen::feature_map(rng, cv, 6, 6, 3.0), p))
                e = std::max(e, std::abs(sum - 1.0));
            return e;
        });
    });
    s.run("deform_identity_reproduces_values", 1e-12, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const std::size_t c = 1 + rng.next() % 8, side = 1 + rng.next() % 8;
            const FeatureMap q = gen::feature_map(rng, c, side, side), v = gen::feature_map(rng, c, side, side);
            return max_abs_diff(deform_attn(q, v, DeformAttnParams::identity(c, 1, 1)), v);
        });
    });
    s.run("channel_spatial_fuse_matches_oracle", 1e-10, [](Rng& rng) {
        return worst(kTrials, [&](std::size_t) {
            const BevSpec spec = small_spec(8);
            const std::size_t cc = 1 + rng.next() % 3, cr = 1 + rng.next() % 3, cf = 1 + rng.next() % 6;
            const auto p = gen::camf_fuse(rng, cc, cr, cf, rng.next() % 3);
            const BevGrid cam(gen::feature_map(rng, cc, 8, 8), spec), rad(gen::feature_map(rng, cr, 8, 8), spec);
            return max_abs_diff(channel_spatial_fuse(cam, rad, p).data, oracle::channel_spatial_fuse(cam, rad, p).data);
        });
    });
}

void io_checks(Suite& s) {
    s.run("weight_file_roundtrip", 0.0, [](Rng& rng) {
        ArchConfig arch;
        arch.backbone.widths = {8};
        arch.backbone.heads = 2;
        arch.backbone.out_channels = 4;
        arch.encoder = {4, 4, 4, 1};
        arch.camf = {4, 4, 1, 2, 8, 1, 8, 8};
        const WeightSet ws = init_weights(arch, rng.next());
        return mismatch(WeightSet::parse(ws.manifest_text("w.bin"), ws.payload_bytes()) == ws);
    });
    s.run("grid_file_roundtrip", 0.0, [](Rng& rng) {
        const BevSpec spec = small_spec(8);
        BevGrid g(gen::feature_map(rng, 3, 8, 8), spec);
        for (double& v : g.data.data()) v = static_cast<double>(static_cast<float>(v));
        return mismatch(decode_grid(encode_grid(g)) == g);
    });
    s.run("pipeline_deterministic", 0.0, [](Rng& rng) {
        PipelineConfig cfg = PipelineConfig::defaults();
        cfg.bev = small_spec(16);
        cfg.arch.backbone.widths = {8, 8};
        cfg.arch.backbone.heads = 2;
        cfg.arch.backbone.out_channels = 8;
        cfg.arch.encoder = {8, 8, 8, 1};
        cfg.arch.camf.camera_channels = 8;
        cfg.arch.camf.fused_channels = 8;
        cfg.arch.camf.heads = 2;
        cfg.arch.camf.points = 2;
        cfg.arch.camf.fuse_blocks = 1;
        cfg.scene.range_max = 5.5;
        cfg.scene.range_min = 2.0;
        cfg.seed = rng.next() % 1000;
        cfg.finalize();
        RunReport r1, r2;
        const auto a = run_pipeline(cfg, r1);
        const auto b = run_pipeline(cfg, r2);
        return mismatch(a.fused == b.fused && grid_checksum(a.fused) == grid_checksum(b.fused));
    });
}

}  // namespace

bool SelfcheckReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

void SelfcheckReport::print(std::ostream& out) const {
    std::size_t failed = 0;
    for (const auto& c : checks) {
        out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(40) << c.property << " tol=" << std::scientific
            << std::setprecision(1) << c.tolerance << " measured=" << std::setprecision(3) << c.measured << '\n';
        failed += c.passed ? 0 : 1;
    }
    out << std::defaultfloat << checks.size() << " properties, " << failed << " failed\n";
}

SelfcheckReport selfcheck(const SelfcheckOptions& options) {
    Suite suite(options);
    attention_checks(suite);
    backbone_checks(suite);
    bev_checks(suite);
    fusion_checks(suite);
    io_checks(suite);
    return suite.take();
}

}  // namespace rcbev
