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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rcbev/bench.hpp"
#include "rcbev/config.hpp"
#include "rcbev/errors.hpp"
#include "rcbev/grid_io.hpp"
#include "rcbev/pipeline.hpp"
#include "rcbev/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace rcbev;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string weights;
    bool dump = false;
    std::string out;
};

PipelineConfig load_config(const Common& c) {
    try {
        PipelineConfig cfg = c.config.empty() ? PipelineConfig::defaults() : PipelineConfig::load(c.config);
        if (c.seed) cfg.seed = *c.seed;
        if (!c.weights.empty()) cfg.weights = c.weights;
        cfg.dump_intermediates = cfg.dump_intermediates || c.dump;
        if (!c.out.empty()) cfg.output = c.out;
        cfg.finalize();
        return cfg;
    } catch (const std::exception& e) {
        throw StageError("config", e.what());
    }
}

fs::path require_out(const PipelineConfig& cfg, const std::string& fallback) {
    return cfg.output.empty() ? fs::path(fallback) : cfg.output;
}

void write_grid(const fs::path& path, const BevGrid& grid, const std::string& stage) {
    try {
        save_grid(path, grid);
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

BevGrid read_grid(const fs::path& path, const std::string& stage) {
    try {
        return load_grid(path);
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

void dump_intermediates(const fs::path& out, const Intermediates& d) {
    const fs::path dir = out.string() + ".intermediates";
    fs::create_directories(dir);
    auto grid = [&](const char* name, const BevGrid& g) {
        if (g.channels() > 0) write_grid(dir / (std::string(name) + ".rbev"), g, "dump");
    };
    grid("f_rcs", d.f_rcs);
    grid("g_rcs", d.g_rcs);
    grid("f_rcs_prime", d.f_rcs_prime);
    grid("base", d.base);
    grid("camera_aligned", d.camera_aligned);
    grid("radar_aligned", d.radar_aligned);
    std::ofstream f(dir / "point_features.csv");
    const Matrix& m = d.backbone.fused;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t c = 0; c < m.cols(); ++c) f << (c ? "," : "") << m(i, c);
        f << '\n';
    }
    std::cout << "intermediates written to " << dir.string() << '\n';
}

void print_report(const RunReport& report, const BevGrid& grid, const fs::path& out) {
    std::cout << report.to_text();
    std::cout << "wrote " << out.string() << " (" << shape_string(grid.data) << ") checksum " << std::hex
              << grid_checksum(grid) << std::dec << '\n';
}

int cmd_extract(const Common& c, const std::string& input) {
    PipelineConfig cfg = load_config(c);
    if (!input.empty()) cfg.input = input;
    const WeightSet ws = resolve_weights(cfg);
    const PointCloud cloud = resolve_point_cloud(cfg);
    RunReport report;
    Intermediates dump;
    const BevGrid radar = extract_radar_bev(cloud, ws, cfg, report, cfg.dump_intermediates ? &dump : nullptr);
    const fs::path out = require_out(cfg, "radar.rbev");
    write_grid(out, radar, "export");
    print_report(report, radar, out);
    if (cfg.dump_intermediates) dump_intermediates(out, dump);
    return 0;
}

int cmd_fuse(const Common& c, const std::string& radar_path, const std::string& camera_path) {
    const PipelineConfig cfg = load_config(c);
    const WeightSet ws = resolve_weights(cfg);
    const BevGrid radar = read_grid(radar_path, "radar-input");
    const BevGrid camera = camera_path.empty() ? gen_camera_bev(cfg.bev, cfg.arch.camf.camera_channels, cfg.seed)
                                               : read_grid(camera_path, "camera-input");
    RunReport report;
    Intermediates dump;
    const BevGrid fused = fuse_bev(camera, radar, ws, cfg, report, cfg.dump_intermediates ? &dump : nullptr);
    const fs::path out = require_out(cfg, "fused.rbev");
    write_grid(out, fused, "export");
    report.fused_stats = grid_stats(fused);
    print_report(report, fused, out);
    if (cfg.dump_intermediates) dump_intermediates(out, dump);
    return 0;
}

int cmd_run(const Common& c, const std::string& input) {
    PipelineConfig cfg = load_config(c);
    if (!input.empty()) cfg.input = input;
    RunReport report;
    const FusionOutput result = run_pipeline(cfg, report);
    const fs::path out = require_out(cfg, "fused.rbev");
    write_grid(out, result.fused, "export");
    print_report(report, result.fused, out);
    if (result.intermediates) dump_intermediates(out, *result.intermediates);
    return 0;
}

int cmd_synth(const Common& c) {
    const PipelineConfig cfg = load_config(c);
    const fs::path out = require_out(cfg, "scene.csv");
    try {
        const SynthScene scene = synth_scene(cfg.scene, cfg.seed);
        if (out.extension() == ".bin")
            save_point_cloud_binary(out, scene.cloud);
        else
            save_point_cloud(out, scene.cloud);
        std::cout << "wrote " << out.string() << " (" << scene.cloud.size() << " points, " << scene.clusters.size()
                  << " clusters)\n";
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("synth", e.what());
    }
    return 0;
}

int cmd_gen_cam(const Common& c) {
    const PipelineConfig cfg = load_config(c);
    const BevGrid cam = gen_camera_bev(cfg.bev, cfg.arch.camf.camera_channels, cfg.seed);
    const fs::path out = require_out(cfg, "camera.rbev");
    write_grid(out, cam, "export");
    std::cout << "wrote " << out.string() << " (" << shape_string(cam.data) << ") checksum " << std::hex
              << grid_checksum(cam) << std::dec << '\n';
    return 0;
}

int cmd_init_weights(const Common& c) {
    const PipelineConfig cfg = load_config(c);
    const fs::path out = require_out(cfg, "weights.json");
    try {
        const WeightSet ws = init_weights(cfg.arch, cfg.seed);
        ws.save(out);
        std::cout << "wrote " << out.string() << " (" << ws.size() << " tensors)\n";
    } catch (const std::exception& e) {
        throw StageError("weights", e.what());
    }
    return 0;
}

int cmd_print_config(const Common& c) {
    std::cout << load_config(c).to_text();
    return 0;
}

int cmd_selfcheck(const Common& c, bool perturb) {
    SelfcheckOptions opt;
    opt.perturb_dmsa_weight = perturb;
    if (c.seed) opt.seed = *c.seed;
    const SelfcheckReport report = selfcheck(opt);
    report.print(std::cout);
    return report.all_passed() ? 0 : 1;
}

int cmd_bench(const Common& c, const std::string& csv, bool quick) {
    BenchConfig bc;
    if (c.seed) bc.seed = *c.seed;
    if (quick) {
        bc.sides = {16, 32, 64};
        bc.repeats = 1;
    }
    const BenchTable table = bench(bc);
    table.print_text(std::cout);
    const std::string path = !csv.empty() ? csv : c.out;
    if (!path.empty()) {
        std::ofstream f(path);
        if (!f) throw StageError("bench", "cannot write " + path);
        table.print_csv(f);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radar BEV feature extraction and radar/camera BEV fusion"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "Key-value config file");
        sub->add_option("--seed", common.seed, "Seed for weights, synthetic scenes and camera fields");
        sub->add_option("--weights", common.weights, "Weight manifest (JSON); default is seeded init");
        sub->add_flag("--dump-intermediates", common.dump, "Write intermediate grids next to the output");
        sub->add_option("--out", common.out, "Output path");
    };

    std::string input, radar_path, camera_path, csv;
    bool perturb = false, quick = false;

    auto* extract = app.add_subcommand("extract", "Radar file -> radar BEV grid");
    extract->add_option("input", input, "Radar CSV (.bin for the binary format); default synthetic scene");
    auto* fuse = app.add_subcommand("fuse", "Radar BEV + camera BEV -> fused BEV grid");
    fuse->add_option("radar", radar_path, "Radar BEV grid file")->required();
    fuse->add_option("camera", camera_path, "Camera BEV grid file; default synthetic field");
    auto* run = app.add_subcommand("run", "Full pipeline: radar file -> fused BEV grid");
    run->add_option("input", input, "Radar CSV (.bin for the binary format); default synthetic scene");
    auto* synth = app.add_subcommand("synth", "Synthetic clustered scene -> radar file");
    auto* gen_cam = app.add_subcommand("gen-cam", "Synthetic camera BEV grid");
    auto* init = app.add_subcommand("init-weights", "Write seeded weights to a manifest + payload");
    auto* show = app.add_subcommand("print-config", "Print the effective configuration");
    auto* check = app.add_subcommand("selfcheck", "Oracle and identity checks");
    check->add_flag("--perturb-dmsa", perturb, "Perturb one DMSA weight seen by the implementation only");
    auto* bench_cmd = app.add_subcommand("bench", "Deformable vs dense cross-attention scaling");
    bench_cmd->add_option("--csv", csv, "Also write the table as CSV");
    bench_cmd->add_flag("--quick", quick, "Three sizes, single run each");
    for (auto* sub : {extract, fuse, run, synth, gen_cam, init, show}) add_common(sub);
    check->add_option("--seed", common.seed, "Seed for the random check instances");
    bench_cmd->add_option("--seed", common.seed, "Seed for the benchmark inputs");
    bench_cmd->add_option("--out", common.out, "CSV output path (same as --csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: stage 'cli' failed: " << e.what() << "\nRun with --help for more information.\n";
        return 2;
    }

    try {
        if (*extract) return cmd_extract(common, input);
        if (*fuse) return cmd_fuse(common, radar_path, camera_path);
        if (*run) return cmd_run(common, input);
        if (*synth) return cmd_synth(common);
        if (*gen_cam) return cmd_gen_cam(common);
        if (*init) return cmd_init_weights(common);
        if (*show) return cmd_print_config(common);
        if (*check) return cmd_selfcheck(common, perturb);
        if (*bench_cmd) return cmd_bench(common, csv, quick);
    } catch (const StageError& e) {
        std::cerr << "error: stage '" << e.stage() << "' failed: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: stage '" << app.get_subcommands().front()->get_name() << "' failed: " << e.what()
                  << '\n';
        return 2;
    }
    return 0;
}
