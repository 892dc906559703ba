// Copyright 2026 The Flashmat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flashmat/augment.hpp"
#include "flashmat/dcrf.hpp"
#include "flashmat/diff_render.hpp"
#include "flashmat/estimators.hpp"
#include "flashmat/io.hpp"
#include "flashmat/losses.hpp"
#include "flashmat/photometric_stereo.hpp"
#include "flashmat/scene.hpp"
#include "flashmat/serialization.hpp"
#include "flashmat/version.hpp"

namespace flashmat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  std::ostream& out;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

Vec3 mean_of(const Image<Vec3>& image) {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& v : image) sum += v;
  return image.size() == 0 ? sum : Vec3(sum / static_cast<double>(image.size()));
}

double mean_of(const ScalarMap& map) {
  const double sum = std::accumulate(map.begin(), map.end(), 0.0);
  return map.size() == 0 ? 0.0 : sum / static_cast<double>(map.size());
}

void emit(Context& ctx, const json& summary) { ctx.out << summary.dump() << '\n'; }

void require_matching_resolution(const SceneConfig& scene, Extent maps, const char* what) {
  if (!(scene.resolution == maps)) {
    throw DimensionError(std::string(what) + ": scene resolution " + to_string(scene.resolution) +
                         " does not match maps " + to_string(maps));
  }
}

ViewModel parse_view(const std::string& name) {
  if (name == "pinhole") return ViewModel::kPinhole;
  if (name == "distant") return ViewModel::kDistant;
  throw InvalidArgument("unknown view model '" + name + "'");
}

json stats_json(const DiscrepancyStats& s) {
  return {{"max_rel_error", s.max_rel_error},
          {"max_abs_error", s.max_abs_error},
          {"max_abs_error_small", s.max_abs_error_small},
          {"compared", s.compared},
          {"failures", s.failures}};
}

// ---------------------------------------------------------------- render

struct RenderOpts {
  std::string scene, maps, out, preview, view = "pinhole";
};

void add_render(CLI::App& app, RenderOpts& o) {
  app.add_option("--scene", o.scene, "Scene config JSON")->required();
  app.add_option("--maps", o.maps, "Map manifest JSON")->required();
  app.add_option("--out", o.out, "Output radiance PFM")->required();
  app.add_option("--preview", o.preview, "Optional tonemapped PNG preview");
  app.add_option("--view", o.view, "View model: pinhole or distant");
}

void run_render(Context& ctx, const RenderOpts& o) {
  const SceneConfig scene = load_scene_config(o.scene);
  const SvbrdfMaps maps = load_maps(fs::path(o.maps));
  require_matching_resolution(scene, maps.extent(), "render");
  const RadianceImage image = render_image(maps, scene, parse_view(o.view));
  write_pfm(o.out, image);
  if (!o.preview.empty()) write_png(o.preview, preview_image(image));
  emit(ctx, {{"command", "render"},
             {"out", o.out},
             {"height", image.height()},
             {"width", image.width()},
             {"mean_radiance", vec_json(mean_of(image))}});
}

// ---------------------------------------------------------------- relight

struct RelightOpts {
  std::string scene, maps, out, preview, view = "pinhole";
  std::vector<double> light;
  double radius = 0.0;
};

void add_relight(CLI::App& app, RelightOpts& o) {
  app.add_option("--scene", o.scene, "Scene config JSON")->required();
  app.add_option("--maps", o.maps, "Map manifest JSON")->required();
  app.add_option("--out", o.out, "Output radiance PFM")->required();
  app.add_option("--preview", o.preview, "Optional tonemapped PNG preview");
  app.add_option("--view", o.view, "View model: pinhole or distant");
  auto* light = app.add_option("--light", o.light, "Light position x,y,z")
                    ->expected(3)
                    ->delimiter(',');
  app.add_option("--radius", o.radius,
                 "Hemisphere radius for a seeded random light (default: camera height)")
      ->excludes(light)
      ->check(CLI::PositiveNumber);
}

void run_relight(Context& ctx, const RelightOpts& o) {
  SceneConfig scene = load_scene_config(o.scene);
  const SvbrdfMaps maps = load_maps(fs::path(o.maps));
  require_matching_resolution(scene, maps.extent(), "relight");
  if (!o.light.empty()) {
    scene.light_position = to_vec3(o.light);
  } else {
    const double radius = o.radius > 0.0 ? o.radius : scene.camera_height();
    scene.light_position = sample_novel_light(ctx.seed, radius);
  }
  validate_scene(scene);
  const RadianceImage image = render_image(maps, scene, parse_view(o.view));
  write_pfm(o.out, image);
  if (!o.preview.empty()) write_png(o.preview, preview_image(image));
  emit(ctx, {{"command", "relight"},
             {"out", o.out},
             {"light_position", vec_json(scene.light_position)},
             {"seed", ctx.seed},
             {"mean_radiance", vec_json(mean_of(image))}});
}

// ---------------------------------------------------------------- grid search

struct GridOpts {
  std::string scene, image, maps, out;
  GridSearchConfig gs;
};

void add_grid_options(CLI::App& app, GridSearchConfig& gs) {
  app.add_option("--levels", gs.levels, "Coarse-to-fine levels")->capture_default_str();
  app.add_option("--samples", gs.coarse_samples, "Samples per level")->capture_default_str();
  app.add_option("--range-min", gs.range_min, "Lower roughness bound")->capture_default_str();
  app.add_option("--range-max", gs.range_max, "Upper roughness bound")->capture_default_str();
  app.add_option("--shrink", gs.shrink, "Bracket shrink per level")->capture_default_str();
}

void add_gridsearch(CLI::App& app, GridOpts& o) {
  app.add_option("--scene", o.scene, "Scene config JSON")->required();
  app.add_option("--image", o.image, "Observed flash image PFM")->required();
  app.add_option("--maps", o.maps, "Map manifest supplying albedo, normal and f0")->required();
  app.add_option("--out", o.out, "Output roughness PFM")->required();
  add_grid_options(app, o.gs);
}

void run_gridsearch(Context& ctx, const GridOpts& o) {
  validate(o.gs);
  const SceneConfig scene = load_scene_config(o.scene);
  const RadianceImage observed = read_pfm_color(o.image);
  const SvbrdfMaps maps = load_maps(fs::path(o.maps));
  require_same_extent(observed, maps.albedo, "gridsearch-rough");
  require_matching_resolution(scene, observed.extent(), "gridsearch-rough");
  const ScalarMap rough =
      roughness_grid_search(observed, maps.albedo, maps.normal, maps.f0, scene, o.gs);
  write_pfm(o.out, rough);
  const auto [lo, hi] = std::minmax_element(rough.begin(), rough.end());
  emit(ctx, {{"command", "gridsearch-rough"},
             {"out", o.out},
             {"finest_spacing", finest_grid_spacing(o.gs)},
             {"mean_roughness", mean_of(rough)},
             {"min_roughness", *lo},
             {"max_roughness", *hi}});
}

// ---------------------------------------------------------------- fit

struct FitOpts {
  std::string scene, image, init, out_dir, trace;
  double f0 = kF0NonMetal;
  FitConfig fit;
  GridSearchConfig gs;
};

void add_fit(CLI::App& app, FitOpts& o) {
  app.add_option("--scene", o.scene, "Scene config JSON")->required();
  app.add_option("--image", o.image, "Observed flash image PFM")->required();
  app.add_option("--init", o.init,
                 "Initial map manifest (default: flat normals, observation-derived albedo and "
                 "grid-search roughness)");
  app.add_option("--out-dir", o.out_dir, "Directory for the fitted maps")->required();
  app.add_option("--trace", o.trace, "Write the loss trace as JSON");
  app.add_option("--f0", o.f0, "F0 when no initial maps are given")->capture_default_str();
  app.add_option("--iters", o.fit.max_iters, "Maximum iterations")->capture_default_str();
  app.add_option("--step-albedo", o.fit.step_albedo, "Albedo step size")->capture_default_str();
  app.add_option("--step-normal", o.fit.step_normal, "Normal step size")->capture_default_str();
  app.add_option("--step-roughness", o.fit.step_roughness, "Roughness step size")->capture_default_str();
  app.add_option("--tolerance", o.fit.loss_tolerance, "Stop when loss falls below")
      ->capture_default_str();
  add_grid_options(app, o.gs);
}

SvbrdfMaps default_fit_init(const RadianceImage& observed, const SceneConfig& scene, double f0,
                            const GridSearchConfig& gs) {
  SvbrdfMaps init;
  init.f0 = f0;
  init.albedo = albedo_from_observation(observed, scene);
  init.normal = NormalMap(observed.extent(), Vec3::UnitZ());
  init.roughness = roughness_grid_search(observed, init.albedo, init.normal, f0, scene, gs);
  project_to_valid(init);
  return init;
}

void run_fit(Context& ctx, const FitOpts& o) {
  validate(o.fit);
  validate(o.gs);
  const SceneConfig scene = load_scene_config(o.scene);
  const RadianceImage observed = read_pfm_color(o.image);
  require_matching_resolution(scene, observed.extent(), "fit");
  const SvbrdfMaps init = o.init.empty() ? default_fit_init(observed, scene, o.f0, o.gs)
                                         : load_maps(fs::path(o.init));
  require_same_extent(observed, init.albedo, "fit");
  const FitResult result = fit_svbrdf_gd(observed, init, scene, o.fit);
  const fs::path manifest = save_maps(o.out_dir, result.maps);
  if (!o.trace.empty()) write_text_file(o.trace, json{{"loss_trace", result.loss_trace}}.dump());
  const double first = result.loss_trace.front();
  const double last = result.loss_trace.back();
  emit(ctx, {{"command", "fit"},
             {"maps", manifest.string()},
             {"iterations", result.iterations},
             {"accepted_steps", result.loss_trace.size() - 1},
             {"initial_loss", first},
             {"final_loss", last},
             {"reduction", last > 0.0 ? first / last : 0.0}});
}

// ---------------------------------------------------------------- dcrf-refine

struct DcrfOpts {
  std::string image, maps, grid_rough, scene, out_dir;
  std::string stages = "diffuse,normal,roughness";
  std::string diffuse_preset, normal_preset, roughness_preset;
  std::vector<double> class_probs;
  std::string mode = "gauss-seidel";
  int iterations = 0;
  double truncate_below = 0.0;
  GridSearchConfig gs;
};

void add_dcrf(CLI::App& app, DcrfOpts& o) {
  app.add_option("--image", o.image, "Input flash image PFM")->required();
  app.add_option("--maps", o.maps, "Predicted map manifest")->required();
  app.add_option("--out-dir", o.out_dir, "Directory for the refined maps")->required();
  app.add_option("--stages", o.stages, "Comma-separated subset of diffuse,normal,roughness")
      ->capture_default_str();
  app.add_option("--grid-rough", o.grid_rough, "Grid-search roughness PFM");
  app.add_option("--scene", o.scene, "Scene config, used to run the grid search when needed");
  app.add_option("--diffuse-preset", o.diffuse_preset, "Preset JSON (single or per class)");
  app.add_option("--normal-preset", o.normal_preset, "Preset JSON (single or per class)");
  app.add_option("--roughness-preset", o.roughness_preset, "Preset JSON (single or per class)");
  app.add_option("--class-probs", o.class_probs, "Classifier probabilities p1,...,pK")
      ->delimiter(',');
  app.add_option("--mode", o.mode, "gauss-seidel or jacobi")->capture_default_str();
  app.add_option("--iterations", o.iterations, "Override the preset sweep count");
  app.add_option("--truncate-below", o.truncate_below, "Drop pairwise weights below this")
      ->check(CLI::NonNegativeNumber);
  add_grid_options(app, o.gs);
}

DcrfPreset resolve_preset(const std::string& builtin, const std::string& file,
                          const std::vector<double>& class_probs) {
  if (file.empty()) return preset_by_name(builtin);
  const std::vector<DcrfPreset> presets = load_dcrf_presets(file);
  if (presets.size() == 1 && class_probs.empty()) return presets.front();
  if (class_probs.size() != presets.size()) {
    throw InvalidArgument("--class-probs needs one probability per preset class (" +
                          std::to_string(presets.size()) + ")");
  }
  return blend_presets_by_class(presets, class_probs);
}

json solve_stage(const char* name, DcrfProblem& problem, const DcrfOpts& o, ChannelMap& out) {
  if (o.mode == "jacobi") {
    problem.mode = SweepMode::kJacobi;
  } else if (o.mode != "gauss-seidel") {
    throw InvalidArgument("unknown sweep mode '" + o.mode + "'");
  }
  if (o.iterations > 0) problem.iterations = o.iterations;
  problem.truncate_below = o.truncate_below;
  const DcrfResult r = dcrf_solve(problem);
  out = r.solution;
  return {{"stage", name},
          {"sweeps", r.sweeps},
          {"converged", r.converged},
          {"last_update", r.last_update}};
}

void run_dcrf(Context& ctx, const DcrfOpts& o) {
  std::vector<std::string> stages;
  {
    std::stringstream ss(o.stages);
    for (std::string s; std::getline(ss, s, ',');) {
      if (s != "diffuse" && s != "normal" && s != "roughness") {
        throw InvalidArgument("unknown stage '" + s + "'");
      }
      stages.push_back(s);
    }
  }
  auto wants = [&](const char* s) {
    return std::find(stages.begin(), stages.end(), s) != stages.end();
  };
  const RadianceImage input = read_pfm_color(o.image);
  SvbrdfMaps maps = load_maps(fs::path(o.maps));
  require_same_extent(input, maps.albedo, "dcrf-refine");
  json report = json::array();
  ChannelMap solution;

  if (wants("diffuse")) {
    DcrfProblem p = make_diffuse_problem(
        resolve_preset("diffuse", o.diffuse_preset, o.class_probs), input, maps.albedo);
    report.push_back(solve_stage("diffuse", p, o, solution));
    maps.albedo = to_vec3_map(solution);
  }
  if (wants("normal")) {
    DcrfProblem p = make_normal_problem(
        resolve_preset("normal", o.normal_preset, o.class_probs), maps.normal, maps.albedo);
    report.push_back(solve_stage("normal", p, o, solution));
    maps.normal = to_vec3_map(solution);
  }
  if (wants("roughness")) {
    ScalarMap grid;
    if (!o.grid_rough.empty()) {
      grid = read_pfm_gray(o.grid_rough);
    } else if (!o.scene.empty()) {
      validate(o.gs);
      const SceneConfig scene = load_scene_config(o.scene);
      require_matching_resolution(scene, input.extent(), "dcrf-refine");
      grid = roughness_grid_search(input, maps.albedo, maps.normal, maps.f0, scene, o.gs);
    } else {
      throw InvalidArgument("roughness stage needs --grid-rough or --scene");
    }
    DcrfProblem p =
        make_roughness_problem(resolve_preset("roughness", o.roughness_preset, o.class_probs),
                               input, maps.roughness, grid, maps.albedo);
    report.push_back(solve_stage("roughness", p, o, solution));
    maps.roughness = to_scalar_map(solution);
  }
  project_to_valid(maps);
  const fs::path manifest = save_maps(o.out_dir, maps);
  emit(ctx, {{"command", "dcrf-refine"}, {"maps", manifest.string()}, {"stages", report}});
}

// ---------------------------------------------------------------- ps

struct PsOpts {
  std::string manifest, out_dir;
  std::optional<int> trim_high, trim_low;
};

void add_ps(CLI::App& app, PsOpts& o) {
  app.add_option("--manifest", o.manifest, "Image and light-direction manifest JSON")->required();
  app.add_option("--out-dir", o.out_dir, "Directory for normal and albedo outputs")->required();
  app.add_option("--trim-high", o.trim_high, "Brightest observations dropped per pixel");
  app.add_option("--trim-low", o.trim_low, "Darkest observations dropped per pixel");
}

void run_ps(Context& ctx, const PsOpts& o) {
  PsObservationSet obs = load_ps_manifest(o.manifest);
  if (o.trim_high) obs.trim_high = *o.trim_high;
  if (o.trim_low) obs.trim_low = *o.trim_low;
  const PsResult r = lambertian_ps(obs);
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  write_pfm(dir / "normal.pfm", r.normal);
  write_pfm(dir / "albedo.pfm", r.albedo);
  write_png(dir / "normal.png", encode_normal_png(r.normal));
  const auto degenerate = std::count(r.degenerate.begin(), r.degenerate.end(), 1);
  emit(ctx, {{"command", "ps"},
             {"normal", (dir / "normal.pfm").string()},
             {"albedo", (dir / "albedo.pfm").string()},
             {"observations", obs.images.size()},
             {"trim_high", obs.trim_high},
             {"trim_low", obs.trim_low},
             {"degenerate_pixels", degenerate}});
}

// ---------------------------------------------------------------- augment

struct AugmentOpts {
  std::string plan, maps, out_dir;
  std::string encoding = "linear-float";
};

void add_augment(CLI::App& app, AugmentOpts& o) {
  app.add_option("--plan", o.plan, "Augmentation plan JSON")->required();
  app.add_option("--maps", o.maps, "Source map manifest")->required();
  app.add_option("--out-dir", o.out_dir, "Directory for patches and their manifest")->required();
  app.add_option("--encoding", o.encoding, "linear-float or 8-bit-encoded")
      ->capture_default_str();
}

void run_augment(Context& ctx, const AugmentOpts& o) {
  MapEncoding encoding;
  if (o.encoding == "linear-float") {
    encoding = MapEncoding::kLinearFloat;
  } else if (o.encoding == "8-bit-encoded") {
    encoding = MapEncoding::kEightBit;
  } else {
    throw InvalidArgument("unknown encoding '" + o.encoding + "'");
  }
  AugmentPlan plan = parse_augment_plan(read_text_file(o.plan));
  if (ctx.seed_given) plan.seed = ctx.seed;
  const SvbrdfMaps source = load_maps(fs::path(o.maps));
  const std::vector<PatchDescriptor> patches = patch_plan(plan, source.extent());
  const fs::path dir(o.out_dir);
  json entries = json::array();
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const PatchDescriptor& p = patches[k];
    char stem[32];
    std::snprintf(stem, sizeof stem, "patch_%04zu_", k);
    const fs::path manifest =
        save_maps(dir, augment_patch(source, p, plan.output_size), encoding, stem);
    const ScaleDraws s = draw_patch_scales(p);
    entries.push_back({{"maps", manifest.filename().string()},
                       {"crop_x", p.crop_x},
                       {"crop_y", p.crop_y},
                       {"crop_size", p.crop_size},
                       {"flip", to_string(p.flip)},
                       {"rotation_deg", p.rotation_deg},
                       {"draw_seed", p.draw_seed},
                       {"albedo_scale", s.albedo},
                       {"normal_scale", s.normal},
                       {"roughness_scale", s.roughness}});
  }
  const json manifest = {{"plan", json::parse(dump_augment_plan(plan))},
                         {"source", o.maps},
                         {"patches", entries}};
  write_text_file(dir / "augment.json", manifest.dump(2) + "\n");
  emit(ctx, {{"command", "augment"},
             {"manifest", (dir / "augment.json").string()},
             {"patches", patches.size()},
             {"seed", plan.seed}});
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckOpts {
  std::string scene, maps, report;
  int pixels = 64;
  double step = 1e-4;
};

void add_gradcheck(CLI::App& app, GradcheckOpts& o) {
  app.add_option("--scene", o.scene, "Scene config JSON")->required();
  app.add_option("--maps", o.maps, "Map manifest JSON")->required();
  app.add_option("--pixels", o.pixels, "Number of sampled pixels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--step", o.step, "Central-difference step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--report", o.report, "Also write the report to this file");
}

void run_gradcheck(Context& ctx, const GradcheckOpts& o) {
  const SceneConfig scene = load_scene_config(o.scene);
  const SvbrdfMaps maps = load_maps(fs::path(o.maps));
  require_matching_resolution(scene, maps.extent(), "gradcheck");
  std::vector<std::pair<int, int>> all;
  for (int r = 0; r < maps.extent().height; ++r) {
    for (int c = 0; c < maps.extent().width; ++c) all.emplace_back(r, c);
  }
  std::vector<std::pair<int, int>> sample;
  std::mt19937_64 rng(ctx.seed);
  std::sample(all.begin(), all.end(), std::back_inserter(sample),
              static_cast<std::size_t>(o.pixels), rng);
  const GradcheckReport r = finite_diff_check(maps, scene, o.step, sample);
  const json report = {{"command", "gradcheck"},
                       {"step", r.step},
                       {"seed", ctx.seed},
                       {"pixels_checked", r.checked_pixels.size()},
                       {"pixels_skipped", r.skipped_pixels.size()},
                       {"rel_tolerance", kGradcheckRelTol},
                       {"abs_tolerance", kGradcheckAbsTol},
                       {"albedo", stats_json(r.albedo)},
                       {"normal", stats_json(r.normal)},
                       {"roughness", stats_json(r.roughness)},
                       {"passed", r.passed()}};
  if (!o.report.empty()) write_text_file(o.report, report.dump(2) + "\n");
  emit(ctx, report);
}

// ---------------------------------------------------------------- loss-eval

struct LossOpts {
  std::string pred, target, scene;
  int novel_lights = 0;
  double radius = 0.0;
  LossWeights weights;
};

void add_loss(CLI::App& app, LossOpts& o) {
  app.add_option("--pred", o.pred, "Predicted map manifest")->required();
  app.add_option("--target", o.target, "Target map manifest")->required();
  app.add_option("--scene", o.scene, "Scene config JSON")->required();
  app.add_option("--novel-lights", o.novel_lights, "Seeded random extra lights")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--radius", o.radius, "Novel light radius (default: camera height)")
      ->check(CLI::PositiveNumber);
  app.add_option("--lambda-d", o.weights.lambda_d, "Diffuse loss weight")->capture_default_str();
  app.add_option("--lambda-n", o.weights.lambda_n, "Normal loss weight")->capture_default_str();
  app.add_option("--lambda-r", o.weights.lambda_r, "Roughness loss weight")->capture_default_str();
  app.add_option("--lambda-rec", o.weights.lambda_rec, "Reconstruction loss weight")->capture_default_str();
}

void run_loss(Context& ctx, const LossOpts& o) {
  const SceneConfig scene = load_scene_config(o.scene);
  const SvbrdfMaps pred = load_maps(fs::path(o.pred));
  const SvbrdfMaps target = load_maps(fs::path(o.target));
  require_same_extent(pred.albedo, target.albedo, "loss-eval");
  require_matching_resolution(scene, target.extent(), "loss-eval");
  const double radius = o.radius > 0.0 ? o.radius : scene.camera_height();
  std::vector<Vec3> lights;
  for (int k = 0; k < o.novel_lights; ++k) {
    lights.push_back(sample_novel_light(ctx.seed + static_cast<std::uint64_t>(k), radius));
  }
  const NormalBinTable table = make_normal_bin_table();
  const LossBreakdown b = total_loss(pred, target, o.weights, table, scene, lights);
  emit(ctx, {{"command", "loss-eval"},
             {"albedo", b.albedo},
             {"normal", b.normal},
             {"roughness", b.roughness},
             {"recon", b.recon},
             {"total", b.total},
             {"novel_lights", lights.size()},
             {"normal_bin_weights", table.weights}});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"flashmat: flash-lit SVBRDF rendering, fitting and refinement", "flashmat"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{out};
  auto* seed = app.add_option("--seed", ctx.seed, "Seed for all randomness")->capture_default_str();

  RenderOpts render;
  RelightOpts relight;
  FitOpts fit;
  GridOpts grid;
  DcrfOpts dcrf;
  PsOpts ps;
  AugmentOpts augment;
  GradcheckOpts gradcheck;
  LossOpts loss;

  std::vector<std::pair<CLI::App*, std::function<void()>>> commands;
  auto add = [&](const char* name, const char* help, auto& opts, auto adder, auto runner) {
    CLI::App* sub = app.add_subcommand(name, help);
    adder(*sub, opts);
    commands.emplace_back(sub, [&ctx, &opts, runner] { runner(ctx, opts); });
  };
  add("render", "Render maps under the scene's flash light", render, add_render, run_render);
  add("relight", "Render maps under a given or seeded novel light", relight, add_relight,
      run_relight);
  add("fit", "Fit maps to an observed image by projected gradient descent", fit, add_fit, run_fit);
  add("gridsearch-rough", "Per-pixel coarse-to-fine roughness search", grid, add_gridsearch,
      run_gridsearch);
  add("dcrf-refine", "Refine diffuse, normal and roughness maps with dense CRFs", dcrf, add_dcrf,
      run_dcrf);
  add("ps", "Lambertian photometric stereo with per-pixel trimming", ps, add_ps, run_ps);
  add("augment", "Cut, transform and rescale training patches", augment, add_augment,
      run_augment);
  add("gradcheck", "Compare analytic gradients with central differences", gradcheck,
      add_gradcheck, run_gradcheck);
  add("loss-eval", "Evaluate the weighted loss between two map sets", loss, add_loss, run_loss);

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }
  std::vector<const char*> argv{"flashmat"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  ctx.seed_given = seed->count() > 0;

  try {
    for (auto& [sub, runner] : commands) {
      if (sub->parsed()) runner();
    }
  } catch (const InvalidArgument& e) {
    err << "flashmat: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "flashmat: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "flashmat: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace flashmat::cli
