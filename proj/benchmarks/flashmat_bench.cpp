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

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "flashmat/dcrf.hpp"
#include "flashmat/diff_render.hpp"
#include "flashmat/estimators.hpp"
#include "flashmat/photometric_stereo.hpp"
#include "flashmat/scene.hpp"
#include "test_support.hpp"

namespace {

using namespace flashmat;

void BM_RenderImage(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Extent e{size, size};
  const SceneConfig scene = default_scene(e);
  const SvbrdfMaps maps = testing::random_smooth_maps(e, 1, 0.2, 0.6, 0.2, 0.8, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(render_image(maps, scene));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_RenderImage)->Arg(64)->Arg(256);

void BM_RenderWithGradients(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Extent e{size, size};
  const SceneConfig scene = default_scene(e);
  const SvbrdfMaps maps = testing::random_smooth_maps(e, 2, 0.2, 0.6, 0.2, 0.8, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(render_with_gradients(maps, scene));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_RenderWithGradients)->Arg(64)->Arg(256);

void BM_RoughnessGridSearch(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Extent e{size, size};
  const SceneConfig scene = default_scene(e);
  const SvbrdfMaps maps = testing::random_smooth_maps(e, 3, 0.2, 0.6, 0.2, 0.8, 0.3);
  const RadianceImage obs = render_image(maps, scene);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        roughness_grid_search(obs, maps.albedo, maps.normal, maps.f0, scene));
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_RoughnessGridSearch)->Arg(32)->Arg(128);

// range(1) != 0 selects the windowed sparse path
void BM_DcrfDiffuseSolve(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Extent e{size, size};
  const SceneConfig scene = default_scene(e);
  const SvbrdfMaps maps = testing::random_smooth_maps(e, 4, 0.2, 0.6, 0.2, 0.8, 0.3);
  const RadianceImage input = render_image(maps, scene);
  DcrfProblem problem = make_diffuse_problem(diffuse_preset(), input, maps.albedo);
  if (state.range(1) != 0) problem.truncate_below = 1e-6;
  for (auto _ : state) benchmark::DoNotOptimize(dcrf_solve(problem));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_DcrfDiffuseSolve)->Args({16, 0})->Args({32, 0})->Args({32, 1})->Args({48, 1});

void BM_LambertianPs(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const NormalMap normal = testing::sphere_normals(size, 45.0);
  const ColorMap albedo(normal.extent(), Vec3(0.6, 0.5, 0.4));
  PsObservationSet obs;
  obs.light_dirs = testing::random_light_dirs(52, 40.0, 7);
  obs.images = testing::lambertian_images(normal, albedo, obs.light_dirs);
  for (auto _ : state) benchmark::DoNotOptimize(lambertian_ps(obs));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_LambertianPs)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
