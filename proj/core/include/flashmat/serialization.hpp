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

// JSON documents: scene configs, DCRF presets, augmentation plans and map
// file manifests. Unknown fields are rejected everywhere.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flashmat/augment.hpp"
#include "flashmat/dcrf.hpp"
#include "flashmat/photometric_stereo.hpp"
#include "flashmat/scene.hpp"

namespace flashmat {

SceneConfig parse_scene_config(const std::string& json_text);
std::string dump_scene_config(const SceneConfig& config);
SceneConfig load_scene_config(const std::filesystem::path& path);
void save_scene_config(const std::filesystem::path& path, const SceneConfig& config);

DcrfPreset parse_dcrf_preset(const std::string& json_text);
std::string dump_dcrf_preset(const DcrfPreset& preset);
// Either a single preset object or {"classes": [preset, ...]}.
std::vector<DcrfPreset> load_dcrf_presets(const std::filesystem::path& path);

AugmentPlan parse_augment_plan(const std::string& json_text);
std::string dump_augment_plan(const AugmentPlan& plan);

// {"images": [...], "light_dirs": [[x, y, z], ...], "trim_high": 5, "trim_low": 5}
// Image paths are PFM files relative to the manifest; light directions are
// normalized on load.
PsObservationSet load_ps_manifest(const std::filesystem::path& path);

enum class MapEncoding { kLinearFloat, kEightBit };

std::string to_string(MapEncoding e);

struct MapFileSet {
  std::filesystem::path albedo_path;
  std::filesystem::path normal_path;
  std::filesystem::path roughness_path;
  MapEncoding encoding = MapEncoding::kLinearFloat;
  double f0 = kF0NonMetal;
};

// Relative paths resolve against base_dir.
MapFileSet parse_map_file_set(const std::string& json_text,
                              const std::filesystem::path& base_dir);
std::string dump_map_file_set(const MapFileSet& set);

SvbrdfMaps load_maps(const MapFileSet& set);
SvbrdfMaps load_maps(const std::filesystem::path& manifest);

// Writes <stem>albedo/normal/roughness files plus <stem>maps.json into dir and
// returns the manifest path.
std::filesystem::path save_maps(const std::filesystem::path& dir, const SvbrdfMaps& maps,
                                MapEncoding encoding = MapEncoding::kLinearFloat,
                                const std::string& stem = "");

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace flashmat
