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

#include "flashmat/serialization.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flashmat/io.hpp"

namespace flashmat {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected a JSON object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* what) {
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) {
      throw FormatError(std::string(what) + ": unknown field '" + item.key() + "'");
    }
  }
}

const json& field(const json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

double number(const json& j, const char* key, const char* what) {
  const json& v = field(j, key, what);
  if (!v.is_number()) throw FormatError(std::string(what) + ": '" + key + "' must be a number");
  return v.get<double>();
}

Vec3 vec3(const json& j, const char* key, const char* what) {
  const json& v = field(j, key, what);
  if (!v.is_array() || v.size() != 3) {
    throw FormatError(std::string(what) + ": '" + key + "' must be an array of 3 numbers");
  }
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    if (!v[c].is_number()) {
      throw FormatError(std::string(what) + ": '" + key + "' must be an array of 3 numbers");
    }
    out[c] = v[c].get<double>();
  }
  return out;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
T integer(const json& j, const char* key, const char* what) {
  const json& v = field(j, key, what);
  if (!v.is_number_integer()) {
    throw FormatError(std::string(what) + ": '" + key + "' must be an integer");
  }
  return v.get<T>();
}

}  // namespace

SceneConfig parse_scene_config(const std::string& json_text) {
  constexpr const char* what = "scene config";
  const json j = parse_json(json_text, what);
  require_object(j, what);
  reject_unknown(j,
                 {"fov_deg", "surface_half_extent", "light_position", "light_intensity", "ambient",
                  "resolution"},
                 what);
  const json& res = field(j, "resolution", what);
  if (!res.is_array() || res.size() != 2 || !res[0].is_number_integer() ||
      !res[1].is_number_integer()) {
    throw FormatError("scene config: 'resolution' must be [height, width]");
  }
  SceneConfig c;
  c.resolution = {res[0].get<int>(), res[1].get<int>()};
  if (j.contains("fov_deg")) c.fov_deg = number(j, "fov_deg", what);
  if (j.contains("surface_half_extent")) {
    c.surface_half_extent = number(j, "surface_half_extent", what);
  }
  // collocated flash and unit center radiance unless given
  const double h = c.camera_height();
  c.light_position = j.contains("light_position") ? vec3(j, "light_position", what)
                                                   : c.camera_position();
  c.light_intensity = j.contains("light_intensity")
                          ? vec3(j, "light_intensity", what)
                          : Vec3::Constant(kDefaultCenterRadiance * h * h);
  if (j.contains("ambient")) c.ambient = vec3(j, "ambient", what);
  try {
    validate_scene(c);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("scene config: ") + e.what());
  }
  return c;
}

std::string dump_scene_config(const SceneConfig& c) {
  json j;
  j["fov_deg"] = c.fov_deg;
  j["surface_half_extent"] = c.surface_half_extent;
  j["light_position"] = to_json(c.light_position);
  j["light_intensity"] = to_json(c.light_intensity);
  j["ambient"] = to_json(c.ambient);
  j["resolution"] = json::array({c.resolution.height, c.resolution.width});
  return j.dump(2);
}

SceneConfig load_scene_config(const std::filesystem::path& path) {
  return parse_scene_config(read_text_file(path));
}

void save_scene_config(const std::filesystem::path& path, const SceneConfig& config) {
  write_text_file(path, dump_scene_config(config) + "\n");
}

namespace {

DcrfPreset preset_from_json(const json& j) {
  constexpr const char* what = "DCRF preset";
  require_object(j, what);
  reject_unknown(j, {"name", "kernels", "unary", "iterations", "tolerance"}, what);
  DcrfPreset p;
  const json& name = field(j, "name", what);
  if (!name.is_string()) throw FormatError("DCRF preset: 'name' must be a string");
  p.name = name.get<std::string>();
  const json& kernels = field(j, "kernels", what);
  if (!kernels.is_array()) throw FormatError("DCRF preset: 'kernels' must be an array");
  for (const json& k : kernels) {
    require_object(k, "DCRF kernel");
    reject_unknown(k, {"beta", "groups"}, "DCRF kernel");
    KernelSpec spec;
    spec.beta = number(k, "beta", "DCRF kernel");
    const json& groups = field(k, "groups", "DCRF kernel");
    if (!groups.is_array() || groups.empty()) {
      throw FormatError("DCRF kernel: 'groups' must be a non-empty array");
    }
    for (const json& g : groups) {
      require_object(g, "DCRF kernel group");
      reject_unknown(g, {"feature", "std"}, "DCRF kernel group");
      const json& feature = field(g, "feature", "DCRF kernel group");
      if (!feature.is_string()) throw FormatError("DCRF kernel group: 'feature' must be a string");
      const double std = number(g, "std", "DCRF kernel group");
      if (!(std > 0.0)) throw FormatError("DCRF kernel group: 'std' must be positive");
      spec.groups.push_back({feature_kind_from_string(feature.get<std::string>()), std});
    }
    p.kernels.push_back(std::move(spec));
  }
  const json& unary = field(j, "unary", what);
  if (!unary.is_array()) throw FormatError("DCRF preset: 'unary' must be an array");
  for (const json& u : unary) {
    if (!u.is_number()) throw FormatError("DCRF preset: 'unary' entries must be numbers");
    p.unary_coefficients.push_back(u.get<double>());
  }
  if (j.contains("iterations")) p.iterations = integer<int>(j, "iterations", what);
  if (j.contains("tolerance")) p.tolerance = number(j, "tolerance", what);
  return p;
}

json preset_to_json(const DcrfPreset& p) {
  json kernels = json::array();
  for (const KernelSpec& k : p.kernels) {
    json groups = json::array();
    for (const FeatureGroup& g : k.groups) {
      groups.push_back({{"feature", to_string(g.kind)}, {"std", g.std}});
    }
    kernels.push_back({{"beta", k.beta}, {"groups", groups}});
  }
  return {{"name", p.name},
          {"kernels", kernels},
          {"unary", p.unary_coefficients},
          {"iterations", p.iterations},
          {"tolerance", p.tolerance}};
}

}  // namespace

DcrfPreset parse_dcrf_preset(const std::string& json_text) {
  return preset_from_json(parse_json(json_text, "DCRF preset"));
}

std::string dump_dcrf_preset(const DcrfPreset& preset) { return preset_to_json(preset).dump(2); }

std::vector<DcrfPreset> load_dcrf_presets(const std::filesystem::path& path) {
  const json j = parse_json(read_text_file(path), "DCRF preset file");
  require_object(j, "DCRF preset file");
  if (!j.contains("classes")) return {preset_from_json(j)};
  reject_unknown(j, {"classes"}, "DCRF preset file");
  const json& classes = j.at("classes");
  if (!classes.is_array() || classes.empty()) {
    throw FormatError("DCRF preset file: 'classes' must be a non-empty array");
  }
  std::vector<DcrfPreset> out;
  for (const json& c : classes) out.push_back(preset_from_json(c));
  return out;
}

AugmentPlan parse_augment_plan(const std::string& json_text) {
  constexpr const char* what = "augment plan";
  const json j = parse_json(json_text, what);
  require_object(j, what);
  reject_unknown(j, {"crop_sizes", "crop_counts", "output_size", "seed"}, what);
  AugmentPlan plan;
  auto int_list = [&](const char* key) {
    const json& v = field(j, key, what);
    if (!v.is_array()) throw FormatError(std::string(what) + ": '" + key + "' must be an array");
    std::vector<int> out;
    for (const json& x : v) {
      if (!x.is_number_integer()) {
        throw FormatError(std::string(what) + ": '" + key + "' entries must be integers");
      }
      out.push_back(x.get<int>());
    }
    return out;
  };
  if (j.contains("crop_sizes")) plan.crop_sizes = int_list("crop_sizes");
  if (j.contains("crop_counts")) plan.crop_counts = int_list("crop_counts");
  if (j.contains("output_size")) plan.output_size = integer<int>(j, "output_size", what);
  if (j.contains("seed")) plan.seed = integer<std::uint64_t>(j, "seed", what);
  try {
    validate(plan);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return plan;
}

std::string dump_augment_plan(const AugmentPlan& plan) {
  const json j = {{"crop_sizes", plan.crop_sizes},
                  {"crop_counts", plan.crop_counts},
                  {"output_size", plan.output_size},
                  {"seed", plan.seed}};
  return j.dump(2);
}

PsObservationSet load_ps_manifest(const std::filesystem::path& path) {
  constexpr const char* what = "photometric stereo manifest";
  const json j = parse_json(read_text_file(path), what);
  require_object(j, what);
  reject_unknown(j, {"images", "light_dirs", "trim_high", "trim_low"}, what);
  const json& images = field(j, "images", what);
  const json& lights = field(j, "light_dirs", what);
  if (!images.is_array() || !lights.is_array() || images.size() != lights.size()) {
    throw FormatError("photometric stereo manifest: 'images' and 'light_dirs' must be arrays of "
                      "equal length");
  }
  PsObservationSet obs;
  const std::filesystem::path base = path.parent_path();
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (!images[k].is_string()) {
      throw FormatError("photometric stereo manifest: image entries must be paths");
    }
    std::filesystem::path p = images[k].get<std::string>();
    obs.images.push_back(read_pfm_color(p.is_absolute() ? p : base / p));
    const json& d = lights[k];
    if (!d.is_array() || d.size() != 3 || !d[0].is_number() || !d[1].is_number() ||
        !d[2].is_number()) {
      throw FormatError("photometric stereo manifest: light directions must be [x, y, z]");
    }
    const Vec3 dir(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
    if (!(dir.norm() > 0.0)) throw FormatError("photometric stereo manifest: zero light direction");
    obs.light_dirs.push_back(dir.normalized());
  }
  if (j.contains("trim_high")) obs.trim_high = integer<int>(j, "trim_high", what);
  if (j.contains("trim_low")) obs.trim_low = integer<int>(j, "trim_low", what);
  return obs;
}

std::string to_string(MapEncoding e) {
  return e == MapEncoding::kLinearFloat ? "linear-float" : "8-bit-encoded";
}

MapFileSet parse_map_file_set(const std::string& json_text, const std::filesystem::path& base_dir) {
  constexpr const char* what = "map manifest";
  const json j = parse_json(json_text, what);
  require_object(j, what);
  reject_unknown(j, {"albedo", "normal", "roughness", "encoding", "f0"}, what);
  auto path_of = [&](const char* key) {
    const json& v = field(j, key, what);
    if (!v.is_string()) throw FormatError(std::string(what) + ": '" + key + "' must be a path");
    std::filesystem::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  MapFileSet set;
  set.albedo_path = path_of("albedo");
  set.normal_path = path_of("normal");
  set.roughness_path = path_of("roughness");
  if (j.contains("encoding")) {
    const json& e = j.at("encoding");
    const std::string name = e.is_string() ? e.get<std::string>() : "";
    if (name == "linear-float") {
      set.encoding = MapEncoding::kLinearFloat;
    } else if (name == "8-bit-encoded") {
      set.encoding = MapEncoding::kEightBit;
    } else {
      throw FormatError("map manifest: encoding must be 'linear-float' or '8-bit-encoded'");
    }
  }
  if (j.contains("f0")) set.f0 = number(j, "f0", what);
  return set;
}

std::string dump_map_file_set(const MapFileSet& set) {
  const json j = {{"albedo", set.albedo_path.string()},
                  {"normal", set.normal_path.string()},
                  {"roughness", set.roughness_path.string()},
                  {"encoding", to_string(set.encoding)},
                  {"f0", set.f0}};
  return j.dump(2);
}

SvbrdfMaps load_maps(const MapFileSet& set) {
  SvbrdfMaps maps;
  maps.f0 = set.f0;
  if (set.encoding == MapEncoding::kLinearFloat) {
    maps.albedo = read_pfm_color(set.albedo_path);
    maps.normal = read_pfm_color(set.normal_path);
    maps.roughness = read_pfm_gray(set.roughness_path);
    // float storage: restore exact unit length
    for (Vec3& n : maps.normal) n.normalize();
  } else {
    maps.albedo = decode_albedo_png(read_png(set.albedo_path));
    maps.normal = decode_normal_png(read_png(set.normal_path));
    maps.roughness = decode_gray_png(read_png(set.roughness_path));
  }
  validate_maps(maps);
  return maps;
}

SvbrdfMaps load_maps(const std::filesystem::path& manifest) {
  return load_maps(parse_map_file_set(read_text_file(manifest), manifest.parent_path()));
}

std::filesystem::path save_maps(const std::filesystem::path& dir, const SvbrdfMaps& maps,
                                MapEncoding encoding, const std::string& stem) {
  std::filesystem::create_directories(dir);
  MapFileSet set;
  set.encoding = encoding;
  set.f0 = maps.f0;
  const std::string ext = encoding == MapEncoding::kLinearFloat ? ".pfm" : ".png";
  set.albedo_path = stem + "albedo" + ext;
  set.normal_path = stem + "normal" + ext;
  set.roughness_path = stem + "roughness" + ext;
  if (encoding == MapEncoding::kLinearFloat) {
    write_pfm(dir / set.albedo_path, maps.albedo);
    write_pfm(dir / set.normal_path, maps.normal);
    write_pfm(dir / set.roughness_path, maps.roughness);
  } else {
    write_png(dir / set.albedo_path, encode_albedo_png(maps.albedo));
    write_png(dir / set.normal_path, encode_normal_png(maps.normal));
    write_png(dir / set.roughness_path, preview_gray(maps.roughness));
  }
  const std::filesystem::path manifest = dir / (stem + "maps.json");
  write_text_file(manifest, dump_map_file_set(set) + "\n");
  return manifest;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

}  // namespace flashmat
