#pragma once

#include <json.hpp>
#include <set>
#include <string>

#include "elastofm/presets.hpp"

namespace elastofm {

using json = nlohmann::json;

/// Schema violation with the offending path in `what()`.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct StageToggles {
  bool forward_only = false;
  bool invert_only = false;
  std::string archive_dir;  // input archives for invert_only
};

enum class MethodKind { Tikhonov, Picard };

struct ExperimentConfig {
  int version = 1;
  std::string preset_name;         // one of preset_name / inline_scene
  std::optional<ScenePreset> inline_scene;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::optional<double> epsilon;        // explicit noise amplitude
  std::optional<double> target_delta;   // calibrated noise measure
  MethodKind method = MethodKind::Tikhonov;
  int picard_np = 0;  // 0: noise-floor rule
  std::optional<double> tau;
  std::string out_dir = "out";
  StageToggles stages;
  int threads = 0;
  int crack_refinement = 0;  // 0: preset default
  double mesh_scale = 1.0;   // multiplies interface mesh levels
  bool vtk_export = false;   // also write indicator.vtk (legacy polydata)

  ScenePreset scene() const {
    ScenePreset p = inline_scene ? *inline_scene : preset(preset_name);
    if (tau) p.tau = *tau;
    if (target_delta) {
      p.target_delta = *target_delta;
      p.target_delta_b = *target_delta;
    }
    if (crack_refinement > 0)
      for (auto& c : p.cracks) c.refinement = crack_refinement;
    if (mesh_scale != 1.0)
      for (auto& itf : p.interfaces)
        itf.mesh_level = std::max(2, int(itf.mesh_level * mesh_scale));
    validate_preset(p);
    return p;
  }
};

namespace cfg_detail {

inline void expect_keys(const json& j, const std::set<std::string>& allowed,
                        const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError(path + ": unknown key '" + it.key() + "'");
  }
}

inline double num(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + ": missing field '" + key + "'");
  if (!j[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

inline json vec3_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
inline Vec3 vec3_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline std::string kind_name(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Sphere: return "sphere";
    case SurfaceKind::Ellipsoid: return "ellipsoid";
    case SurfaceKind::Cube: return "cube";
    case SurfaceKind::PlanarPatch: return "planar-patch";
  }
  return "?";
}

}  // namespace cfg_detail

inline json to_json(const ElasticMedium& m) {
  return json{{"lambda", m.lambda}, {"mu", m.mu}, {"rho", m.rho}};
}

inline ElasticMedium medium_from_json(const json& j, const std::string& path) {
  cfg_detail::expect_keys(j, {"lambda", "mu", "rho"}, path);
  ElasticMedium m;
  m.lambda = cfg_detail::num(j, "lambda", path);
  m.mu = cfg_detail::num(j, "mu", path);
  m.rho = cfg_detail::num(j, "rho", path);
  return m;
}

inline json to_json(const SurfaceSpec& s) {
  json j;
  j["kind"] = cfg_detail::kind_name(s.kind);
  j["center"] = cfg_detail::vec3_to_json(s.center);
  switch (s.kind) {
    case SurfaceKind::Sphere: j["radius"] = s.radius; break;
    case SurfaceKind::Ellipsoid: j["semi_axes"] = cfg_detail::vec3_to_json(s.semi_axes); break;
    case SurfaceKind::Cube: j["side"] = s.side; break;
    case SurfaceKind::PlanarPatch:
      j["normal"] = cfg_detail::vec3_to_json(s.normal);
      j["half_u"] = s.half_u;
      j["half_v"] = s.half_v;
      break;
  }
  return j;
}

inline SurfaceSpec surface_from_json(const json& j, const std::string& path) {
  cfg_detail::expect_keys(
      j, {"kind", "center", "radius", "semi_axes", "side", "normal", "half_u", "half_v"}, path);
  if (!j.contains("kind")) throw ConfigError(path + ": missing field 'kind'");
  SurfaceSpec s;
  s.kind = surface_kind_from(j["kind"].get<std::string>());
  if (j.contains("center")) s.center = cfg_detail::vec3_from_json(j["center"], path + ".center");
  switch (s.kind) {
    case SurfaceKind::Sphere: s.radius = cfg_detail::num(j, "radius", path); break;
    case SurfaceKind::Ellipsoid:
      s.semi_axes = cfg_detail::vec3_from_json(j.at("semi_axes"), path + ".semi_axes");
      break;
    case SurfaceKind::Cube: s.side = cfg_detail::num(j, "side", path); break;
    case SurfaceKind::PlanarPatch:
      s.normal = cfg_detail::vec3_from_json(j.at("normal"), path + ".normal");
      s.half_u = cfg_detail::num(j, "half_u", path);
      s.half_v = cfg_detail::num(j, "half_v", path);
      break;
  }
  return s;
}

inline json to_json(const ScenePreset& p) {
  json j;
  j["name"] = p.name;
  j["exterior"] = to_json(p.exterior);
  j["omega"] = p.omega;
  j["n_theta"] = p.n_theta;
  j["n_phi"] = p.n_phi;
  j["target_delta"] = p.target_delta;
  j["target_delta_b"] = p.target_delta_b;
  j["tau"] = p.tau;
  j["best_effort"] = p.best_effort;
  j["interfaces"] = json::array();
  for (const auto& itf : p.interfaces) {
    json ji;
    ji["kind"] = cfg_detail::kind_name(itf.kind);
    ji["center"] = cfg_detail::vec3_to_json(itf.center);
    ji["semi_axes"] = cfg_detail::vec3_to_json(itf.semi_axes);
    ji["radius"] = itf.radius;
    ji["side"] = itf.side;
    ji["interior"] = to_json(itf.interior);
    ji["mesh_level"] = itf.mesh_level;
    j["interfaces"].push_back(ji);
  }
  j["cracks"] = json::array();
  for (const auto& c : p.cracks) {
    json jc;
    jc["penny"] = c.penny;
    jc["center"] = cfg_detail::vec3_to_json(c.center);
    jc["radius"] = c.radius;
    jc["normal"] = cfg_detail::vec3_to_json(c.normal);
    jc["refinement"] = c.refinement;
    jc["host_interface"] = c.host_interface;
    jc["cap_axis"] = cfg_detail::vec3_to_json(c.cap_axis);
    jc["cap_cos"] = c.cap_cos;
    jc["stiffness_scale"] = c.stiffness_scale;
    j["cracks"].push_back(jc);
  }
  j["sampling"] = json::array();
  for (const auto& s : p.sampling) {
    json js;
    js["surface"] = to_json(s.surface);
    js["n_u"] = s.n_u;
    js["n_v"] = s.n_v;
    j["sampling"].push_back(js);
  }
  return j;
}

inline ScenePreset scene_from_json(const json& j, const std::string& path) {
  cfg_detail::expect_keys(j,
                          {"name", "exterior", "omega", "n_theta", "n_phi", "target_delta",
                           "target_delta_b", "tau", "best_effort", "interfaces", "cracks",
                           "sampling"},
                          path);
  ScenePreset p;
  if (j.contains("name")) p.name = j["name"].get<std::string>();
  if (j.contains("exterior")) p.exterior = medium_from_json(j["exterior"], path + ".exterior");
  if (j.contains("omega")) p.omega = cfg_detail::num(j, "omega", path);
  if (j.contains("n_theta")) p.n_theta = j["n_theta"].get<int>();
  if (j.contains("n_phi")) p.n_phi = j["n_phi"].get<int>();
  if (j.contains("target_delta")) p.target_delta = j["target_delta"].get<double>();
  if (j.contains("target_delta_b")) p.target_delta_b = j["target_delta_b"].get<double>();
  if (j.contains("tau")) p.tau = j["tau"].get<double>();
  if (j.contains("best_effort")) p.best_effort = j["best_effort"].get<bool>();
  if (j.contains("interfaces")) {
    int k = 0;
    for (const auto& ji : j["interfaces"]) {
      const std::string ip = path + ".interfaces[" + std::to_string(k++) + "]";
      cfg_detail::expect_keys(
          ji, {"kind", "center", "semi_axes", "radius", "side", "interior", "mesh_level"}, ip);
      InterfaceSpec itf;
      itf.kind = surface_kind_from(ji.at("kind").get<std::string>());
      itf.center = cfg_detail::vec3_from_json(ji.at("center"), ip + ".center");
      itf.semi_axes = cfg_detail::vec3_from_json(ji.at("semi_axes"), ip + ".semi_axes");
      itf.radius = cfg_detail::num(ji, "radius", ip);
      itf.side = cfg_detail::num(ji, "side", ip);
      itf.interior = medium_from_json(ji.at("interior"), ip + ".interior");
      itf.mesh_level = ji.at("mesh_level").get<int>();
      p.interfaces.push_back(itf);
    }
  }
  if (j.contains("cracks")) {
    int k = 0;
    for (const auto& jc : j["cracks"]) {
      const std::string cp = path + ".cracks[" + std::to_string(k++) + "]";
      cfg_detail::expect_keys(jc,
                              {"penny", "center", "radius", "normal", "refinement",
                               "host_interface", "cap_axis", "cap_cos", "stiffness_scale"},
                              cp);
      CrackSpec c;
      c.penny = jc.at("penny").get<bool>();
      c.center = cfg_detail::vec3_from_json(jc.at("center"), cp + ".center");
      c.radius = cfg_detail::num(jc, "radius", cp);
      c.normal = cfg_detail::vec3_from_json(jc.at("normal"), cp + ".normal");
      c.refinement = jc.at("refinement").get<int>();
      c.host_interface = jc.at("host_interface").get<int>();
      c.cap_axis = cfg_detail::vec3_from_json(jc.at("cap_axis"), cp + ".cap_axis");
      c.cap_cos = cfg_detail::num(jc, "cap_cos", cp);
      c.stiffness_scale = cfg_detail::num(jc, "stiffness_scale", cp);
      p.cracks.push_back(c);
    }
  }
  if (j.contains("sampling")) {
    int k = 0;
    for (const auto& js : j["sampling"]) {
      const std::string sp = path + ".sampling[" + std::to_string(k++) + "]";
      cfg_detail::expect_keys(js, {"surface", "n_u", "n_v"}, sp);
      SamplingSpec s;
      s.surface = surface_from_json(js.at("surface"), sp + ".surface");
      s.n_u = js.at("n_u").get<int>();
      s.n_v = js.at("n_v").get<int>();
      p.sampling.push_back(s);
    }
  }
  return p;
}

inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  cfg_detail::expect_keys(j,
                          {"version", "scene", "seed", "noise", "method", "tau", "out_dir",
                           "stages", "threads", "crack_refinement", "mesh_scale", "vtk_export"},
                          "config");
  ExperimentConfig c;
  if (j.contains("version")) c.version = j["version"].get<int>();
  if (c.version != 1) throw ConfigError("config.version: unsupported version");
  if (!j.contains("scene")) throw ConfigError("config: missing field 'scene'");
  if (j["scene"].is_string())
    c.preset_name = j["scene"].get<std::string>();
  else
    c.inline_scene = scene_from_json(j["scene"], "config.scene");
  if (!j.contains("seed")) throw ConfigError("config: missing field 'seed'");
  if (!j["seed"].is_number_unsigned()) throw ConfigError("config.seed: expected an unsigned integer");
  c.seed = j["seed"].get<std::uint64_t>();
  c.has_seed = true;
  if (j.contains("noise")) {
    cfg_detail::expect_keys(j["noise"], {"epsilon", "target_delta"}, "config.noise");
    if (j["noise"].contains("epsilon")) c.epsilon = j["noise"]["epsilon"].get<double>();
    if (j["noise"].contains("target_delta"))
      c.target_delta = j["noise"]["target_delta"].get<double>();
    if (c.epsilon && c.target_delta)
      throw ConfigError("config.noise: give either epsilon or target_delta, not both");
  }
  if (j.contains("method")) {
    cfg_detail::expect_keys(j["method"], {"type", "np"}, "config.method");
    const std::string t = j["method"].at("type").get<std::string>();
    if (t == "tikhonov")
      c.method = MethodKind::Tikhonov;
    else if (t == "picard")
      c.method = MethodKind::Picard;
    else
      throw ConfigError("config.method.type: expected 'tikhonov' or 'picard'");
    if (j["method"].contains("np")) c.picard_np = j["method"]["np"].get<int>();
  }
  if (j.contains("tau")) c.tau = j["tau"].get<double>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("stages")) {
    cfg_detail::expect_keys(j["stages"], {"forward_only", "invert_only", "archive_dir"},
                            "config.stages");
    if (j["stages"].contains("forward_only"))
      c.stages.forward_only = j["stages"]["forward_only"].get<bool>();
    if (j["stages"].contains("invert_only"))
      c.stages.invert_only = j["stages"]["invert_only"].get<bool>();
    if (j["stages"].contains("archive_dir"))
      c.stages.archive_dir = j["stages"]["archive_dir"].get<std::string>();
    if (c.stages.forward_only && c.stages.invert_only)
      throw ConfigError("config.stages: forward_only and invert_only are mutually exclusive");
  }
  if (j.contains("threads")) c.threads = j["threads"].get<int>();
  if (j.contains("crack_refinement")) c.crack_refinement = j["crack_refinement"].get<int>();
  if (j.contains("mesh_scale")) c.mesh_scale = j["mesh_scale"].get<double>();
  if (j.contains("vtk_export")) c.vtk_export = j["vtk_export"].get<bool>();
  return c;
}

inline std::string emit_config(const ExperimentConfig& c) {
  json j;
  j["version"] = c.version;
  if (c.inline_scene)
    j["scene"] = to_json(*c.inline_scene);
  else
    j["scene"] = c.preset_name;
  j["seed"] = c.seed;
  json noise = json::object();
  if (c.epsilon) noise["epsilon"] = *c.epsilon;
  if (c.target_delta) noise["target_delta"] = *c.target_delta;
  j["noise"] = noise;
  j["method"] = json{{"type", c.method == MethodKind::Tikhonov ? "tikhonov" : "picard"},
                     {"np", c.picard_np}};
  if (c.tau) j["tau"] = *c.tau;
  j["out_dir"] = c.out_dir;
  j["stages"] = json{{"forward_only", c.stages.forward_only},
                     {"invert_only", c.stages.invert_only},
                     {"archive_dir", c.stages.archive_dir}};
  j["threads"] = c.threads;
  j["crack_refinement"] = c.crack_refinement;
  j["mesh_scale"] = c.mesh_scale;
  j["vtk_export"] = c.vtk_export;
  return j.dump(2) + "\n";
}

}  // namespace elastofm
