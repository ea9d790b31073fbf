#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elastofm/background.hpp"
#include "elastofm/crack.hpp"
#include "elastofm/medium.hpp"
#include "elastofm/surface.hpp"

namespace elastofm {

/// One closed interface of a scene background.
struct InterfaceSpec {
  SurfaceKind kind = SurfaceKind::Sphere;
  Vec3 center = Vec3::Zero();
  Vec3 semi_axes = Vec3::Ones();
  double radius = 1.0;
  double side = 1.0;
  ElasticMedium interior;
  int mesh_level = 5;  // icosphere frequency / cube facets per side
};

/// Crack patch on one interface: a spherical-cap-style predicate around an
/// axis (selects centroids with axis-angle cosine above the threshold), or a
/// flat penny crack for the homogeneous scene.
struct CrackSpec {
  bool penny = false;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  Vec3 normal = Vec3(0, 0, 1);
  int refinement = 2;
  int host_interface = -1;  // patch: index into interfaces
  Vec3 cap_axis = Vec3(0, 0, 1);
  double cap_cos = 0.7;
  double stiffness_scale = 1.0;  // K = scale * I in the local frame
};

struct SamplingSpec {
  SurfaceSpec surface;
  int n_u = 10, n_v = 10;
};

/// Fully specified experiment scene.
struct ScenePreset {
  std::string name;
  ElasticMedium exterior{1.5, 1.0, 1.0};
  std::vector<InterfaceSpec> interfaces;  // empty: homogeneous background
  std::vector<CrackSpec> cracks;
  double omega = 4.0;
  int n_theta = 20, n_phi = 10;
  double target_delta = 0.05;   // primary noise measure
  double target_delta_b = 0.05; // secondary noise measure (background data)
  double tau = 0.1;
  std::vector<SamplingSpec> sampling;
  bool best_effort = false;  // multi-layer fidelity outside the validated range
};

inline std::vector<std::string> preset_names() {
  return {"penny-homogeneous", "inclusion-validation", "composite1", "composite2"};
}

inline ScenePreset preset(const std::string& name) {
  ScenePreset p;
  p.name = name;
  if (name == "penny-homogeneous") {
    CrackSpec ck;
    ck.penny = true;
    ck.center = Vec3::Zero();
    ck.radius = 1.0;
    ck.normal = Vec3(0, 0, 1);
    ck.refinement = 2;
    ck.stiffness_scale = 1.0;
    p.cracks.push_back(ck);
    SamplingSpec s;
    s.surface.kind = SurfaceKind::PlanarPatch;
    s.surface.center = Vec3::Zero();
    s.surface.normal = Vec3(0, 0, 1);
    s.surface.half_u = s.surface.half_v = 1.6;
    s.n_u = s.n_v = 24;
    p.sampling.push_back(s);
    return p;
  }
  if (name == "inclusion-validation") {
    InterfaceSpec sph;
    sph.kind = SurfaceKind::Sphere;
    sph.radius = 0.5;  // k_s radius = 2 at omega 4
    sph.interior = ElasticMedium{0.4, 0.2, 0.5};
    sph.mesh_level = 6;
    p.interfaces.push_back(sph);
    SamplingSpec s;
    s.surface.kind = SurfaceKind::Sphere;
    s.surface.radius = 0.5;
    s.n_u = 10;
    s.n_v = 20;
    p.sampling.push_back(s);
    return p;
  }
  if (name == "composite1") {
    // three-layer ellipsoidal composite, desk-scaled to one penetrable
    // inclusion on the outer interface; the inner core survives as a
    // sampling surface but is not part of the forward solve
    p.best_effort = true;
    InterfaceSpec outer;
    outer.kind = SurfaceKind::Ellipsoid;
    outer.semi_axes = Vec3(4.5, 4.0, 6.0);
    outer.interior = ElasticMedium{0.4, 0.2, 0.75};
    outer.mesh_level = 10;
    p.interfaces.push_back(outer);
    CrackSpec ck;
    ck.host_interface = 0;
    ck.cap_axis = Vec3(0, 0, 1);
    ck.cap_cos = 0.75;
    ck.stiffness_scale = 1.0;
    p.cracks.push_back(ck);
    SamplingSpec s1;  // outer interface, 1600 points
    s1.surface.kind = SurfaceKind::Ellipsoid;
    s1.surface.semi_axes = Vec3(4.5, 4.0, 6.0);
    s1.n_u = 40;
    s1.n_v = 40;
    SamplingSpec s2;  // inner interface, 625 points (2225 total)
    s2.surface.kind = SurfaceKind::Ellipsoid;
    s2.surface.semi_axes = Vec3(3.0, 2.5, 2.0);
    s2.n_u = 25;
    s2.n_v = 25;
    p.sampling.push_back(s1);
    p.sampling.push_back(s2);
    return p;
  }
  if (name == "composite2") {
    p.best_effort = true;
    const ElasticMedium inc{0.4, 0.2, 0.5};
    InterfaceSpec ell;
    ell.kind = SurfaceKind::Ellipsoid;
    ell.semi_axes = Vec3(3.0, 2.0, 4.0);
    ell.interior = inc;
    ell.mesh_level = 9;
    InterfaceSpec sph;
    sph.kind = SurfaceKind::Sphere;
    sph.center = Vec3(0, -4, -2);
    sph.radius = 2.0;
    sph.interior = inc;
    sph.mesh_level = 7;
    InterfaceSpec cub;
    cub.kind = SurfaceKind::Cube;
    cub.center = Vec3(0, 3, 3);
    cub.side = 1.8;
    cub.interior = inc;
    cub.mesh_level = 6;
    p.interfaces = {ell, sph, cub};
    CrackSpec c0;  // traction-free patch on the ellipsoid
    c0.host_interface = 0;
    c0.cap_axis = Vec3(0, 0, 1);
    c0.cap_cos = 0.75;
    c0.stiffness_scale = 0.0;
    CrackSpec c1;  // stiffness 2I patches on sphere and cube
    c1.host_interface = 1;
    c1.cap_axis = Vec3(0, 0, 1);
    c1.cap_cos = 0.7;
    c1.stiffness_scale = 2.0;
    CrackSpec c2;
    c2.host_interface = 2;
    c2.cap_axis = Vec3(0, 0, 1);
    c2.cap_cos = 0.95;
    c2.stiffness_scale = 2.0;
    p.cracks = {c0, c1, c2};
    SamplingSpec s1;  // 900 on the ellipsoid
    s1.surface.kind = SurfaceKind::Ellipsoid;
    s1.surface.semi_axes = Vec3(3.0, 2.0, 4.0);
    s1.n_u = 30;
    s1.n_v = 30;
    SamplingSpec s2;  // 200 on the sphere
    s2.surface.kind = SurfaceKind::Sphere;
    s2.surface.center = Vec3(0, -4, -2);
    s2.surface.radius = 2.0;
    s2.n_u = 10;
    s2.n_v = 20;
    SamplingSpec s3;  // 150 on the cube
    s3.surface.kind = SurfaceKind::Cube;
    s3.surface.center = Vec3(0, 3, 3);
    s3.surface.side = 1.8;
    s3.n_u = 5;
    s3.n_v = 5;
    p.sampling = {s1, s2, s3};
    return p;
  }
  std::string names;
  for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
  throw ValidationError("unknown preset '" + name + "'; available: " + names);
}

inline void validate_preset(const ScenePreset& p) {
  p.exterior.validate("exterior");
  for (const auto& itf : p.interfaces) {
    itf.interior.validate("interior");
    require(check_monotonicity(itf.interior, p.exterior),
            "preset violates the monotonicity condition on an interface");
  }
  require(p.omega > 0, "preset frequency must be positive");
  require(p.n_theta >= 2 && p.n_phi >= 2, "preset grid too small");
}

}  // namespace elastofm
