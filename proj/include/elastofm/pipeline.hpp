#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "elastofm/archive.hpp"
#include "elastofm/config.hpp"
#include "elastofm/cracksys.hpp"
#include "elastofm/inversion.hpp"
#include "elastofm/presets.hpp"
#include "elastofm/version.hpp"

namespace elastofm {

// ---------------------------------------------------------------------------
// Scene construction
// ---------------------------------------------------------------------------

struct BuiltCrack {
  CrackGeometry geom;
  std::vector<int> host_nodes;  // crack node -> background mesh node (patch cracks)
};

struct BuiltScene {
  ScenePreset spec;
  DirectionGrid grid;
  std::shared_ptr<Background> bg;
  std::vector<BuiltCrack> cracks;
  SamplingSurface sampling;  // merged over the preset's sampling specs
  std::vector<std::string> warnings;
};

inline TriMesh interface_mesh(const InterfaceSpec& itf) {
  switch (itf.kind) {
    case SurfaceKind::Sphere:
      return sphere_mesh(itf.center, itf.radius, itf.mesh_level);
    case SurfaceKind::Ellipsoid:
      return ellipsoid_mesh(itf.center, itf.semi_axes, itf.mesh_level);
    case SurfaceKind::Cube:
      return cube_mesh(itf.center, itf.side, itf.mesh_level);
    default:
      throw ValidationError("interface kind must be a closed surface");
  }
}

inline BuiltScene build_scene(const ScenePreset& spec) {
  validate_preset(spec);
  BuiltScene sc;
  sc.spec = spec;
  sc.grid = direction_grid(spec.n_theta, spec.n_phi);

  std::vector<TriMesh> parts;
  std::vector<int> part_offsets;
  if (spec.interfaces.empty()) {
    sc.bg = std::make_shared<Background>(BackgroundModel(HomogeneousBackground{spec.exterior}),
                                         spec.omega);
  } else {
    std::vector<ElasticMedium> interiors;
    int offset = 0;
    for (const auto& itf : spec.interfaces) {
      parts.push_back(interface_mesh(itf));
      part_offsets.push_back(offset);
      offset += static_cast<int>(parts.back().verts.size());
      interiors.push_back(itf.interior);
    }
    TriMesh merged = parts.size() == 1 ? parts[0] : merge_meshes(parts);
    sc.bg = std::make_shared<Background>(
        BackgroundModel(PenetrableInclusionBackground(std::move(merged), interiors,
                                                      spec.exterior)),
        spec.omega);
  }

  for (const auto& cs : spec.cracks) {
    BuiltCrack bc;
    if (cs.penny) {
      bc.geom = penny_crack(cs.center, cs.radius, cs.normal, cs.refinement);
    } else {
      require(cs.host_interface >= 0 &&
                  cs.host_interface < static_cast<int>(spec.interfaces.size()),
              "crack host interface out of range");
      const TriMesh& host = parts[cs.host_interface];
      const Vec3 c = spec.interfaces[cs.host_interface].center;
      const Vec3 axis = cs.cap_axis.normalized();
      std::vector<int> host_vertex;
      bc.geom = surface_patch(
          host,
          [&](const Vec3& x) { return (x - c).normalized().dot(axis) > cs.cap_cos; },
          &host_vertex);
      bc.host_nodes.resize(host_vertex.size());
      for (std::size_t i = 0; i < host_vertex.size(); ++i)
        bc.host_nodes[i] = part_offsets[cs.host_interface] + host_vertex[i];
    }
    bc.geom.set_uniform_stiffness(cs.stiffness_scale * CMat3::Identity());
    sc.cracks.push_back(std::move(bc));
  }

  for (const auto& ss : spec.sampling) {
    SamplingSurface part = parametric_surface(ss.surface, ss.n_u, ss.n_v);
    sc.sampling.points.insert(sc.sampling.points.end(), part.points.begin(), part.points.end());
    sc.sampling.normals.insert(sc.sampling.normals.end(), part.normals.begin(),
                               part.normals.end());
  }
  sc.sampling.kind = spec.sampling.empty() ? SurfaceKind::Sphere : spec.sampling[0].surface.kind;
  // truth flags: points within one mesh width of a crack
  sc.sampling.truth.assign(sc.sampling.points.size(), false);
  for (const auto& bc : sc.cracks) {
    const double h = bc.geom.mesh.max_edge();
    for (int p = 0; p < sc.sampling.size(); ++p) {
      if (sc.sampling.truth[p]) continue;
      double best = 1e300;
      for (int v = 0; v < bc.geom.n_nodes(); ++v)
        best = std::min(best, (sc.sampling.points[p] - bc.geom.mesh.verts[v]).norm());
      if (best <= h) sc.sampling.truth[p] = true;
    }
  }
  return sc;
}

// ---------------------------------------------------------------------------
// Forward stage
// ---------------------------------------------------------------------------

struct ForwardData {
  FarFieldMatrix f;    // measured (damaged) far-field matrix
  FarFieldMatrix f_b;  // background far-field matrix
  std::vector<std::string> warnings;
};

/// Crack contribution in a penetrable background, desk-scale decoupled
/// approximation: the crack self-interaction uses the exterior-medium kernel,
/// while incident tractions and the radiation kernel use the exact background
/// data on the interface (Cauchy traces of the cached plane-wave solves).
inline CMatX crack_contribution_inclusion(const BuiltScene& sc, const BuiltCrack& bc) {
  const Background& bg = *sc.bg;
  auto& solver = bg.solver();
  const DirectionGrid& grid = sc.grid;
  require(!bc.host_nodes.empty(), "inclusion crack needs the host node map");
  require(grid.antipodal_closed(), "inclusion crack radiation needs an antipodal grid");

  CrackSystem sys(bc.geom, bg.wn().exterior, bg.omega());
  const int nn = bc.geom.n_nodes();
  const int n = grid.size();

  // incident tractions and radiation kernels at the crack nodes, from the
  // background Cauchy data (traction is continuous across the interface)
  CMatX t_inc(3 * nn, 3 * n);      // columns: incidence d_j
  std::vector<CMatX> rad_kernel(n, CMatX(3 * nn, 3));  // per xihat_i: nodes x 3
  for (int j = 0; j < n; ++j) {
    const auto& r = bg.plane_solution(grid.dirs[j]);
    const auto& rm = bg.plane_solution(Vec3(-grid.dirs[j]));
    for (int a = 0; a < nn; ++a) {
      const int hv = bc.host_nodes[a];
      t_inc.block<3, 3>(3 * a, 3 * j) =
          r.s.middleRows<3>(3 * hv) + r.tinc.middleRows<3>(3 * hv);
      rad_kernel[j].middleRows<3>(3 * a) =
          (rm.s.middleRows<3>(3 * hv) + rm.tinc.middleRows<3>(3 * hv)).transpose();
    }
  }
  // solve per incidence
  CMatX openings(3 * nn, 3 * n);
  for (int j = 0; j < 3 * n; ++j) {
    CVecX t_nodes = t_inc.col(j);
    openings.col(j) = sys.solve_load(sys.load_from_nodal_traction(t_nodes));
  }
  // radiate with nodal-interpolated background kernels
  CMatX out = CMatX::Zero(3 * n, 3 * n);
  const TriMesh& mesh = bc.geom.mesh;
  for (int i = 0; i < n; ++i) {
    CMatX radmat = CMatX::Zero(3, 3 * nn);
    for (int e = 0; e < (int)mesh.tris.size(); ++e) {
      const auto& tr = mesh.tris[e];
      std::vector<QuadPoint> qs;
      tri_gauss(mesh.verts[tr[0]], mesh.verts[tr[1]], mesh.verts[tr[2]], 2, qs);
      for (const auto& q : qs) {
        const double b[3] = {q.b0, q.b1, q.b2};
        CMat3 dq = CMat3::Zero();
        for (int k = 0; k < 3; ++k)
          dq += b[k] * rad_kernel[i].middleRows<3>(3 * tr[k]);
        for (int k = 0; k < 3; ++k)
          radmat.middleCols<3>(3 * tr[k]) += (q.w * b[k]) * dq;
      }
    }
    out.middleRows<3>(3 * i) = radmat * openings;
  }
  return out;
}

inline ForwardData forward_solve(const BuiltScene& sc) {
  ForwardData fd;
  auto bff = background_far_matrix(*sc.bg, sc.grid);
  fd.f_b = bff.f_b;
  fd.f = fd.f_b;
  fd.f.role = FarFieldRole::F;
  if (!sc.bg->homogeneous()) {
    auto& solver = sc.bg->solver();
    fd.warnings.insert(fd.warnings.end(), solver.warnings.begin(), solver.warnings.end());
  }
  for (const auto& bc : sc.cracks) {
    if (sc.bg->homogeneous()) {
      CrackSystem sys(bc.geom, sc.bg->wn().exterior, sc.bg->omega());
      fd.warnings.insert(fd.warnings.end(), sys.warnings.begin(), sys.warnings.end());
      FarFieldMatrix contrib = measured_far_matrix_homogeneous(sys, sc.grid);
      fd.f.a += contrib.a;
    } else {
      fd.f.a += crack_contribution_inclusion(sc, bc);
      fd.warnings.push_back(
          "crack in a penetrable background: decoupled desk-scale approximation "
          "(crack self-interaction uses the exterior kernel)");
    }
  }
  return fd;
}

// ---------------------------------------------------------------------------
// Inversion stage
// ---------------------------------------------------------------------------

struct InversionArtifacts {
  FarFieldMatrix f_delta, f_b_delta;
  FarFieldMatrix s_b;
  FSharpResult fs;
  IndicatorMap map;          // thresholded values included
  double epsilon = 0.0, epsilon_b = 0.0;
  double realized_delta = 0.0, realized_delta_b = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

inline std::uint64_t secondary_seed(std::uint64_t seed) {
  return seed ^ 0x9e3779b97f4a7c15ULL;
}

inline InversionArtifacts invert_stage(const BuiltScene& sc, const FarFieldMatrix& f,
                                       const FarFieldMatrix& f_b, const ExperimentConfig& cfg) {
  InversionArtifacts art;
  art.seed = cfg.seed;
  const double target = cfg.target_delta ? *cfg.target_delta : sc.spec.target_delta;
  if (cfg.epsilon) {
    art.epsilon = *cfg.epsilon;
    art.epsilon_b = *cfg.epsilon;
  } else {
    art.epsilon = calibrate_epsilon(f, target, cfg.seed);
    art.epsilon_b = f_b.a.norm() > 0
                        ? calibrate_epsilon(f_b, sc.spec.target_delta_b,
                                            secondary_seed(cfg.seed))
                        : 0.0;
  }
  auto noisy_f = apply_noise(f, art.epsilon, cfg.seed);
  auto noisy_fb = apply_noise(f_b, art.epsilon_b, secondary_seed(cfg.seed));
  art.f_delta = noisy_f.f_delta;
  art.f_b_delta = noisy_fb.f_delta;
  art.realized_delta = noisy_f.delta;
  art.realized_delta_b = noisy_fb.delta;

  art.s_b = scattering_matrix(art.f_b_delta, sc.bg->wn());
  FarFieldMatrix f_d = differential_matrix(art.f_delta, art.f_b_delta);
  art.fs = f_sharp(f_d, art.s_b);
  art.warnings.insert(art.warnings.end(), art.fs.warnings.begin(), art.fs.warnings.end());

  IndicatorOptions opt;
  opt.method = cfg.method == MethodKind::Picard ? InversionMethod::Picard
                                                : InversionMethod::Tikhonov;
  opt.delta = std::max(art.realized_delta, art.realized_delta_b);
  opt.picard_np = cfg.picard_np;
  art.map = indicator_map(art.fs, art.s_b, *sc.bg, sc.sampling, opt);
  art.map = threshold(std::move(art.map), cfg.tau ? *cfg.tau : sc.spec.tau);
  return art;
}

// ---------------------------------------------------------------------------
// Artifacts on disk
// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_indicator_csv(const std::string& path, const IndicatorMap& map) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ValidationError("cannot open csv for writing: " + path);
  f << "index,x,y,z,nx,ny,nz,indicator,alpha_or_Np,truncated\n";
  for (int p = 0; p < map.values.size(); ++p) {
    const Vec3& x = map.surface.points[p];
    const Vec3& n = map.surface.normals[p];
    f << p << ',' << fmt_double(x[0]) << ',' << fmt_double(x[1]) << ',' << fmt_double(x[2])
      << ',' << fmt_double(n[0]) << ',' << fmt_double(n[1]) << ',' << fmt_double(n[2]) << ','
      << fmt_double(map.values[p]) << ',' << fmt_double(map.alpha_or_np[p]) << ','
      << fmt_double(map.truncated[p]) << '\n';
  }
}

inline void write_eigen_csv(const std::string& path, const EigenSystem& eig) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ValidationError("cannot open csv for writing: " + path);
  f << "index,eigenvalue\n";
  for (int i = 0; i < eig.mu.size(); ++i) f << i << ',' << fmt_double(eig.mu[i]) << '\n';
}

/// Legacy VTK polydata export of an indicator map (point cloud with the
/// indicator and truncated values as point data).
inline void write_indicator_vtk(const std::string& path, const IndicatorMap& map) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ValidationError("cannot open vtk for writing: " + path);
  const int m = map.values.size();
  f << "# vtk DataFile Version 3.0\nindicator map\nASCII\nDATASET POLYDATA\n";
  f << "POINTS " << m << " double\n";
  for (int p = 0; p < m; ++p) {
    const Vec3& x = map.surface.points[p];
    f << fmt_double(x[0]) << ' ' << fmt_double(x[1]) << ' ' << fmt_double(x[2]) << '\n';
  }
  f << "POINT_DATA " << m << "\nSCALARS indicator double 1\nLOOKUP_TABLE default\n";
  for (int p = 0; p < m; ++p) f << fmt_double(map.values[p]) << '\n';
  f << "SCALARS truncated double 1\nLOOKUP_TABLE default\n";
  for (int p = 0; p < m; ++p) f << fmt_double(map.truncated[p]) << '\n';
}

struct RunResult {
  std::string out_dir;
  json manifest;
};

/// Full experiment: forward (or archive read), noise, inversion, artifacts.
/// Stage failures persist the manifest with the failed stage named.
inline RunResult run(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();
  if (cfg.threads > 0) thread_count() = cfg.threads;
  RunResult rr;
  rr.out_dir = cfg.out_dir;
  fs::create_directories(cfg.out_dir);
  json& man = rr.manifest;
  man["code"] = version_string();
  man["config"] = json::parse(emit_config(cfg));
  man["warnings"] = json::array();
  std::string stage = "build-scene";
  auto persist = [&]() {
    std::ofstream f(cfg.out_dir + "/manifest.json", std::ios::trunc);
    f << man.dump(2) << "\n";
  };
  try {
    ScenePreset spec = cfg.scene();
    man["scene"] = to_json(spec);
    BuiltScene sc = build_scene(spec);
    for (const auto& w : sc.warnings) man["warnings"].push_back(w);

    FarFieldMatrix f, f_b;
    if (cfg.stages.invert_only) {
      stage = "read-archives";
      const std::string dir =
          cfg.stages.archive_dir.empty() ? cfg.out_dir : cfg.stages.archive_dir;
      f = read_archive(dir + "/F.ffm1");
      f_b = read_archive(dir + "/F_b.ffm1");
      require(f.grid.n_theta == sc.grid.n_theta && f.grid.n_phi == sc.grid.n_phi &&
                  f.omega == spec.omega && f_b.compatible_with(f),
              "archive grid/frequency mismatch with the configured scene");
    } else {
      stage = "forward";
      const auto t0 = std::chrono::steady_clock::now();
      ForwardData fd = forward_solve(sc);
      man["timings"]["forward_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (const auto& w : fd.warnings) man["warnings"].push_back(w);
      f = fd.f;
      f_b = fd.f_b;
      stage = "write-forward-archives";
      write_archive(cfg.out_dir + "/F.ffm1", f);
      write_archive(cfg.out_dir + "/F_b.ffm1", f_b);
      man["artifacts"].push_back("F.ffm1");
      man["artifacts"].push_back("F_b.ffm1");
    }

    if (!cfg.stages.forward_only) {
      stage = "inversion";
      const auto t0 = std::chrono::steady_clock::now();
      InversionArtifacts art = invert_stage(sc, f, f_b, cfg);
      man["timings"]["inversion_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (const auto& w : art.warnings) man["warnings"].push_back(w);
      stage = "write-artifacts";
      write_archive(cfg.out_dir + "/F_delta.ffm1", art.f_delta);
      write_archive(cfg.out_dir + "/F_b_delta.ffm1", art.f_b_delta);
      write_indicator_csv(cfg.out_dir + "/indicator.csv", art.map);
      write_eigen_csv(cfg.out_dir + "/eigensystem.csv", art.fs.eig);
      for (const char* a :
           {"F_delta.ffm1", "F_b_delta.ffm1", "indicator.csv", "eigensystem.csv"})
        man["artifacts"].push_back(a);
      if (cfg.vtk_export) {
        write_indicator_vtk(cfg.out_dir + "/indicator.vtk", art.map);
        man["artifacts"].push_back("indicator.vtk");
      }
      man["noise"] = {{"seed", art.seed},
                      {"seed_background", secondary_seed(art.seed)},
                      {"epsilon", art.epsilon},
                      {"epsilon_background", art.epsilon_b},
                      {"realized_delta", art.realized_delta},
                      {"realized_delta_background", art.realized_delta_b}};
      man["inversion"] = {
          {"method", cfg.method == MethodKind::Picard ? "picard" : "tikhonov"},
          {"tau", cfg.tau ? *cfg.tau : sc.spec.tau},
          {"noise_delta_used", std::max(art.realized_delta, art.realized_delta_b)},
          {"rng", "xoshiro256++ / splitmix64 seeding"},
          {"eigen_count", art.fs.eig.mu.size()},
          {"negative_clip_threshold", 1e-10},
          {"picard_floor", 1e-14}};
    }
    man["timings"]["total_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    man["status"] = "ok";
    persist();
  } catch (const std::exception& e) {
    man["status"] = "failed";
    man["failed_stage"] = stage;
    man["error"] = e.what();
    persist();
    throw;
  }
  return rr;
}

}  // namespace elastofm
