// Command-line toolkit: forward synthesis, inversion, full runs, validation
// suites and preset inspection.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "elastofm/validate.hpp"

using namespace elastofm;

namespace {

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double noise_pct = -1.0;
  std::string method;
  double tau = -1.0;
  std::string out_dir;
  int threads = -1;
  bool vtk = false;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("--config", fl.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--seed", fl.seed, "noise seed (overrides config)")
      ->each([&](const std::string&) { fl.seed_set = true; });
  cmd->add_option("--noise", fl.noise_pct, "target noise measure in percent");
  cmd->add_option("--method", fl.method, "tikhonov | picard")
      ->check(CLI::IsMember({"tikhonov", "picard"}));
  cmd->add_option("--tau", fl.tau, "indicator truncation fraction");
  cmd->add_option("--out", fl.out_dir, "output directory");
  cmd->add_option("--threads", fl.threads, "worker thread count (0 = hardware)");
  cmd->add_flag("--vtk", fl.vtk, "also export the indicator map as legacy VTK polydata");
}

ExperimentConfig merge_flags(const CommonFlags& fl) {
  ExperimentConfig cfg = load_config(fl.config_path);
  if (fl.seed_set) cfg.seed = fl.seed;
  if (fl.noise_pct >= 0.0) {
    cfg.target_delta = fl.noise_pct / 100.0;
    cfg.epsilon.reset();
  }
  if (!fl.method.empty())
    cfg.method = fl.method == "picard" ? MethodKind::Picard : MethodKind::Tikhonov;
  if (fl.tau >= 0.0) cfg.tau = fl.tau;
  if (!fl.out_dir.empty()) cfg.out_dir = fl.out_dir;
  if (fl.threads >= 0) {
    cfg.threads = fl.threads;
  } else if (const char* env = std::getenv("ELASTOFM_THREADS")) {
    cfg.threads = std::atoi(env);
  }
  if (fl.vtk) cfg.vtk_export = true;
  return cfg;
}

int do_run(ExperimentConfig cfg) {
  auto rr = run(cfg);
  std::printf("run complete: %s (status %s)\n", rr.out_dir.c_str(),
              rr.manifest["status"].get<std::string>().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elastic-wave fracture imaging toolkit"};
  app.require_subcommand(1);

  CommonFlags fw, inv, full;
  auto* cmd_forward = app.add_subcommand("forward", "synthesize far-field archives only");
  add_common(cmd_forward, fw);
  auto* cmd_invert = app.add_subcommand("invert", "invert from existing archives");
  add_common(cmd_invert, inv);
  std::string invert_archives;
  cmd_invert->add_option("--archives", invert_archives,
                         "directory holding F.ffm1 and F_b.ffm1 (default: --out)");
  auto* cmd_run = app.add_subcommand("run", "forward + noise + inversion");
  add_common(cmd_run, full);

  std::string suite = "all", scratch = "/tmp";
  auto* cmd_validate = app.add_subcommand("validate", "run a validation suite");
  cmd_validate->add_option("suite", suite,
                           "kernels | reciprocity | scattering | factorization | forward | "
                           "regularization | localization | determinism | scale | all");
  cmd_validate->add_option("--scratch", scratch, "scratch directory for run artifacts");
  int vthreads = -1;
  cmd_validate->add_option("--threads", vthreads, "worker thread count");

  std::string dump_name;
  std::string dump_out;
  auto* cmd_dump = app.add_subcommand("preset-dump", "print a preset as config JSON");
  cmd_dump->add_option("name", dump_name, "preset name")->required();
  cmd_dump->add_option("--out", dump_out, "write to file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_forward->parsed()) {
      ExperimentConfig cfg = merge_flags(fw);
      cfg.stages.forward_only = true;
      cfg.stages.invert_only = false;
      return do_run(cfg);
    }
    if (cmd_invert->parsed()) {
      ExperimentConfig cfg = merge_flags(inv);
      cfg.stages.invert_only = true;
      cfg.stages.forward_only = false;
      if (!invert_archives.empty()) cfg.stages.archive_dir = invert_archives;
      return do_run(cfg);
    }
    if (cmd_run->parsed()) return do_run(merge_flags(full));
    if (cmd_validate->parsed()) {
      if (vthreads >= 0)
        thread_count() = vthreads;
      else if (const char* env = std::getenv("ELASTOFM_THREADS"))
        thread_count() = std::atoi(env);
      auto results = validate_suite(suite, scratch);
      bool all_pass = true;
      for (const auto& r : results) {
        std::printf("[%s] %-70s measured %.6g  tol %.6g\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured, r.tolerance);
        if (!r.note.empty()) std::printf("       %s\n", r.note.c_str());
        all_pass = all_pass && r.pass;
      }
      return all_pass ? 0 : 1;
    }
    if (cmd_dump->parsed()) {
      ExperimentConfig cfg;
      cfg.inline_scene = preset(dump_name);
      cfg.seed = 0;
      const std::string text = emit_config(cfg);
      if (dump_out.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        std::ofstream f(dump_out, std::ios::trunc);
        f << text;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
