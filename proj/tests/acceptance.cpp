// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion.

#include <cstdio>
#include <filesystem>

#include "elastofm/validate.hpp"

using namespace elastofm;

int main() {
  thread_count() = 0;  // use all hardware workers
  const std::string scratch = std::filesystem::temp_directory_path().string() + "/efm_accept";
  std::filesystem::create_directories(scratch);

  struct Criterion {
    const char* id;
    const char* suite;
  };
  const Criterion criteria[] = {
      {"1 kernel correctness", "kernels"},
      {"2 mixed reciprocity", "reciprocity"},
      {"3 scattering operator", "scattering"},
      {"4 factorization", "factorization"},
      {"5 forward-solver oracles", "forward"},
      {"6 regularization oracles", "regularization"},
      {"7 end-to-end localization", "localization"},
      {"8 determinism", "determinism"},
      {"9 scale", "scale"},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::vector<CheckResult> results;
    try {
      results = validate_suite(c.suite, scratch);
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %s: exception: %s\n", c.id, e.what());
      ++failures;
      continue;
    }
    bool pass = true;
    for (const auto& r : results) pass = pass && r.pass;
    std::printf("[%s] criterion %s\n", pass ? "PASS" : "FAIL", c.id);
    for (const auto& r : results) {
      std::printf("    %-72s %-4s  measured %.6g  tol %.6g\n", r.name.c_str(),
                  r.pass ? "ok" : "FAIL", r.measured, r.tolerance);
      if (!r.note.empty()) std::printf("        %s\n", r.note.c_str());
    }
    if (!pass) ++failures;
  }
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
