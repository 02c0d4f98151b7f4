// Runs every registry experiment with its default config and prints one
// PASS/FAIL line per acceptance criterion. A criterion passes only when all
// of its checks pass and the run finishes within its budget.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "incmart/cli/experiments.hpp"

using namespace incmart::cli;

int main(int argc, char** argv) {
  CLI::App app{"incmart acceptance suite"};
  std::string out = "acceptance_out";
  std::string only;
  app.add_option("--out", out, "directory receiving one subdirectory per experiment");
  app.add_option("--only", only, "run a single experiment");
  CLI11_PARSE(app, argc, argv);

  int failed = 0, index = 0;
  for (const Experiment& e : registry()) {
    ++index;
    if (!only.empty() && e.name != only) continue;
    ExperimentConfig config = default_config(e);
    config.out = (std::filesystem::path(out) / e.name).string();
    std::string note;
    bool pass = false;
    try {
      const Outcome o = run_experiment(e, config);
      o.files.commit(config.out);
      std::size_t ok = 0;
      for (const auto& c : o.result.checks) ok += c.passed;
      pass = o.result.passed() && o.within_budget;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%zu/%zu checks, %.2f s of %.0f s budget", ok,
                    o.result.checks.size(), o.seconds, e.budget_seconds);
      note = buf;
      if (!o.within_budget) note += " (over budget)";
      for (const auto& c : o.result.checks) {
        if (!c.passed) note += "\n      failed " + c.name + ": " + c.detail;
      }
    } catch (const std::exception& ex) {
      note = std::string("error: ") + ex.what();
    }
    std::cout << (pass ? "PASS" : "FAIL") << "  " << (index < 10 ? " " : "") << index << ". "
              << e.name << "  " << note << std::endl;
    failed += !pass;
  }
  std::cout << (failed == 0 ? "all acceptance criteria passed" :
                std::to_string(failed) + " acceptance criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
