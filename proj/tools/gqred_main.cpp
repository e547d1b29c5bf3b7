#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gqred/runner.hpp"

namespace {

int dispatch(const std::string& cmd, const std::string& config_path,
             const std::string& manifest_path, const std::vector<int>& k_over,
             int quad_level, const std::string& out_over, int threads) {
  using namespace gqred;
  if (cmd == "run" || cmd == "validate") {
    ScenarioConfig config;
    try {
      config = load_config(config_path);
    } catch (const StructuralError&) {
      // fall back to builtin scenario names
      config = builtin_scenario(config_path);
    }
    if (!k_over.empty()) {
      config.k_uncorrected = k_over;
      config.k_corrected = k_over;
    }
    if (quad_level > 0) config.quad_level = quad_level;
    if (!out_over.empty()) config.out_dir = out_over;

    const ModelManifold model = config.model();
    const ActionSpec action = config.action(model);
    if (cmd == "validate") {
      bool all_ok = true;
      for (const std::string& mode : config.modes) {
        const bool corrected = (mode == "corrected");
        for (int k : corrected ? config.k_corrected : config.k_uncorrected) {
          const ValidationReport rep = validate_scenario(model, action, k);
          std::cout << config.name << " " << mode << " k=" << k << ":\n"
                    << rep.summary();
          if (!rep.valid(corrected)) all_ok = false;
        }
      }
      if (!all_ok) throw ValidationError("validation failed");
      return 0;
    }
    RunOptions opts;
    opts.threads = threads;
    const RunManifest manifest = run_scenario(config, opts);
    std::cout << "wrote " << manifest.entries.size() << " files to "
              << config.out_dir << "\n";
    return 0;
  }
  if (cmd == "report") {
    std::cout << report_manifest(manifest_path);
    return 0;
  }
  throw gqred::StructuralError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric quantization and symplectic reduction lab"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, out_over;
  std::vector<int> k_over;
  int quad_level = 0;
  int threads = 0;

  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path,
                  "config JSON path or builtin name (s1, s2)")
      ->required();
  run->add_option("--k", k_over, "override the k list");
  run->add_option("--quad-level", quad_level, "override quadrature level");
  run->add_option("--out", out_over, "override output directory");
  run->add_option("--threads", threads,
                  "worker threads (default: GQRED_THREADS or hardware)");

  auto* validate = app.add_subcommand("validate", "validate a scenario config");
  validate->add_option("config", config_path, "config JSON path or builtin name")
      ->required();
  validate->add_option("--k", k_over, "override the k list");

  auto* report = app.add_subcommand("report", "summarize a finished run");
  report->add_option("manifest", manifest_path, "path to manifest.json")
      ->required();

  CLI11_PARSE(app, argc, argv);

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, config_path, manifest_path, k_over, quad_level,
                    out_over, threads);
  } catch (const gqred::ValidationError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return 2;
  } catch (const gqred::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
