#ifndef GQRED_RUNNER_HPP
#define GQRED_RUNNER_HPP

#include <string>

#include "gqred/scenario.hpp"

namespace gqred {

struct RunOptions {
  int threads = 0;  // 0: GQRED_THREADS env var, then hardware concurrency
};

// Validates, runs the configured sweeps (densities, Gram reports, Toeplitz
// reports), writes CSV outputs plus a gnuplot script and manifest.json under
// config.out_dir, and returns the manifest. Throws ValidationError when a
// configured k fails validation for a requested mode.
RunManifest run_scenario(const ScenarioConfig& config,
                         const RunOptions& opts = {});

// Per-theorem convergence summary against the shipped tolerances.
std::string report_manifest(const std::string& manifest_path);

}  // namespace gqred

#endif
