#ifndef GQRED_SCENARIO_HPP
#define GQRED_SCENARIO_HPP

#include <string>
#include <vector>

#include "gqred/action.hpp"
#include "gqred/manifold.hpp"

namespace gqred {

// Everything needed to reproduce one experiment family. Rationals keep the
// moment shift exact for the lift checks; mode-specific k lists exist because
// the uncorrected and half-form lifts can live on different k parities.
struct ScenarioConfig {
  std::string name;
  std::vector<ProjectiveFactor> factors;
  IMat weights;
  std::vector<Rational> shift;
  Mat xi;  // empty: identity
  std::vector<int> k_uncorrected;
  std::vector<int> k_corrected;
  int quad_level = 2;
  int zero_set_level = 2;
  int node_count = 8;
  std::vector<std::string> observables = {"one"};
  std::vector<std::string> modes = {"uncorrected", "corrected"};
  std::string out_dir = "out";

  ModelManifold model() const { return ModelManifold(factors); }
  ActionSpec action(const ModelManifold& m) const;
  bool wants(const std::string& mode) const;
};

std::string serialize_config(const ScenarioConfig& config);
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

// FNV-1a over the canonical serialization.
std::string config_hash(const ScenarioConfig& config);

// Built-in scenarios: "s1" is CP^1 with the half-area circle action, "s2" is
// CP^1 x CP^1 with the diagonal-weight action at level 1/2.
ScenarioConfig builtin_scenario(const std::string& name);

struct ManifestEntry {
  std::string file;
  std::string stage;
  double seconds = 0;
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::string scenario;
  std::vector<ManifestEntry> entries;
};

std::string serialize_manifest(const RunManifest& m);
RunManifest load_manifest(const std::string& path);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace gqred

#endif
