#include "gqred/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gqred {

using nlohmann::json;

ActionSpec ScenarioConfig::action(const ModelManifold& m) const {
  return make_action(m, weights, shift, xi);
}

bool ScenarioConfig::wants(const std::string& mode) const {
  return std::find(modes.begin(), modes.end(), mode) != modes.end();
}

namespace {

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["factors"] = json::array();
  for (const auto& f : c.factors) j["factors"].push_back({f.dim, f.scale});
  j["weights"] = json::array();
  for (int r = 0; r < c.weights.rows(); ++r) {
    json row = json::array();
    for (int col = 0; col < c.weights.cols(); ++col)
      row.push_back(c.weights(r, col));
    j["weights"].push_back(row);
  }
  j["lambda"] = json::array();
  for (const auto& r : c.shift) j["lambda"].push_back({r.num, r.den});
  if (c.xi.size() > 0) {
    json xi = json::array();
    for (int r = 0; r < c.xi.rows(); ++r) {
      json row = json::array();
      for (int col = 0; col < c.xi.cols(); ++col) row.push_back(c.xi(r, col));
      xi.push_back(row);
    }
    j["xi"] = xi;
  }
  j["k"] = c.k_uncorrected;
  j["k_corrected"] = c.k_corrected;
  j["quad_level"] = c.quad_level;
  j["zero_set_level"] = c.zero_set_level;
  j["nodes"] = c.node_count;
  j["observables"] = c.observables;
  j["modes"] = c.modes;
  j["out"] = c.out_dir;
  return j;
}

}  // namespace

std::string serialize_config(const ScenarioConfig& c) {
  return config_to_json(c).dump(2) + "\n";
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw StructuralError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  try {
    c.name = j.at("name").get<std::string>();
    for (const auto& f : j.at("factors"))
      c.factors.push_back({f.at(0).get<int>(), f.at(1).get<int>()});
    const auto& w = j.at("weights");
    const int d = static_cast<int>(w.size());
    const int cols = static_cast<int>(w.at(0).size());
    c.weights.resize(d, cols);
    for (int r = 0; r < d; ++r)
      for (int col = 0; col < cols; ++col)
        c.weights(r, col) = w.at(r).at(col).get<int>();
    for (const auto& r : j.at("lambda"))
      c.shift.push_back({r.at(0).get<long long>(), r.at(1).get<long long>()});
    if (j.contains("xi")) {
      const auto& xi = j["xi"];
      c.xi.resize(xi.size(), xi.at(0).size());
      for (int r = 0; r < c.xi.rows(); ++r)
        for (int col = 0; col < c.xi.cols(); ++col)
          c.xi(r, col) = xi.at(r).at(col).get<double>();
    }
    c.k_uncorrected = j.at("k").get<std::vector<int>>();
    c.k_corrected = j.contains("k_corrected")
                        ? j["k_corrected"].get<std::vector<int>>()
                        : c.k_uncorrected;
    if (j.contains("quad_level")) c.quad_level = j["quad_level"].get<int>();
    if (j.contains("zero_set_level"))
      c.zero_set_level = j["zero_set_level"].get<int>();
    if (j.contains("nodes")) c.node_count = j["nodes"].get<int>();
    if (j.contains("observables"))
      c.observables = j["observables"].get<std::vector<std::string>>();
    if (j.contains("modes"))
      c.modes = j["modes"].get<std::vector<std::string>>();
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw StructuralError(std::string("config is missing fields: ") + e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const ScenarioConfig& config) {
  const std::string text = serialize_config(config);
  unsigned long long h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "s1") {
    c.factors = {{1, 1}};
    c.weights.resize(1, 2);
    c.weights << 0, 1;
    c.shift = {{1, 2}};
    c.k_uncorrected = {2, 4, 8, 16, 32, 64, 128};
    c.k_corrected = {3, 5, 9, 17, 33, 65, 127};
    c.node_count = 4;
    c.observables = {"one"};
    c.out_dir = "out/s1";
  } else if (name == "s2") {
    c.factors = {{1, 1}, {1, 1}};
    c.weights.resize(1, 4);
    c.weights << 0, 1, 0, 1;
    c.shift = {{1, 2}};
    c.k_uncorrected = {2, 4, 8, 16, 32, 64, 128};
    c.k_corrected = {2, 4, 8, 16, 32, 64, 128};
    c.node_count = 8;
    c.observables = {"one", "moment_sum"};
    c.out_dir = "out/s2";
  } else {
    throw StructuralError("unknown builtin scenario: " + name);
  }
  return c;
}

std::string serialize_manifest(const RunManifest& m) {
  json j;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  j["scenario"] = m.scenario;
  j["files"] = json::array();
  for (const auto& e : m.entries)
    j["files"].push_back({{"file", e.file}, {"stage", e.stage},
                          {"seconds", e.seconds}});
  return j.dump(2) + "\n";
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open manifest " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw StructuralError(std::string("manifest is not valid JSON: ") + e.what());
  }
  RunManifest m;
  try {
    m.config_hash = j.at("config_hash").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.scenario = j.at("scenario").get<std::string>();
    for (const auto& e : j.at("files"))
      m.entries.push_back({e.at("file").get<std::string>(),
                           e.at("stage").get<std::string>(),
                           e.at("seconds").get<double>()});
  } catch (const json::exception& e) {
    throw StructuralError(std::string("manifest is missing fields: ") +
                          e.what());
  }
  if (m.entries.empty()) throw StructuralError("manifest lists no files");
  return m;
}

}  // namespace gqred
