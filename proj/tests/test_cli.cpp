#include "test_common.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "gqred/runner.hpp"

using namespace gqtest;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GQRED_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

ScenarioConfig tiny_s1() {
  ScenarioConfig c = builtin_scenario("s1");
  c.k_uncorrected = {2, 4};
  c.k_corrected = {3, 5};
  c.node_count = 2;
  return c;
}

}  // namespace

TEST_CASE("config serialization round trips", "[cli]") {
  const ScenarioConfig c = builtin_scenario("s2");
  const std::string text = serialize_config(c);
  const ScenarioConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));

  CHECK_THROWS_AS(parse_config("{not json"), StructuralError);
  CHECK_THROWS_AS(parse_config("{\"name\":\"x\"}"), StructuralError);
}

TEST_CASE("run produces the expected files and is idempotent", "[cli]") {
  ScenarioConfig c = tiny_s1();
  c.out_dir = "/tmp/gqred_cli_a";
  const RunManifest manifest = run_scenario(c);
  CHECK(manifest.scenario == "s1");
  CHECK(manifest.entries.size() == 5);
  for (const std::string f :
       {"densities.csv", "gram.csv", "toeplitz.csv", "summary.json",
        "manifest.json", "plots.gp"}) {
    std::ifstream in(c.out_dir + "/" + f);
    CHECK(in.good());
  }

  // same config re-run with a different worker count: byte-identical CSVs
  std::map<std::string, std::string> before;
  for (const std::string f : {"densities.csv", "gram.csv", "toeplitz.csv"})
    before[f] = slurp(c.out_dir + "/" + f);
  RunOptions opts;
  opts.threads = 1;
  run_scenario(c, opts);
  for (const auto& [f, bytes] : before)
    CHECK(slurp(c.out_dir + "/" + f) == bytes);
}

TEST_CASE("golden densities file at low level", "[cli]") {
  ScenarioConfig c = tiny_s1();
  c.k_uncorrected = {2};
  c.k_corrected = {3};
  c.node_count = 1;
  c.out_dir = "/tmp/gqred_cli_golden";
  run_scenario(c);
  const std::string got = slurp(c.out_dir + "/densities.csv");
  std::istringstream is(got);
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("# config=", 0) == 0);
  std::getline(is, line);
  CHECK(line ==
        "scenario,observable,node,moment,k,I_k,J_k,I_limit,J_limit,I_dev,J_dev");
  std::getline(is, line);
  CHECK(line ==
        "s1,one,0,0.500000:0.500000,2,2.36327180121,,3.14159265359,1,"
        "0.778320852382,");
  std::getline(is, line);
  CHECK(line ==
        "s1,one,0,0.500000:0.500000,3,,0.921317731924,3.14159265359,1,,"
        "0.0786822680764");
}

TEST_CASE("CLI exit codes", "[cli]") {
  SECTION("successful validate and run") {
    ScenarioConfig c = tiny_s1();
    c.out_dir = "/tmp/gqred_cli_run";
    const std::string path = "/tmp/gqred_cli_run.json";
    std::ofstream(path) << serialize_config(c);
    CHECK(run_cli("validate " + path + " > /dev/null 2>&1") == 0);
    CHECK(run_cli("run " + path + " > /dev/null 2>&1") == 0);
    CHECK(run_cli("report /tmp/gqred_cli_run/manifest.json > /dev/null 2>&1") ==
          0);
  }

  SECTION("odd k in uncorrected mode exits with the validation code") {
    ScenarioConfig c = tiny_s1();
    c.modes = {"uncorrected"};
    c.k_uncorrected = {3};
    const std::string path = "/tmp/gqred_cli_bad.json";
    std::ofstream(path) << serialize_config(c);
    CHECK(run_cli("run " + path + " --out /tmp/gqred_cli_bad 2> /tmp/gqred_cli_bad.err") == 2);
    const std::string err = slurp("/tmp/gqred_cli_bad.err");
    CHECK(err.find("not integral") != std::string::npos);  // cites the lift
  }

  SECTION("missing manifest is a structural error") {
    CHECK(run_cli("report /tmp/no_such_manifest.json > /dev/null 2>&1") == 1);
  }
}

TEST_CASE("report summarizes theorem trends", "[cli]") {
  ScenarioConfig c = builtin_scenario("s1");
  c.k_uncorrected = {8, 16, 32};
  c.k_corrected = {9, 17, 33};
  c.node_count = 2;
  c.out_dir = "/tmp/gqred_cli_report";
  run_scenario(c);
  const std::string text = report_manifest(c.out_dir + "/manifest.json");
  CHECK(text.find("Thm 1.1/5.1") != std::string::npos);
  CHECK(text.find("Thm 1.4/5.1") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
}

TEST_CASE("manifest integrity checks", "[cli]") {
  ScenarioConfig c = tiny_s1();
  c.out_dir = "/tmp/gqred_cli_integrity";
  run_scenario(c);
  const RunManifest m = load_manifest(c.out_dir + "/manifest.json");
  CHECK(m.config_hash == config_hash(c));
  CHECK(m.version == kToolVersion);

  // header hash mismatch is detected
  {
    std::ofstream out(c.out_dir + "/densities.csv", std::ios::binary);
    out << "# config=deadbeef version=0 scenario=s1\nheader\n";
  }
  CHECK_THROWS_AS(report_manifest(c.out_dir + "/manifest.json"),
                  StructuralError);
}
