#include "gqred/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gqred/densities.hpp"
#include "gqred/reduction.hpp"

namespace gqred {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string fmt(Real v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string moment_string(const Vec& u) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  for (int a = 0; a < u.size(); ++a) {
    if (a) os << ':';
    os << u[a];
  }
  return os.str();
}

int resolve_threads(const RunOptions& opts) {
  if (opts.threads > 0) return opts.threads;
  if (const char* env = std::getenv("GQRED_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int jobs, int threads,
                  const std::function<void(int)>& body) {
  if (threads <= 1 || jobs <= 1) {
    for (int j = 0; j < jobs; ++j) body(j);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < std::min(threads, jobs); ++t)
    pool.emplace_back([&] {
      while (true) {
        const int j = next.fetch_add(1);
        if (j >= jobs) return;
        try {
          body(j);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct CsvFile {
  std::string path;
  std::ostringstream body;

  void write() const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StructuralError("cannot write " + path);
    out << body.str();
  }
};

}  // namespace

RunManifest run_scenario(const ScenarioConfig& config, const RunOptions& opts) {
  const ModelManifold model = config.model();
  const ActionSpec action = config.action(model);
  const std::string hash = config_hash(config);
  const int threads = resolve_threads(opts);

  // Validation gate: every configured k must validate for its mode.
  for (const std::string& mode : config.modes) {
    const bool corrected = (mode == "corrected");
    const auto& ks = corrected ? config.k_corrected : config.k_uncorrected;
    for (int k : ks) {
      const ValidationReport rep = validate_scenario(model, action, k);
      if (!rep.valid(corrected))
        throw ValidationError("scenario " + config.name + " fails validation (" +
                              mode + ", k=" + std::to_string(k) + ")\n" +
                              rep.summary());
    }
  }

  fs::create_directories(config.out_dir);
  RunManifest manifest;
  manifest.config_hash = hash;
  manifest.version = kToolVersion;
  manifest.scenario = config.name;

  const std::string header =
      "# config=" + hash + " version=" + kToolVersion + " scenario=" +
      config.name + "\n";

  const std::vector<ChartPoint> nodes =
      zero_set_sample(action, model, config.node_count);
  const bool run_uncorrected = config.wants("uncorrected");
  const bool run_corrected = config.wants("corrected");

  // ---- densities ----
  auto t0 = Clock::now();
  CsvFile densities;
  densities.path = (fs::path(config.out_dir) / "densities.csv").string();
  densities.body << header
                 << "scenario,observable,node,moment,k,I_k,J_k,I_limit,"
                    "J_limit,I_dev,J_dev\n";
  {
    std::set<int> kset;
    if (run_uncorrected)
      kset.insert(config.k_uncorrected.begin(), config.k_uncorrected.end());
    if (run_corrected)
      kset.insert(config.k_corrected.begin(), config.k_corrected.end());
    const std::vector<int> ks(kset.begin(), kset.end());

    for (const std::string& tag : config.observables) {
      const Observable obs = make_observable(tag, action, model);
      struct Cell {
        std::vector<DensityRow> rows;
      };
      std::vector<Cell> cells(ks.size());
      parallel_for(static_cast<int>(ks.size()), threads, [&](int j) {
        const int k = ks[j];
        const ValidationReport val = validate_scenario(model, action, k);
        const bool doI =
            run_uncorrected && val.valid(false) &&
            std::count(config.k_uncorrected.begin(), config.k_uncorrected.end(), k);
        const bool doJ =
            run_corrected && val.valid(true) &&
            std::count(config.k_corrected.begin(), config.k_corrected.end(), k);
        const int d = action.dim();
        for (std::size_t in = 0; in < nodes.size(); ++in) {
          DensityRow row;
          row.node = static_cast<int>(in);
          row.k = k;
          row.moment_coords = action_coords(model, nodes[in]);
          const Real fx = obs.eval(nodes[in]);
          row.I_limit = std::pow(2.0, -0.5 * d) * fx *
                        orbit_volume(action, model, nodes[in]);
          row.J_limit = fx;
          if (doI) {
            row.I = density_I(action, model, nodes[in], k, obs);
            row.I_dev = std::abs(row.I - row.I_limit);
          }
          if (doJ) {
            row.J = density_J(action, model, nodes[in], k, obs);
            row.J_dev = std::abs(row.J - row.J_limit);
          }
          cells[j].rows.push_back(std::move(row));
        }
      });
      for (std::size_t j = 0; j < ks.size(); ++j)
        for (const DensityRow& row : cells[j].rows) {
          densities.body << config.name << ',' << tag << ',' << row.node << ','
                         << moment_string(row.moment_coords) << ',' << row.k
                         << ',' << (row.I < 0 ? "" : fmt(row.I)) << ','
                         << (row.J < 0 ? "" : fmt(row.J)) << ','
                         << fmt(row.I_limit) << ',' << fmt(row.J_limit) << ','
                         << (row.I_dev < 0 ? "" : fmt(row.I_dev)) << ','
                         << (row.J_dev < 0 ? "" : fmt(row.J_dev)) << '\n';
        }
    }
  }
  densities.write();
  manifest.entries.push_back(
      {"densities.csv", "densities",
       std::chrono::duration<double>(Clock::now() - t0).count()});

  // ---- Gram reports ----
  nlohmann::json summary;
  summary["config"] = hash;
  summary["scenario"] = config.name;
  t0 = Clock::now();
  CsvFile gram;
  gram.path = (fs::path(config.out_dir) / "gram.csv").string();
  gram.body << header << "scenario,corrected,k,dim,mu_min,mu_max,defect\n";
  {
    struct Job {
      bool corrected;
      int k;
    };
    std::vector<Job> jobs;
    if (run_uncorrected)
      for (int k : config.k_uncorrected) jobs.push_back({false, k});
    if (run_corrected)
      for (int k : config.k_corrected) jobs.push_back({true, k});
    std::vector<GramReport> reports(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), threads, [&](int j) {
      reports[j] = gram_report(action, model, jobs[j].k, jobs[j].corrected);
    });
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const GramReport& r = reports[j];
      gram.body << config.name << ',' << (r.corrected ? 1 : 0) << ',' << r.k
                << ',' << r.dim << ','
                << (r.dim ? fmt(r.mu.minCoeff()) : "") << ','
                << (r.dim ? fmt(r.mu.maxCoeff()) : "") << ','
                << fmt(r.defect) << '\n';
      summary["gram"][r.corrected ? "corrected" : "uncorrected"]
             [std::to_string(r.k)] = r.defect;
    }
  }
  gram.write();
  manifest.entries.push_back(
      {"gram.csv", "gram",
       std::chrono::duration<double>(Clock::now() - t0).count()});

  // ---- Toeplitz reports (corrected mode only) ----
  if (run_corrected) {
    t0 = Clock::now();
    CsvFile toeplitz;
    toeplitz.path = (fs::path(config.out_dir) / "toeplitz.csv").string();
    toeplitz.body << header << "scenario,symbol,k,dim,defect\n";
    for (const std::string& tag : config.observables) {
      const Observable obs = make_observable(tag, action, model);
      std::vector<ToeplitzMatrices> mats(config.k_corrected.size());
      parallel_for(static_cast<int>(config.k_corrected.size()), threads,
                   [&](int j) {
                     mats[j] = toeplitz_pair(action, model,
                                             config.k_corrected[j], obs);
                   });
      for (const ToeplitzMatrices& tmat : mats) {
        toeplitz.body << config.name << ',' << tag << ',' << tmat.k << ','
                      << tmat.dim << ',' << fmt(tmat.defect) << '\n';
        summary["toeplitz"][tag][std::to_string(tmat.k)] = tmat.defect;
      }
    }
    toeplitz.write();
    manifest.entries.push_back(
        {"toeplitz.csv", "toeplitz",
         std::chrono::duration<double>(Clock::now() - t0).count()});
  }

  {
    std::ofstream sout(fs::path(config.out_dir) / "summary.json",
                       std::ios::binary);
    sout << summary.dump(2) << "\n";
    manifest.entries.push_back({"summary.json", "summary", 0.0});
  }

  // ---- gnuplot script ----
  {
    std::ofstream gp(fs::path(config.out_dir) / "plots.gp", std::ios::binary);
    gp << "# gnuplot script for scenario " << config.name << "\n"
       << "set datafile separator \",\"\n"
       << "set logscale x 2\n"
       << "set key left\n"
       << "set xlabel 'k'\n"
       << "set ylabel 'density'\n"
       << "plot 'densities.csv' every ::1 using 5:6 with points title 'I_k', \\\n"
       << "     'densities.csv' every ::1 using 5:8 with lines title 'limit', \\\n"
       << "     'densities.csv' every ::1 using 5:7 with points title 'J_k'\n"
       << "pause -1\n"
       << "set ylabel 'Gram defect'\n"
       << "plot 'gram.csv' every ::1 using 3:($2==0?$7:1/0) with linespoints "
          "title 'uncorrected', \\\n"
       << "     'gram.csv' every ::1 using 3:($2==1?$7:1/0) with linespoints "
          "title 'corrected'\n";
    manifest.entries.push_back({"plots.gp", "plots", 0.0});
  }

  std::ofstream mout(fs::path(config.out_dir) / "manifest.json",
                     std::ios::binary);
  mout << serialize_manifest(manifest);
  return manifest;
}

namespace {

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string hash;
};

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("missing report input " + path);
  Csv csv;
  std::string line;
  bool got_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("config=");
      if (pos != std::string::npos)
        csv.hash = line.substr(pos + 7, line.find(' ', pos) - pos - 7);
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (ss.eof() && !line.empty() && line.back() == ',') fields.push_back("");
    if (!got_header) {
      csv.header = fields;
      got_header = true;
    } else {
      csv.rows.push_back(fields);
    }
  }
  return csv;
}

Real to_real(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

}  // namespace

std::string report_manifest(const std::string& manifest_path) {
  const RunManifest manifest = load_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::ostringstream out;
  out << "scenario " << manifest.scenario << " (config " << manifest.config_hash
      << ")\n";

  for (const auto& e : manifest.entries) {
    const fs::path p = dir / e.file;
    if (!fs::exists(p))
      throw StructuralError("manifest lists missing file " + p.string());
    if (p.extension() == ".csv") {
      const Csv csv = read_csv(p.string());
      if (!csv.hash.empty() && csv.hash != manifest.config_hash)
        throw StructuralError(e.file + " hash does not match manifest");
    }
  }

  // Densities: I_k toward 2^{-d/2} vol, J_k toward f.
  {
    const Csv csv = read_csv((dir / "densities.csv").string());
    if (!csv.hash.empty() && csv.hash != manifest.config_hash)
      throw StructuralError("densities.csv hash does not match manifest");
    std::map<int, Real> maxIdev, maxJdev, limI;
    for (const auto& row : csv.rows) {
      if (row[1] != "one") continue;
      const int k = std::atoi(row[4].c_str());
      if (!row[5].empty()) {
        const Real rel = to_real(row[9]) / to_real(row[7]);
        maxIdev[k] = std::max(maxIdev.count(k) ? maxIdev[k] : 0.0, rel);
        limI[k] = to_real(row[7]);
      }
      if (!row[6].empty()) {
        const Real rel = to_real(row[10]) / std::max(to_real(row[8]), 1e-30);
        maxJdev[k] = std::max(maxJdev.count(k) ? maxJdev[k] : 0.0, rel);
      }
    }
    const auto trend = [](const std::map<int, Real>& m, int kmin) {
      bool decreasing = true;
      Real prev = -1;
      for (const auto& [k, v] : m) {
        if (k < kmin) continue;
        if (prev >= 0 && v > prev) decreasing = false;
        prev = v;
      }
      return decreasing;
    };
    if (!maxIdev.empty()) {
      const auto last = maxIdev.rbegin();
      const bool pass = last->second < 0.05 && trend(maxIdev, 8);
      out << "Thm 1.1/5.1: I_k -> 2^{-d/2} vol(G.x0); max rel dev @k="
          << last->first << " = " << fmt(100 * last->second)
          << "% (<5%), decreasing for k>=8: " << (trend(maxIdev, 8) ? "yes" : "no")
          << " -> " << (pass ? "PASS" : "FAIL") << '\n';
    }
    if (!maxJdev.empty()) {
      const auto last = maxJdev.rbegin();
      const bool pass = last->second < 0.05 && trend(maxJdev, 8);
      out << "Thm 1.4/5.1: J_k -> 1; max rel dev @k=" << last->first << " = "
          << fmt(100 * last->second) << "% (<5%), decreasing: "
          << (trend(maxJdev, 8) ? "yes" : "no") << " -> "
          << (pass ? "PASS" : "FAIL") << '\n';
    }
  }

  // Gram defects. One-dimensional spaces have trivial defects; the
  // non-unitarity then shows in the scale column mu, not in the spread.
  {
    const Csv csv = read_csv((dir / "gram.csv").string());
    std::map<int, Real> unc, cor;
    int max_dim_unc = 0, max_dim_cor = 0;
    for (const auto& row : csv.rows) {
      const int k = std::atoi(row[2].c_str());
      const int dim = std::atoi(row[3].c_str());
      if (row[1] == "0") {
        unc[k] = to_real(row[6]);
        max_dim_unc = std::max(max_dim_unc, dim);
      } else {
        cor[k] = to_real(row[6]);
        max_dim_cor = std::max(max_dim_cor, dim);
      }
    }
    if (!unc.empty()) {
      if (max_dim_unc >= 2) {
        Real floor_defect = std::numeric_limits<Real>::infinity();
        for (const auto& [k, v] : unc)
          if (k >= 16) floor_defect = std::min(floor_defect, v);
        const bool pass = floor_defect >= 0.02;
        out << "Thm 5.3: uncorrected Gram defect floor for k>=16 = "
            << fmt(floor_defect) << " (>=0.02) -> "
            << (pass ? "PASS (not asymptotically unitary)" : "FAIL") << '\n';
      } else {
        out << "Thm 5.3: defect trivial on 1-dim spaces; scale mu_1 tracks "
               "1/I_k instead\n";
      }
    }
    if (!cor.empty()) {
      bool decreasing = true;
      Real prev = -1, last = 0;
      int lastk = 0;
      for (const auto& [k, v] : cor) {
        if (k < 16) continue;
        if (prev >= 0 && v > prev - 1e-12 && prev > 1e-10) decreasing = false;
        prev = v;
        last = v;
        lastk = k;
      }
      const bool pass = decreasing && last < 0.05;
      out << "Thm 5.2: corrected Gram defect @k=" << lastk << " = " << fmt(last)
          << " (<0.05), decreasing for k>=16: " << (decreasing ? "yes" : "no")
          << " -> " << (pass ? "PASS" : "FAIL") << '\n';
    }
  }

  // Toeplitz defects.
  {
    const fs::path tp = dir / "toeplitz.csv";
    if (fs::exists(tp)) {
      const Csv csv = read_csv(tp.string());
      std::map<std::string, std::map<int, Real>> by_symbol;
      for (const auto& row : csv.rows)
        by_symbol[row[1]][std::atoi(row[2].c_str())] = to_real(row[4]);
      for (const auto& [sym, m] : by_symbol) {
        bool decreasing = true;
        Real prev = -1, last = 0;
        int lastk = 0;
        for (const auto& [k, v] : m) {
          if (k < 16) continue;
          if (prev >= 0 && v > prev - 1e-12 && prev > 1e-10) decreasing = false;
          prev = v;
          last = v;
          lastk = k;
        }
        const bool pass = decreasing && last < 0.05;
        out << "Thm 5.5: Toeplitz defect (f=" << sym << ") @k=" << lastk
            << " = " << fmt(last) << " (<0.05), decreasing: "
            << (decreasing ? "yes" : "no") << " -> " << (pass ? "PASS" : "FAIL")
            << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace gqred
