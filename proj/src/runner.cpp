#include "gradcaps/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gradcaps/errors.hpp"
#include "gradcaps/util.hpp"

namespace gradcaps {

namespace fs = std::filesystem;
using nlohmann::json;

double RunManifest::mean_best_return() const {
  double m = 0.0;
  for (const auto& s : seeds) m += s.best_return;
  return m / seeds.size();
}

double RunManifest::std_best_return() const {
  if (seeds.size() < 2) return 0.0;
  const double m = mean_best_return();
  double var = 0.0;
  for (const auto& s : seeds) var += (s.best_return - m) * (s.best_return - m);
  return std::sqrt(var / (seeds.size() - 1));
}

double RunManifest::mean_fluctuation() const {
  double m = 0.0;
  for (const auto& s : seeds) m += s.final_fluctuation;
  return m / seeds.size();
}

namespace {

json manifest_to_json(const RunManifest& m) {
  json j;
  j["version"] = 1;
  j["run_id"] = m.run_id;
  j["config_hash"] = m.config_hash;
  j["code_version"] = m.code_version;
  j["config_toml"] = m.config_toml;
  json seeds = json::array();
  for (const auto& s : m.seeds) {
    json e;
    e["seed"] = s.seed;
    e["best_return"] = s.best_return;
    e["best_return_std"] = s.best_return_std;
    e["final_fluctuation"] = s.final_fluctuation;
    e["final_lipschitz_k1"] = s.final_lipschitz_k1;
    e["final_lipschitz_k2"] = s.final_lipschitz_k2;
    e["wall_seconds"] = s.wall_seconds;
    e["metrics_csv"] = s.metrics_csv;
    e["checkpoint"] = s.checkpoint;
    e["trace_csv"] = s.trace_csv;
    seeds.push_back(e);
  }
  j["seeds"] = seeds;
  j["files"] = m.files;
  return j;
}

RunManifest manifest_from_json(const json& j, const std::string& run_dir) {
  RunManifest m;
  m.run_dir = run_dir;
  m.run_id = j.at("run_id").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.code_version = j.at("code_version").get<std::string>();
  m.config_toml = j.at("config_toml").get<std::string>();
  for (const auto& e : j.at("seeds")) {
    SeedResult s;
    s.seed = e.at("seed").get<uint64_t>();
    s.best_return = e.at("best_return").get<double>();
    s.best_return_std = e.at("best_return_std").get<double>();
    s.final_fluctuation = e.at("final_fluctuation").get<double>();
    s.final_lipschitz_k1 = e.at("final_lipschitz_k1").get<double>();
    s.final_lipschitz_k2 = e.at("final_lipschitz_k2").get<double>();
    s.wall_seconds = e.at("wall_seconds").get<double>();
    s.metrics_csv = e.at("metrics_csv").get<std::string>();
    s.checkpoint = e.at("checkpoint").get<std::string>();
    s.trace_csv = e.at("trace_csv").get<std::string>();
    m.seeds.push_back(s);
  }
  m.files = j.at("files").get<std::vector<std::string>>();
  return m;
}

}  // namespace

RunManifest load_manifest(const std::string& run_dir) {
  const fs::path p = fs::path(run_dir) / "manifest.json";
  json j;
  try {
    j = json::parse(read_file(p.string()));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("manifest: parse error in " + p.string() + ": " + e.what());
  }
  try {
    return manifest_from_json(j, run_dir);
  } catch (const std::exception& e) {
    throw ConfigError("manifest: malformed " + p.string() + ": " + e.what());
  }
}

RunManifest run_experiment(const RunConfig& cfg) {
  cfg.validate();
  const std::string run_dir = cfg.run_dir();
  const std::string hash = cfg.config_hash();
  const fs::path manifest_path = fs::path(run_dir) / "manifest.json";

  if (fs::exists(manifest_path)) {
    RunManifest existing = load_manifest(run_dir);
    if (existing.config_hash == hash) return existing;  // idempotent re-run
    throw ConfigError("run_experiment: run id '" + cfg.run_id +
                      "' already used in " + cfg.resolved_output_dir() +
                      " with a different config");
  }
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw RuntimeAbort("cannot create run dir " + run_dir);

  RunManifest manifest;
  manifest.run_dir = run_dir;
  manifest.run_id = cfg.run_id;
  manifest.config_hash = hash;
  manifest.code_version = kCodeVersion;
  manifest.config_toml = cfg.to_toml();

  // One independent single-threaded training loop per seed.
  std::vector<TrainResult> results(cfg.seeds.size());
  std::vector<std::string> errors(cfg.seeds.size());
  {
    std::vector<std::thread> workers;
    const unsigned max_threads = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<size_t> next{0};
    auto work = [&]() {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= cfg.seeds.size()) return;
        try {
          results[i] = train_one_seed(cfg, cfg.seeds[i], run_dir);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    const unsigned n_workers =
        std::min<unsigned>(max_threads, static_cast<unsigned>(cfg.seeds.size()));
    for (unsigned t = 0; t < n_workers; ++t) workers.emplace_back(work);
    for (auto& w : workers) w.join();
  }
  for (size_t i = 0; i < cfg.seeds.size(); ++i)
    if (!errors[i].empty())
      throw RuntimeAbort("seed " + std::to_string(cfg.seeds[i]) +
                         " failed: " + errors[i]);

  for (const auto& r : results) {
    manifest.seeds.push_back(r.seed_result);
    manifest.files.push_back(r.seed_result.metrics_csv);
    manifest.files.push_back(r.seed_result.checkpoint);
    manifest.files.push_back(r.seed_result.trace_csv);
  }
  manifest.files.push_back("manifest.json");
  std::sort(manifest.files.begin(), manifest.files.end());

  write_file_atomic(manifest_path.string(), manifest_to_json(manifest).dump(1));
  return manifest;
}

// ------------------------------------------------------------- sweeps ----

std::string ablate_lambda(const RunConfig& base, std::span<const double> grid) {
  base.validate();
  if (grid.empty()) throw ConfigError("ablate_lambda: empty grid");
  for (double l : grid)
    if (!(l >= 0.0) || !std::isfinite(l))
      throw ConfigError("ablate_lambda: grid values must be finite and >= 0");

  struct Cell {
    RegKind kind;
    double lambda;
    RunManifest manifest;
  };
  std::vector<Cell> cells;
  const RegKind kinds[] = {RegKind::Caps, RegKind::GradCapsNorm};
  for (RegKind kind : kinds) {
    for (double lambda : grid) {
      RunConfig cfg = base;
      cfg.agent.regularizer.kind = kind;
      cfg.agent.regularizer.lambda_t = lambda;
      std::ostringstream id;
      id << base.run_id << "_" << to_string(kind) << "_lam" << fmt_double(lambda);
      cfg.run_id = id.str();
      cells.push_back(Cell{kind, lambda, run_experiment(cfg)});
    }
  }

  const fs::path sweep_dir =
      fs::path(base.resolved_output_dir()) / (base.run_id + "_lambda_sweep");
  std::error_code ec;
  fs::create_directories(sweep_dir, ec);
  if (ec) throw RuntimeAbort("cannot create sweep dir " + sweep_dir.string());

  std::ostringstream head;
  head << "# grid:";
  for (size_t i = 0; i < grid.size(); ++i) head << (i ? "," : " ") << fmt_double(grid[i]);
  head << "\n";

  std::ostringstream table;
  table << head.str();
  table << "kind,lambda,mean_return,std_return,mean_fluctuation,run_dir\n";
  for (const auto& c : cells)
    table << to_string(c.kind) << ',' << fmt_double(c.lambda) << ','
          << fmt_double(c.manifest.mean_best_return()) << ','
          << fmt_double(c.manifest.std_best_return()) << ','
          << fmt_double(c.manifest.mean_fluctuation()) << ',' << c.manifest.run_dir
          << "\n";
  const std::string table_path = (sweep_dir / "sweep.csv").string();
  write_file_atomic(table_path, table.str());

  // Stacked traces of the first seed per cell, for layered wave plots.
  std::ostringstream traces;
  traces << head.str();
  traces << "kind,lambda,step,reference,predicted\n";
  for (const auto& c : cells) {
    const auto& s0 = c.manifest.seeds.front();
    const std::string text =
        read_file((fs::path(c.manifest.run_dir) / s0.trace_csv).string());
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first) {  // column header
        first = false;
        continue;
      }
      if (line.empty()) continue;
      const auto parts = split(line, ',');
      if (parts.size() < 3) continue;
      traces << to_string(c.kind) << ',' << fmt_double(c.lambda) << ',' << parts[0]
             << ',' << parts[1] << ',' << parts[2] << "\n";
    }
  }
  write_file_atomic((sweep_dir / "stacked_traces.csv").string(), traces.str());
  return table_path;
}

// ------------------------------------------------------- loss inspect ----

std::string loss_inspect_text(const std::string& csv_text, const std::string& mode,
                              Aggregation aggregation, double epsilon_div,
                              double epsilon_tanh) {
  if (mode != "all" && mode != "caps" && mode != "gradcaps_raw" &&
      mode != "gradcaps_div" && mode != "gradcaps_tanh")
    throw ConfigError("loss-inspect: unknown mode " + mode);
  if (epsilon_div < 0.0 || epsilon_tanh <= 0.0)
    throw ConfigError("loss-inspect: epsilon_div must be >= 0, epsilon_tanh > 0");

  std::vector<std::vector<double>> rows;
  std::istringstream in(csv_text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> seq;
    for (const std::string& cell : split(line, ',')) {
      const std::string v = trim(cell);
      if (v.empty()) throw ConfigError("loss-inspect: empty cell on line " +
                                       std::to_string(lineno));
      try {
        size_t used = 0;
        seq.push_back(std::stod(v, &used));
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw ConfigError("loss-inspect: malformed number '" + v + "' on line " +
                          std::to_string(lineno));
      }
    }
    if (seq.size() < 3)
      throw ConfigError("loss-inspect: sequence on line " + std::to_string(lineno) +
                        " shorter than 3");
    rows.push_back(std::move(seq));
  }
  if (rows.empty()) throw ConfigError("loss-inspect: no sequences in input");

  const bool want_caps = mode == "all" || mode == "caps";
  const bool want_raw = mode == "all" || mode == "gradcaps_raw";
  const bool want_div = mode == "all" || mode == "gradcaps_div";
  const bool want_tanh = mode == "all" || mode == "gradcaps_tanh";

  std::ostringstream out;
  out << "# aggregation: " << to_string(aggregation)
      << "  epsilon_div: " << fmt_double(epsilon_div)
      << "  epsilon_tanh: " << fmt_double(epsilon_tanh) << "\n";
  out << "row,length";
  if (want_caps) out << ",caps";
  if (want_raw) out << ",gradcaps_raw";
  if (want_div) out << ",gradcaps_div";
  if (want_tanh) out << ",gradcaps_tanh";
  out << "\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::span<const double> seq(rows[i]);
    out << (i + 1) << ',' << rows[i].size();
    if (want_caps)
      out << ',' << fmt_double(sequence_loss(seq, SequenceLossKind::Caps, aggregation));
    if (want_raw)
      out << ','
          << fmt_double(sequence_loss(seq, SequenceLossKind::GradCapsRaw, aggregation));
    if (want_div)
      out << ',' << fmt_double(sequence_loss(seq, SequenceLossKind::GradCapsDiv,
                                             aggregation, epsilon_div));
    if (want_tanh)
      out << ',' << fmt_double(sequence_loss(seq, SequenceLossKind::GradCapsTanh,
                                             aggregation, epsilon_tanh));
    out << "\n";
  }
  return out.str();
}

}  // namespace gradcaps
