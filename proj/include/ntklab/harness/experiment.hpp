#pragma once

// Sweep configuration, single runs, concurrent sweeps, and aggregation.
//
// Output layout under output_dir:
//   runs/S<S>_m<m>_rep<r>.json   one report per run
//   sweep.csv                    one aggregated row per (S, m)

#include "ntklab/harness/serialize.hpp"
#include "ntklab/rng.hpp"
#include "ntklab/synth_data.hpp"
#include "ntklab/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ntklab {

struct RateOverride {
  Index S = 0;
  Index m_min = 0;
  double eta_w = 0.0;
};

enum class MGrid { explicit_list, paper_grid, paper_table };

struct ExperimentConfig {
  Index n = 100;
  std::vector<Index> S_list{100};
  MGrid m_rule = MGrid::paper_grid;
  std::vector<Index> m_list;
  double eta_w_default = 1e-3;
  double eta_z = 0.0;
  std::vector<RateOverride> rate_overrides{{500, 900, 5e-4}, {1000, 900, 2e-4}};
  LabelMode label_mode = LabelMode::gaussian;
  ZInit z_init = ZInit::rademacher;
  int repetitions = 10;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  // Trainer knobs beyond the sweep protocol.
  double eps_success = 1e-3;
  std::int64_t max_steps = 100000;
  std::int64_t history_stride = 10;
  int workers = 0;  // 0: NTKLAB_WORKERS or hardware concurrency

  void validate() const {
    require(n >= 1, "ExperimentConfig: n must be positive");
    require(!S_list.empty(), "ExperimentConfig: S_list is empty");
    require(repetitions >= 1, "ExperimentConfig: repetitions must be >= 1");
    for (const auto& o : rate_overrides)
      require(o.eta_w > 0.0, "ExperimentConfig: override rates must be positive");
    if (m_rule == MGrid::explicit_list) require(!m_list.empty(), "ExperimentConfig: m list is empty");
  }
};

/// m values for width S: explicit list, 100..1000 step S/10, or 100..1000 step 100.
inline std::vector<Index> m_values(const ExperimentConfig& cfg, Index S) {
  if (cfg.m_rule == MGrid::explicit_list) return cfg.m_list;
  const Index step = cfg.m_rule == MGrid::paper_table ? 100 : std::max<Index>(S / 10, 1);
  std::vector<Index> out;
  for (Index m = 100; m <= 1000; m += step) out.push_back(m);
  return out;
}

inline double eta_w_for(const ExperimentConfig& cfg, Index S, Index m) {
  for (const auto& o : cfg.rate_overrides)
    if (o.S == S && m >= o.m_min) return o.eta_w;
  return cfg.eta_w_default;
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("n")) c.n = j.at("n").get<Index>();
  if (j.contains("S_list")) c.S_list = j.at("S_list").get<std::vector<Index>>();
  if (j.contains("m_rule")) {
    const json& r = j.at("m_rule");
    if (r.is_array()) {
      c.m_rule = MGrid::explicit_list;
      c.m_list = r.get<std::vector<Index>>();
    } else if (r.get<std::string>() == "paper-grid") {
      c.m_rule = MGrid::paper_grid;
    } else if (r.get<std::string>() == "paper-table") {
      c.m_rule = MGrid::paper_table;
    } else {
      throw std::invalid_argument("m_rule must be a list, \"paper-grid\" or \"paper-table\"");
    }
  }
  if (j.contains("eta_w_default")) c.eta_w_default = j.at("eta_w_default").get<double>();
  if (j.contains("eta_z")) c.eta_z = j.at("eta_z").get<double>();
  if (j.contains("rate_overrides")) {
    c.rate_overrides.clear();
    for (const auto& o : j.at("rate_overrides"))
      c.rate_overrides.push_back({o.at(0).get<Index>(), o.at(1).get<Index>(), o.at(2).get<double>()});
  }
  if (j.contains("label_mode")) c.label_mode = parse_label_mode(j.at("label_mode").get<std::string>());
  if (j.contains("z_init")) c.z_init = parse_z_init(j.at("z_init").get<std::string>());
  if (j.contains("repetitions")) c.repetitions = j.at("repetitions").get<int>();
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("eps_success")) c.eps_success = j.at("eps_success").get<double>();
  if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<std::int64_t>();
  if (j.contains("history_stride")) c.history_stride = j.at("history_stride").get<std::int64_t>();
  if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  c.validate();
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  json overrides = json::array();
  for (const auto& o : c.rate_overrides) overrides.push_back({o.S, o.m_min, o.eta_w});
  json rule = c.m_rule == MGrid::explicit_list ? json(c.m_list)
              : c.m_rule == MGrid::paper_grid  ? json("paper-grid")
                                               : json("paper-table");
  return {{"n", c.n},
          {"S_list", c.S_list},
          {"m_rule", rule},
          {"eta_w_default", c.eta_w_default},
          {"eta_z", c.eta_z},
          {"rate_overrides", overrides},
          {"label_mode", to_string(c.label_mode)},
          {"z_init", to_string(c.z_init)},
          {"repetitions", c.repetitions},
          {"master_seed", c.master_seed},
          {"output_dir", c.output_dir},
          {"eps_success", c.eps_success},
          {"max_steps", c.max_steps},
          {"history_stride", c.history_stride}};
}

/// Everything needed to reproduce one run.
struct RunSpec {
  ProblemDims dims;
  int rep = 0;
  std::uint64_t seed = 0;  // derived run seed
  double eta_w = 1e-3;
  double eta_z = 0.0;
  LabelMode label_mode = LabelMode::gaussian;
  ZInit z_init = ZInit::rademacher;
  double eps_success = 1e-3;
  std::int64_t max_steps = 100000;
  std::int64_t history_stride = 10;
};

inline RunSpec make_run_spec(const ExperimentConfig& cfg, Index S, Index m, int rep) {
  RunSpec s;
  s.dims = {cfg.n, m, S};
  s.rep = rep;
  s.seed = run_seed(cfg.master_seed, static_cast<std::uint64_t>(S), static_cast<std::uint64_t>(m),
                    static_cast<std::uint64_t>(rep));
  s.eta_w = eta_w_for(cfg, S, m);
  s.eta_z = cfg.eta_z;
  s.label_mode = cfg.label_mode;
  s.z_init = cfg.z_init;
  s.eps_success = cfg.eps_success;
  s.max_steps = cfg.max_steps;
  s.history_stride = cfg.history_stride;
  return s;
}

struct Instance {
  DataSet data;
  Theta theta0;
};

inline Instance make_instance(const ProblemDims& dims, LabelMode mode, ZInit zinit,
                              std::uint64_t seed) {
  Instance inst;
  inst.data.X = sample_sphere_data(dims, seed);
  inst.theta0 = sample_init(dims, zinit, seed);
  inst.data.y = make_labels(mode, inst.data.X, inst.theta0, dims, seed);
  return inst;
}

inline json to_json(const RunSpec& s) {
  return {{"n", s.dims.n},          {"S", s.dims.S},
          {"m", s.dims.m},          {"rep", s.rep},
          {"seed", s.seed},         {"eta_w", s.eta_w},
          {"eta_z", s.eta_z},       {"label_mode", to_string(s.label_mode)},
          {"z_init", to_string(s.z_init)}, {"eps_success", s.eps_success},
          {"max_steps", s.max_steps}, {"history_stride", s.history_stride}};
}

struct RunRecord {
  RunSpec spec;
  RunReport report;
  double wall_seconds = 0.0;
};

inline RunRecord execute_run(const RunSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const Instance inst = make_instance(spec.dims, spec.label_mode, spec.z_init, spec.seed);
  TrainConfig tc;
  tc.eta_w = spec.eta_w;
  tc.eta_z = spec.eta_z;
  tc.eps_success = spec.eps_success;
  tc.max_steps = spec.max_steps;
  tc.history_stride = spec.history_stride;
  RunRecord rec{spec, train(inst.data, inst.theta0, tc), 0.0};
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// wall_seconds is the only nondeterministic field.
inline json to_json(const RunRecord& r) {
  return {{"config", to_json(r.spec)}, {"report", to_json(r.report)}, {"wall_seconds", r.wall_seconds}};
}

inline std::filesystem::path run_filename(const RunSpec& s) {
  return "S" + std::to_string(s.dims.S) + "_m" + std::to_string(s.dims.m) + "_rep" +
         std::to_string(s.rep) + ".json";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs one (n, S, m, rep) and writes runs/<name>.json under output_dir.
inline RunRecord run_single(const RunSpec& spec, const std::filesystem::path& output_dir) {
  RunRecord rec = execute_run(spec);
  write_text(output_dir / "runs" / run_filename(spec), to_json(rec).dump(2) + "\n");
  return rec;
}

struct Stat3 {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct SweepRow {
  Index S = 0;
  Index m = 0;
  int reps = 0;
  Stat3 T, kappa_H, D_count, w_displacement;
  std::map<RunStatus, int> status_counts;
};

inline Stat3 stat3(const std::vector<double>& v) {
  if (v.empty()) return {};
  Stat3 s{v.front(), 0.0, v.front()};
  double sum = 0.0;
  for (double x : v) {
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    sum += x;
  }
  s.mean = sum / static_cast<double>(v.size());
  return s;
}

/// Rows ordered by (S, m); within a cell, reports are combined in rep order.
inline std::vector<SweepRow> aggregate(std::vector<RunRecord> records) {
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.spec.dims.S, a.spec.dims.m, a.spec.rep) <
           std::tie(b.spec.dims.S, b.spec.dims.m, b.spec.rep);
  });
  std::vector<SweepRow> rows;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t k = i;
    std::vector<double> T, kh, D, W;
    SweepRow row;
    row.S = records[i].spec.dims.S;
    row.m = records[i].spec.dims.m;
    while (k < records.size() && records[k].spec.dims.S == row.S && records[k].spec.dims.m == row.m) {
      const RunReport& r = records[k].report;
      T.push_back(static_cast<double>(r.T));
      kh.push_back(r.kappa_H);
      D.push_back(static_cast<double>(r.D_count));
      W.push_back(r.w_displacement);
      ++row.status_counts[r.status];
      ++k;
    }
    row.reps = static_cast<int>(k - i);
    row.T = stat3(T);
    row.kappa_H = stat3(kh);
    row.D_count = stat3(D);
    row.w_displacement = stat3(W);
    rows.push_back(std::move(row));
    i = k;
  }
  return rows;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr const char* kSweepCsvHeader =
    "S,m,reps,T_min,T_mean,T_max,kappaH_min,kappaH_mean,kappaH_max,D_min,D_mean,D_max,"
    "Wdisp_min,Wdisp_mean,Wdisp_max,converged,safety_valve,max_steps";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  auto count = [](const SweepRow& r, RunStatus s) {
    auto it = r.status_counts.find(s);
    return it == r.status_counts.end() ? 0 : it->second;
  };
  for (const auto& r : rows) {
    out << r.S << ',' << r.m << ',' << r.reps;
    for (const Stat3* s : {&r.T, &r.kappa_H, &r.D_count, &r.w_displacement})
      out << ',' << format_number(s->min) << ',' << format_number(s->mean) << ','
          << format_number(s->max);
    out << ',' << count(r, RunStatus::Converged) << ',' << count(r, RunStatus::SafetyValve) << ','
        << count(r, RunStatus::MaxSteps) << '\n';
  }
  return out.str();
}

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NTKLAB_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct SweepResult {
  std::vector<RunRecord> records;  // ordered by (S, m, rep)
  std::vector<SweepRow> rows;
  std::vector<std::string> failures;  // runs that threw, with context
};

/// Executes every (S, m, rep) of the sweep, writes per-run JSON and sweep.csv.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RunSpec> specs;
  for (Index S : cfg.S_list)
    for (Index m : m_values(cfg, S))
      for (int rep = 0; rep < cfg.repetitions; ++rep) specs.push_back(make_run_spec(cfg, S, m, rep));

  const std::filesystem::path out_dir(cfg.output_dir);
  std::vector<std::optional<RunRecord>> slots(specs.size());
  std::vector<std::string> errors(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        slots[i] = run_single(specs[i], out_dir);
      } catch (const std::exception& ex) {
        errors[i] = "S=" + std::to_string(specs[i].dims.S) + " m=" + std::to_string(specs[i].dims.m) +
                    " rep=" + std::to_string(specs[i].rep) + ": " + ex.what();
      }
    }
  };
  const int nw = std::min<int>(worker_count(cfg.workers), static_cast<int>(std::max<std::size_t>(specs.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult res;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (slots[i]) res.records.push_back(std::move(*slots[i]));
    if (!errors[i].empty()) res.failures.push_back(errors[i]);
  }
  res.rows = aggregate(res.records);
  write_text(out_dir / "sweep.csv", sweep_csv(res.rows));
  return res;
}

inline RunSpec run_spec_from_json(const json& j) {
  RunSpec s;
  s.dims = {j.at("n").get<Index>(), j.at("m").get<Index>(), j.at("S").get<Index>()};
  s.rep = j.at("rep").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.eta_w = j.at("eta_w").get<double>();
  s.eta_z = j.at("eta_z").get<double>();
  s.label_mode = parse_label_mode(j.at("label_mode").get<std::string>());
  s.z_init = parse_z_init(j.at("z_init").get<std::string>());
  s.eps_success = j.at("eps_success").get<double>();
  s.max_steps = j.at("max_steps").get<std::int64_t>();
  s.history_stride = j.at("history_stride").get<std::int64_t>();
  return s;
}

/// Reads every runs/*.json under output_dir.
inline std::vector<RunRecord> load_run_records(const std::filesystem::path& output_dir) {
  std::vector<RunRecord> out;
  const auto dir = output_dir / "runs";
  if (!std::filesystem::exists(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    json j;
    try {
      j = json::parse(read_text(entry.path()));
    } catch (const json::exception& ex) {
      throw std::runtime_error("malformed run report " + entry.path().string() + ": " + ex.what());
    }
    out.push_back({run_spec_from_json(j.at("config")), run_report_from_json(j.at("report")),
                   j.value("wall_seconds", 0.0)});
  }
  return out;
}

}  // namespace ntklab
