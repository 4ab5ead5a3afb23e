// ntklab: command-line driver for training runs, sweeps, property checks,
// limit kernels, invariant drift, and plots.

#include "ntklab/harness/commands.hpp"

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include "CLI11.hpp"
#endif

#include <filesystem>
#include <iostream>
#include <regex>

namespace fs = std::filesystem;
using namespace ntklab;

namespace {

void print_summary(const RunRecord& rec) {
  const RunReport& r = rec.report;
  std::cout << "S=" << rec.spec.dims.S << " m=" << rec.spec.dims.m << " rep=" << rec.spec.rep
            << " status=" << to_string(r.status) << " T=" << r.T << " kappa_H=" << r.kappa_H
            << " |D|=" << r.D_count << " ||W_T-W_0||_F=" << r.w_displacement << " ("
            << rec.wall_seconds << " s)\n";
}

void write_sweep_outputs(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows) {
  const fs::path out(cfg.output_dir);
  write_text(out / "table.txt", emit_table(rows));
  for (const auto& [S, csv] : emit_plot_data(rows, cfg.n))
    write_text(out / ("plot_S" + std::to_string(S) + ".csv"), csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ntklab: two-rate gradient descent and NTK diagnostics for shallow ReLU networks"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Train one instance and write its JSON report");
  RunSpec rs;
  std::uint64_t run_master = 0;
  std::string run_label = "gaussian", run_zinit = "rademacher", run_out = "out";
  rs.dims = {100, 100, 100};
  run->add_option("--n", rs.dims.n, "Input dimension")->capture_default_str();
  run->add_option("--S", rs.dims.S, "Hidden width")->capture_default_str();
  run->add_option("--m", rs.dims.m, "Sample count")->capture_default_str();
  run->add_option("--eta-w", rs.eta_w, "First-layer rate")->capture_default_str();
  run->add_option("--eta-z", rs.eta_z, "Second-layer rate")->capture_default_str();
  run->add_option("--label-mode", run_label, "gaussian|low_spectrum|high_spectrum|local|exact_fit")
      ->capture_default_str();
  run->add_option("--z-init", run_zinit, "rademacher|gaussian")->capture_default_str();
  run->add_option("--master-seed", run_master, "Master seed")->capture_default_str();
  run->add_option("--rep", rs.rep, "Repetition index")->capture_default_str();
  run->add_option("--eps-success", rs.eps_success)->capture_default_str();
  run->add_option("--max-steps", rs.max_steps)->capture_default_str();
  run->add_option("--history-stride", rs.history_stride)->capture_default_str();
  run->add_option("--output-dir", run_out)->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a grid of (S, m) cells with repetitions");
  std::string sweep_config;
  ExperimentConfig flags;
  std::vector<Index> m_list;
  std::string m_rule, sw_label, sw_zinit;
  sweep->add_option("--config", sweep_config, "JSON config file");
  auto* o_n = sweep->add_option("--n", flags.n);
  auto* o_S = sweep->add_option("--S-list", flags.S_list)->delimiter(',');
  auto* o_mlist = sweep->add_option("--m-list", m_list, "Explicit m values")->delimiter(',');
  auto* o_mrule = sweep->add_option("--m-rule", m_rule, "paper-grid|paper-table");
  auto* o_eta = sweep->add_option("--eta-w-default", flags.eta_w_default);
  auto* o_etaz = sweep->add_option("--eta-z", flags.eta_z);
  auto* o_label = sweep->add_option("--label-mode", sw_label);
  auto* o_zinit = sweep->add_option("--z-init", sw_zinit);
  auto* o_reps = sweep->add_option("--repetitions", flags.repetitions);
  auto* o_seed = sweep->add_option("--master-seed", flags.master_seed);
  auto* o_out = sweep->add_option("--output-dir", flags.output_dir);
  auto* o_workers = sweep->add_option("--workers", flags.workers, "Worker threads (default: NTKLAB_WORKERS)");
  auto* o_steps = sweep->add_option("--max-steps", flags.max_steps);

  // props
  auto* props = app.add_subcommand("props", "Quasirandom property bundle for one sampled instance");
  ProblemDims pd{100, 500, 1000};
  std::uint64_t props_seed = 0;
  std::string props_zinit = "rademacher", props_out = "props.json";
  int props_samples = 200;
  props->add_option("--n", pd.n)->capture_default_str();
  props->add_option("--S", pd.S)->capture_default_str();
  props->add_option("--m", pd.m)->capture_default_str();
  props->add_option("--seed", props_seed)->capture_default_str();
  props->add_option("--z-init", props_zinit)->capture_default_str();
  props->add_option("--num-samples", props_samples)->capture_default_str();
  props->add_option("--output", props_out)->capture_default_str();

  // kernels
  auto* kernels = app.add_subcommand("kernels", "Closed-form vs Monte Carlo limit kernels");
  std::vector<double> gammas{-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0};
  std::int64_t k_samples = 1000000;
  std::uint64_t k_seed = 0;
  Index k_dim = 3;
  std::string k_out = "kernels.csv";
  kernels->add_option("--gammas", gammas)->delimiter(',')->capture_default_str();
  kernels->add_option("--samples", k_samples)->capture_default_str();
  kernels->add_option("--seed", k_seed)->capture_default_str();
  kernels->add_option("--dim", k_dim, "Ambient dimension of the sampled w")->capture_default_str();
  kernels->add_option("--output", k_out)->capture_default_str();

  // invariant
  auto* inv = app.add_subcommand("invariant", "Layer-balance invariant trace and drift study");
  ProblemDims idims{20, 20, 100};
  TrainConfig icfg;
  icfg.eta_z = 1e-3;
  std::uint64_t i_seed = 0;
  int halvings = 2;
  std::string i_out = "out";
  inv->add_option("--n", idims.n)->capture_default_str();
  inv->add_option("--S", idims.S)->capture_default_str();
  inv->add_option("--m", idims.m)->capture_default_str();
  inv->add_option("--eta-w", icfg.eta_w)->capture_default_str();
  inv->add_option("--eta-z", icfg.eta_z)->capture_default_str();
  inv->add_option("--seed", i_seed)->capture_default_str();
  inv->add_option("--halvings", halvings)->capture_default_str();
  inv->add_option("--output-dir", i_out)->capture_default_str();

  // plot
  auto* plot = app.add_subcommand("plot", "SVG figures from plot_S*.csv files");
  std::string plot_dir = "out";
  plot->add_option("--input-dir", plot_dir)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      rs.label_mode = parse_label_mode(run_label);
      rs.z_init = parse_z_init(run_zinit);
      rs.seed = run_seed(run_master, static_cast<std::uint64_t>(rs.dims.S),
                         static_cast<std::uint64_t>(rs.dims.m), static_cast<std::uint64_t>(rs.rep));
      print_summary(run_single(rs, run_out));
    } else if (*sweep) {
      ExperimentConfig cfg;
      if (!sweep_config.empty()) cfg = experiment_config_from_json(json::parse(read_text(sweep_config)));
      if (o_n->count()) cfg.n = flags.n;
      if (o_S->count()) cfg.S_list = flags.S_list;
      if (o_mlist->count()) {
        cfg.m_rule = MGrid::explicit_list;
        cfg.m_list = m_list;
      }
      if (o_mrule->count()) {
        if (m_rule == "paper-grid") cfg.m_rule = MGrid::paper_grid;
        else if (m_rule == "paper-table") cfg.m_rule = MGrid::paper_table;
        else throw std::invalid_argument("--m-rule must be paper-grid or paper-table");
      }
      if (o_eta->count()) cfg.eta_w_default = flags.eta_w_default;
      if (o_etaz->count()) cfg.eta_z = flags.eta_z;
      if (o_label->count()) cfg.label_mode = parse_label_mode(sw_label);
      if (o_zinit->count()) cfg.z_init = parse_z_init(sw_zinit);
      if (o_reps->count()) cfg.repetitions = flags.repetitions;
      if (o_seed->count()) cfg.master_seed = flags.master_seed;
      if (o_out->count()) cfg.output_dir = flags.output_dir;
      if (o_workers->count()) cfg.workers = flags.workers;
      if (o_steps->count()) cfg.max_steps = flags.max_steps;
      cfg.validate();
      write_text(fs::path(cfg.output_dir) / "config.json", to_json(cfg).dump(2) + "\n");
      const SweepResult res = run_sweep(cfg);
      for (const auto& rec : res.records) print_summary(rec);
      for (const auto& f : res.failures) std::cerr << "run failed: " << f << '\n';
      write_sweep_outputs(cfg, res.rows);
      std::cout << emit_table(res.rows);
      return res.failures.empty() ? 0 : 2;
    } else if (*props) {
      PropertySuiteOptions opt;
      opt.z_init = parse_z_init(props_zinit);
      opt.subsets.num_samples = props_samples;
      const json doc = props_command(pd, props_seed, opt);
      write_text(props_out, doc.dump(2) + "\n");
      int failing = 0;
      for (const auto& r : doc.at("reports")) {
        std::cout << r.at("name").get<std::string>() << " realized=" << r.at("realized_constant")
                  << (r.at("pass_hint").get<bool>() ? "" : "  (outside threshold)") << '\n';
        failing += r.at("pass_hint").get<bool>() ? 0 : 1;
      }
      std::cout << failing << " report(s) outside threshold; written to " << props_out << '\n';
    } else if (*kernels) {
      const std::string csv = kernels_csv(gammas, k_samples, k_seed, k_dim);
      write_text(k_out, csv);
      std::cout << csv;
    } else if (*inv) {
      const Instance instance = make_instance(idims, LabelMode::gaussian, ZInit::rademacher, i_seed);
      TrainConfig traced = icfg;
      traced.record_invariant = true;
      const RunReport rep = train(instance.data, instance.theta0, traced);
      std::ostringstream trace;
      write_invariant_csv(rep.invariant, trace);
      write_text(fs::path(i_out) / "invariant.csv", trace.str());
      std::string study = "eta_scale,drift_max,drift_max_scaled_rates,status,T,flagged\n";
      if (icfg.eta_w > 0.0 && icfg.eta_z > 0.0)
        study = drift_study_csv(drift_study(instance.data, instance.theta0, icfg, halvings));
      write_text(fs::path(i_out) / "drift_study.csv", study);
      std::cout << "status=" << to_string(rep.status) << " T=" << rep.T
                << " drift_max=" << rep.invariant.drift_max << '\n'
                << study;
    } else if (*plot) {
      const std::regex name(R"(plot_S(\d+)\.csv)");
      int count = 0;
      for (const auto& entry : fs::directory_iterator(plot_dir)) {
        std::smatch mt;
        const std::string fname = entry.path().filename().string();
        if (!std::regex_match(fname, mt, name)) continue;
        const Index S = std::stol(mt[1].str());
        for (const auto& [file, svg] : plot_figures(read_text(entry.path()), S)) {
          write_text(fs::path(plot_dir) / file, svg);
          ++count;
        }
      }
      std::cout << "wrote " << count << " SVG file(s) to " << plot_dir << '\n';
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
