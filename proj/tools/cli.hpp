#pragma once

#include <cstddef>
#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "grassroots/decision.hpp"
#include "grassroots/io_config.hpp"
#include "grassroots/montecarlo.hpp"
#include "grassroots/network.hpp"

namespace grassroots::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

namespace detail {

// String-valued option that lands in the config map only when given, so the
// defaults live in one place (parse_*_config).
struct KeyedOption {
  std::string key;
  std::string value;
  CLI::Option* opt = nullptr;
};

class KeyedOptions {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help,
           const std::string& shown_default = {}) {
    auto& o = opts_.emplace_back(std::make_unique<KeyedOption>());
    o->key = key;
    o->opt = app->add_option(flag, o->value, help);
    if (!shown_default.empty()) o->opt->default_str(shown_default);
  }

  ConfigMap collect(const std::string& config_file) const {
    ConfigMap file = config_file.empty() ? ConfigMap{} : read_kv_file(config_file);
    ConfigMap flags;
    for (const auto& o : opts_) {
      if (o->opt->count() > 0) flags[o->key] = o->value;
    }
    return merge(std::move(file), flags);
  }

 private:
  std::vector<std::unique_ptr<KeyedOption>> opts_;
};

inline void add_scenario_options(CLI::App* app, KeyedOptions& k) {
  k.add(app, "--scenario", "scenario", "neutral|unbiased|hubs|nearby|random", "nearby");
  k.add(app, "--seed", "seed", "master seed (required)");
  k.add(app, "--n", "n", "network size (even)", "256");
  k.add(app, "--attach", "attach", "preferential-attachment links per new node", "2");
  k.add(app, "--alpha", "alpha", "learning rate in (0,1]", "0.1");
  k.add(app, "--max-iters", "max_iters", "cycle cap per run", "10000");
  k.add(app, "--regen-limit", "regen_limit", "network regenerations allowed per run", "1000");
}

}  // namespace detail

/// Entry point behind the `grassroots` binary. 0 on success, 1 on usage
/// errors, 2 on runtime failures.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo simulator of grassroots cascades of linguistic innovations", "grassroots"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  // fn
  auto* fn = app.add_subcommand("fn", "tabulate a decision function or report its fixed points (CSV)");
  std::string family = "clog";
  double phi = 60.0;
  double beta = 0.0;
  std::size_t points = 101;
  bool fixed_points = false;
  std::string fn_out_dir;
  std::string fn_seed;
  fn->add_option("--family", family, "clog|logistic")->capture_default_str();
  fn->add_option("--phi", phi, "categoriality angle in degrees")->capture_default_str();
  fn->add_option("--beta", beta, "bias in [-0.5,0.5]")->capture_default_str();
  fn->add_option("--points", points, "grid points on [0,1]")->capture_default_str();
  fn->add_flag("--fixed-points", fixed_points, "emit location,stability,derivative instead of the curve");
  fn->add_option("--out-dir", fn_out_dir, "write curve.csv / fixed_points.csv here instead of stdout");
  fn->add_option("--seed", fn_seed, "accepted for uniformity; fn is deterministic");

  // net
  auto* net_cmd = app.add_subcommand("net", "generate a preferential-attachment network");
  detail::KeyedOptions net_opts;
  net_opts.add(net_cmd, "--seed", "seed", "random seed (required)");
  net_opts.add(net_cmd, "--n", "n", "node count", "256");
  net_opts.add(net_cmd, "--attach", "attach", "links per new node", "2");
  std::string net_out_dir = ".";
  net_cmd->add_option("--out-dir", net_out_dir, "directory for edges.csv and nodes.csv")->capture_default_str();

  // run
  auto* run_cmd = app.add_subcommand("run", "execute one seeded run");
  detail::KeyedOptions run_opts;
  std::string run_config;
  run_cmd->add_option("--config", run_config, "key=value file; flags override it");
  detail::add_scenario_options(run_cmd, run_opts);
  run_opts.add(run_cmd, "--phi", "phi", "categoriality angle in [45,90]", "60 (45 for neutral)");
  run_opts.add(run_cmd, "--degree", "degree", "innovator degree", "2");
  run_opts.add(run_cmd, "--run-index", "run_index", "run index within the (phi, degree) cell", "0");
  std::string run_out_dir = ".";
  bool dump_nodes = false;
  bool dump_traj = false;
  run_cmd->add_option("--out-dir", run_out_dir, "output directory")->capture_default_str();
  run_cmd->add_flag("--dump-nodes", dump_nodes, "write nodes.csv (id,degree,beta,distance,m_final) and edges.csv");
  run_cmd->add_flag("--dump-trajectory", dump_traj, "write trajectory.csv (t,mbar)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "execute a phi x degree x runs grid");
  detail::KeyedOptions sweep_opts;
  std::string sweep_config;
  sweep_cmd->add_option("--config", sweep_config, "key=value file; flags override it");
  detail::add_scenario_options(sweep_cmd, sweep_opts);
  sweep_opts.add(sweep_cmd, "--phi", "phi", "angles: 60 | 45,60,90 | 45:90[:step]", "45:90:5 (45 neutral, 50:90:5 unbiased)");
  sweep_opts.add(sweep_cmd, "--degrees", "degrees", "innovator degrees: list or lo:hi[:step]", "2,3,4,6,8,12,16,24,32");
  sweep_opts.add(sweep_cmd, "--runs", "runs", "runs per cell", "100");
  sweep_opts.add(sweep_cmd, "--preset", "preset", "desk|full (full: phi 45:90, degrees 2:55, 500 runs)", "desk");
  std::size_t workers = 0;
  std::string sweep_out_dir = ".";
  sweep_cmd->add_option("--workers", workers, "worker threads, 0 = all cores")->capture_default_str();
  sweep_cmd->add_option("--out-dir", sweep_out_dir, "directory for cells.csv and runs.csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (fn->parsed()) {
      const Family fam = family_from_string(family);
      const DecisionParams params{phi, beta};
      validate(fam, params);
      const std::string csv = fixed_points ? fixed_points_csv(find_fixed_points(fam, params))
                                           : curve_csv(tabulate_curve(fam, params, points));
      if (fn_out_dir.empty()) {
        out << csv;
      } else {
        ensure_directory(fn_out_dir);
        write_file_atomic(std::filesystem::path(fn_out_dir) / (fixed_points ? "fixed_points.csv" : "curve.csv"), csv);
      }
      return kOk;
    }

    if (net_cmd->parsed()) {
      const auto cfg = net_opts.collect({});
      const auto n = cfg.count("n") ? grassroots::detail::to_uint("n", cfg.at("n")) : 256;
      const auto attach = cfg.count("attach") ? grassroots::detail::to_uint("attach", cfg.at("attach")) : 2;
      const auto seed = grassroots::detail::required_seed(cfg);
      Rng rng(seed);
      Network g;
      try {
        g = generate_pa_network(n, attach, rng);
      } catch (const DomainError& e) {
        throw ConfigError("n", e.what());
      }
      ensure_directory(net_out_dir);
      const auto art = RunArtifacts::in(net_out_dir);
      write_file_atomic(art.edges_path, edges_csv(g));
      write_file_atomic(art.nodes_path, degree_table_csv(g));
      out << "nodes=" << g.size() << " edges=" << g.edge_count() << " mean_degree=" << fmt_num(g.mean_degree())
          << " max_degree=" << g.max_degree() << "\n";
      return kOk;
    }

    if (run_cmd->parsed()) {
      const auto rc = parse_run_config(run_opts.collect(run_config));
      const auto seed = run_seed(rc.seed, rc.scenario.kind, rc.scenario.phi_deg, rc.scenario.innovator_degree,
                                 rc.run_index);
      std::vector<TrajectoryPoint> traj;
      const auto d = simulate_run(rc.scenario, seed, rc.regen_limit,
                                  [&](std::size_t t, double m) { if (dump_traj) traj.push_back({t, m}); });
      if (d.regen_failed) {
        err << "error: no node of degree " << rc.scenario.innovator_degree << " in " << d.networks_generated
            << " generated networks\n";
        return kRuntime;
      }
      ensure_directory(run_out_dir);
      const auto art = RunArtifacts::in(run_out_dir);
      if (dump_nodes) {
        write_file_atomic(art.nodes_path, run_nodes_csv(d));
        write_file_atomic(art.edges_path, edges_csv(d.net));
      }
      if (dump_traj) write_file_atomic(art.trajectory_path, trajectory_csv(traj));
      out << "scenario=" << to_string(rc.scenario.kind) << " phi=" << fmt_num(rc.scenario.phi_deg)
          << " degree=" << rc.scenario.innovator_degree << " innovator=" << d.innovator
          << " networks_generated=" << d.networks_generated << " mbar_final=" << fmt_num(d.outcome.mbar_final)
          << " t_final=" << d.outcome.t_final << " terminated_by=" << to_string(d.outcome.terminated_by)
          << " outcome=" << outcome_label(d.outcome.flags) << "\n";
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const auto spec = parse_sweep_config(sweep_opts.collect(sweep_config));
      ensure_directory(sweep_out_dir);
      const auto result = run_sweep_to_files(spec, RunArtifacts::in(sweep_out_dir), workers);
      bool starved = false;
      for (const auto& c : result.cells) {
        if (c.runs == 0 && c.n_regen_failures > 0) {
          starved = true;
          err << "warning: phi=" << fmt_num(c.phi_deg) << " degree=" << c.innovator_degree
              << " had only regeneration failures\n";
        }
      }
      out << "cells=" << result.cells.size() << " runs=" << result.runs.size() << " out_dir=" << sweep_out_dir
          << "\n";
      return starved ? kRuntime : kOk;
    }
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for options\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace grassroots::cli
