#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "grassroots/decision.hpp"
#include "grassroots/dynamics.hpp"
#include "grassroots/errors.hpp"
#include "grassroots/montecarlo.hpp"
#include "grassroots/network.hpp"
#include "grassroots/scenarios.hpp"

namespace grassroots {

// --- configuration -----------------------------------------------------------

/// Raw key=value settings. Keys are normalised to snake_case.
using ConfigMap = std::map<std::string, std::string>;

inline std::string normalise_key(std::string key) {
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  return key;
}

/// Whitespace-separated key=value tokens; '#' starts a comment to end of line.
inline ConfigMap parse_kv_text(std::string_view text) {
  ConfigMap out;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError(tok, "expected key=value");
      }
      out[normalise_key(tok.substr(0, eq))] = tok.substr(eq + 1);
    }
  }
  return out;
}

inline ConfigMap read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str());
}

/// Entries of overrides replace those of base.
inline ConfigMap merge(ConfigMap base, const ConfigMap& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
  return base;
}

namespace detail {

inline double to_double(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError(key, "not a number: '" + s + "'");
  return v;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key, "not a non-negative integer: '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError(key, "integer out of range: '" + s + "'");
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace detail

/// "60", "45,60,90" or an inclusive range "45:90" / "45:90:5".
inline std::vector<double> parse_double_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    const auto p = detail::split(s, ':');
    if (p.size() < 2 || p.size() > 3) throw ConfigError(key, "range must be lo:hi or lo:hi:step");
    const double lo = detail::to_double(key, p[0]);
    const double hi = detail::to_double(key, p[1]);
    const double step = p.size() == 3 ? detail::to_double(key, p[2]) : 1.0;
    if (!(step > 0.0) || hi < lo) throw ConfigError(key, "empty or ill-formed range '" + s + "'");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
  for (const auto& part : detail::split(s, ',')) out.push_back(detail::to_double(key, part));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

inline std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& s) {
  std::vector<std::size_t> out;
  if (s.find(':') != std::string::npos) {
    const auto p = detail::split(s, ':');
    if (p.size() < 2 || p.size() > 3) throw ConfigError(key, "range must be lo:hi or lo:hi:step");
    const auto lo = detail::to_uint(key, p[0]);
    const auto hi = detail::to_uint(key, p[1]);
    const auto step = p.size() == 3 ? detail::to_uint(key, p[2]) : 1;
    if (step == 0 || hi < lo) throw ConfigError(key, "empty or ill-formed range '" + s + "'");
    for (auto v = lo; v <= hi; v += step) out.push_back(static_cast<std::size_t>(v));
    return out;
  }
  for (const auto& part : detail::split(s, ',')) out.push_back(detail::to_uint(key, part));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

inline void reject_unknown_keys(const ConfigMap& cfg, std::initializer_list<std::string_view> known) {
  for (const auto& [k, v] : cfg) {
    bool ok = false;
    for (auto kk : known) ok = ok || kk == k;
    if (!ok) throw ConfigError(k, "unknown key");
  }
}

namespace detail {

inline ScenarioConfig scenario_from_map(const ConfigMap& cfg) {
  ScenarioConfig c;
  if (auto it = cfg.find("scenario"); it != cfg.end()) {
    try {
      c.kind = scenario_from_string(it->second);
    } catch (const DomainError& e) {
      throw ConfigError("scenario", e.what());
    }
  }
  if (auto it = cfg.find("n"); it != cfg.end()) c.n = to_uint("n", it->second);
  if (auto it = cfg.find("attach"); it != cfg.end()) c.attach_count = to_uint("attach", it->second);
  if (auto it = cfg.find("alpha"); it != cfg.end()) c.alpha = to_double("alpha", it->second);
  if (auto it = cfg.find("max_iters"); it != cfg.end()) c.max_iters = to_uint("max_iters", it->second);
  return c;
}

inline std::uint64_t required_seed(const ConfigMap& cfg) {
  const auto it = cfg.find("seed");
  if (it == cfg.end()) throw ConfigError("seed", "a master seed is required");
  return to_uint("seed", it->second);
}

inline std::size_t regen_limit_from(const ConfigMap& cfg) {
  const auto it = cfg.find("regen_limit");
  return it == cfg.end() ? kDefaultRegenLimit : to_uint("regen_limit", it->second);
}

}  // namespace detail

/// Grid used when phi is not given: 45 alone for neutral, 50..90 for
/// unbiased, 45..90 in 5 degree steps otherwise.
inline std::vector<double> default_phi_list(ScenarioKind kind) {
  if (kind == ScenarioKind::neutral) return {45.0};
  std::vector<double> out;
  for (int p = kind == ScenarioKind::unbiased ? 50 : 45; p <= 90; p += 5) out.push_back(p);
  return out;
}

inline std::vector<std::size_t> default_degree_list() { return {2, 3, 4, 6, 8, 12, 16, 24, 32}; }

/// Sweep settings; defaults n=256, attach=2, alpha=0.1, max_iters=10000,
/// runs=100, regen_limit=1000. `preset=full` switches to phi 45:90,
/// degrees 2:55 and 500 runs before explicit keys apply.
inline SweepSpec parse_sweep_config(const ConfigMap& cfg) {
  reject_unknown_keys(cfg, {"scenario", "phi", "seed", "n", "attach", "alpha", "max_iters",
                            "regen_limit", "degrees", "runs", "preset"});
  SweepSpec spec;
  spec.scenario = detail::scenario_from_map(cfg);
  spec.phi_list = default_phi_list(spec.scenario.kind);
  spec.degree_list = default_degree_list();
  spec.runs_per_cell = 100;
  if (auto it = cfg.find("preset"); it != cfg.end()) {
    if (it->second == "full") {
      spec.phi_list = parse_double_list("phi", spec.scenario.kind == ScenarioKind::neutral ? "45" : "45:90");
      if (spec.scenario.kind == ScenarioKind::unbiased) spec.phi_list.erase(spec.phi_list.begin());
      spec.degree_list = parse_count_list("degrees", "2:55");
      spec.runs_per_cell = 500;
    } else if (it->second != "desk") {
      throw ConfigError("preset", "expected 'desk' or 'full'");
    }
  }
  if (auto it = cfg.find("phi"); it != cfg.end()) spec.phi_list = parse_double_list("phi", it->second);
  if (auto it = cfg.find("degrees"); it != cfg.end()) spec.degree_list = parse_count_list("degrees", it->second);
  if (auto it = cfg.find("runs"); it != cfg.end()) spec.runs_per_cell = detail::to_uint("runs", it->second);
  spec.regen_limit = detail::regen_limit_from(cfg);
  spec.master_seed = detail::required_seed(cfg);
  validate(spec);
  return spec;
}

/// A single seeded run, reproducing run_index of the matching sweep cell.
struct RunConfig {
  ScenarioConfig scenario;
  std::uint64_t seed = 0;
  std::size_t run_index = 0;
  std::size_t regen_limit = kDefaultRegenLimit;
};

inline RunConfig parse_run_config(const ConfigMap& cfg) {
  reject_unknown_keys(cfg, {"scenario", "phi", "seed", "n", "attach", "alpha", "max_iters",
                            "regen_limit", "degree", "run_index"});
  RunConfig rc;
  rc.scenario = detail::scenario_from_map(cfg);
  rc.scenario.phi_deg = rc.scenario.kind == ScenarioKind::neutral ? 45.0 : 60.0;
  if (auto it = cfg.find("phi"); it != cfg.end()) rc.scenario.phi_deg = detail::to_double("phi", it->second);
  if (auto it = cfg.find("degree"); it != cfg.end()) rc.scenario.innovator_degree = detail::to_uint("degree", it->second);
  if (auto it = cfg.find("run_index"); it != cfg.end()) rc.run_index = detail::to_uint("run_index", it->second);
  rc.regen_limit = detail::regen_limit_from(cfg);
  if (rc.regen_limit < 1) throw ConfigError("regen_limit", "must be >= 1");
  rc.seed = detail::required_seed(cfg);
  validate(rc.scenario);
  return rc;
}

// --- CSV -------------------------------------------------------------------

/// Nine significant digits; "nan" for undefined values.
inline std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline std::string curve_csv(const std::vector<CurvePoint>& table) {
  std::string out = "m,f_m\n";
  for (const auto& p : table) out += fmt_num(p.m) + "," + fmt_num(p.f_m) + "\n";
  return out;
}

/// A continuum (identity map) is a single row "nan,continuum,1".
inline std::string fixed_points_csv(const FixedPointSet& fps) {
  std::string out = "location,stability,derivative\n";
  if (fps.continuum) return out + "nan,continuum,1\n";
  for (const auto& p : fps.points) {
    out += fmt_num(p.location) + "," + std::string(to_string(p.stability)) + "," + fmt_num(p.derivative) + "\n";
  }
  return out;
}

inline std::string edges_csv(const Network& net) {
  std::string out = "src,dst\n";
  for (const auto& e : net.edges()) out += std::to_string(e.u) + "," + std::to_string(e.v) + "\n";
  return out;
}

inline std::string degree_table_csv(const Network& net) {
  std::string out = "id,degree\n";
  for (NodeId i = 0; i < net.size(); ++i) out += std::to_string(i) + "," + std::to_string(net.degree(i)) + "\n";
  return out;
}

/// Final per-node picture of one run: id,degree,beta,distance,m_final.
/// distance counts hops from the innovator.
inline std::string run_nodes_csv(const RunDetail& d) {
  std::string out = "id,degree,beta,distance,m_final\n";
  const auto dist = bfs_distances(d.net, d.innovator);
  for (NodeId i = 0; i < d.net.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(d.net.degree(i)) + "," + fmt_num(d.beta[i]) + "," +
           std::to_string(dist[i]) + "," + fmt_num(d.final_state.m[i]) + "\n";
  }
  return out;
}

struct TrajectoryPoint {
  std::size_t t = 0;
  double mbar = 0.0;
};

inline std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj) {
  std::string out = "t,mbar\n";
  for (const auto& p : traj) out += std::to_string(p.t) + "," + fmt_num(p.mbar) + "\n";
  return out;
}

inline constexpr std::string_view kCellsHeader =
    "phi_deg,innovator_degree,runs,n_survival,n_dominance,n_completion,mean_mbar_final,"
    "sd_mbar_final,mean_t_final,n_regen_failures\n";

inline std::string cells_csv(const std::vector<CellResult>& cells) {
  std::string out(kCellsHeader);
  for (const auto& c : cells) {
    out += fmt_num(c.phi_deg) + "," + std::to_string(c.innovator_degree) + "," + std::to_string(c.runs) +
           "," + std::to_string(c.n_survival) + "," + std::to_string(c.n_dominance) + "," +
           std::to_string(c.n_completion) + "," + fmt_num(c.mean_mbar_final) + "," +
           fmt_num(c.sd_mbar_final) + "," + fmt_num(c.mean_t_final) + "," +
           std::to_string(c.n_regen_failures) + "\n";
  }
  return out;
}

inline constexpr std::string_view kRunsHeader = "scenario,phi_deg,degree,run_index,mbar_final,t_final,outcome\n";

/// Regeneration failures leave mbar_final and t_final empty.
inline std::string runs_csv_row(const RunRecord& r) {
  std::string out = std::string(to_string(r.scenario)) + "," + fmt_num(r.phi_deg) + "," +
                    std::to_string(r.degree) + "," + std::to_string(r.run_index) + ",";
  if (!r.outcome) return out + ",,regen_failure\n";
  return out + fmt_num(r.outcome->mbar_final) + "," + std::to_string(r.outcome->t_final) + "," +
         std::string(outcome_label(r.outcome->flags)) + "\n";
}

// --- files -----------------------------------------------------------------

/// Output file locations under one directory.
struct RunArtifacts {
  std::filesystem::path cells_path;
  std::filesystem::path runs_path;
  std::filesystem::path nodes_path;
  std::filesystem::path edges_path;
  std::filesystem::path trajectory_path;

  static RunArtifacts in(const std::filesystem::path& dir) {
    return {dir / "cells.csv", dir / "runs.csv", dir / "nodes.csv", dir / "edges.csv",
            dir / "trajectory.csv"};
  }
};

/// Writes through a sibling temporary and renames it into place on commit().
/// An uncommitted file is removed on destruction.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target)
      : target_(std::move(target)), tmp_(target_.string() + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open " + tmp_.string() + " for writing: " + std::strerror(errno));
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  void write(std::string_view s) {
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!out_) throw IoError("write failed on " + tmp_.string());
  }

  void commit() {
    out_.close();
    if (!out_) throw IoError("close failed on " + tmp_.string());
    std::error_code ec;
    std::filesystem::rename(tmp_, target_, ec);
    if (ec) throw IoError("cannot rename " + tmp_.string() + " to " + target_.string() + ": " + ec.message());
    committed_ = true;
  }

 private:
  std::filesystem::path target_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  AtomicFile f(path);
  f.write(content);
  f.commit();
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
}

/// Runs a sweep, streaming runs.csv in canonical order while it executes,
/// then writes cells.csv. Both files appear only once complete.
inline SweepResult run_sweep_to_files(const SweepSpec& spec, const RunArtifacts& art, std::size_t workers) {
  AtomicFile runs(art.runs_path);
  runs.write(kRunsHeader);
  SweepOptions opt;
  opt.workers = workers;
  opt.on_record = [&runs](const RunRecord& r) { runs.write(runs_csv_row(r)); };
  auto result = execute_sweep(spec, opt);
  runs.commit();
  write_file_atomic(art.cells_path, cells_csv(result.cells));
  return result;
}

/// Writes cells.csv and runs.csv for a finished sweep.
inline void write_outputs(const SweepResult& result, const RunArtifacts& art) {
  write_file_atomic(art.cells_path, cells_csv(result.cells));
  std::string runs(kRunsHeader);
  for (const auto& r : result.runs) runs += runs_csv_row(r);
  write_file_atomic(art.runs_path, runs);
}

}  // namespace grassroots
