#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "grassroots/dynamics.hpp"
#include "grassroots/errors.hpp"
#include "grassroots/network.hpp"
#include "grassroots/rng.hpp"
#include "grassroots/scenarios.hpp"

namespace grassroots {

inline constexpr std::size_t kDefaultRegenLimit = 1000;

struct SweepSpec {
  ScenarioConfig scenario;  // phi_deg and innovator_degree are overridden per cell
  std::vector<double> phi_list;
  std::vector<std::size_t> degree_list;
  std::size_t runs_per_cell = 100;
  std::uint64_t master_seed = 0;
  std::size_t regen_limit = kDefaultRegenLimit;

  std::size_t cell_count() const noexcept { return phi_list.size() * degree_list.size(); }
  std::size_t run_count() const noexcept { return cell_count() * runs_per_cell; }
};

/// The scenario template specialised to one grid cell.
inline ScenarioConfig cell_config(const SweepSpec& spec, double phi, std::size_t degree) {
  ScenarioConfig c = spec.scenario;
  c.phi_deg = phi;
  c.innovator_degree = degree;
  return c;
}

inline void validate(const SweepSpec& spec) {
  if (spec.phi_list.empty()) throw ConfigError("phi", "empty phi list");
  if (spec.degree_list.empty()) throw ConfigError("degrees", "empty degree list");
  if (spec.runs_per_cell < 1) throw ConfigError("runs", "must be >= 1");
  if (spec.regen_limit < 1) throw ConfigError("regen_limit", "must be >= 1");
  for (double phi : spec.phi_list) {
    for (std::size_t d : spec.degree_list) validate(cell_config(spec, phi, d));
  }
}

/// Stateless per-run seed. Each coordinate is folded in with combine_seed
/// (SplitMix64 finalizer, golden-ratio and 0x632BE59BD9B4E019 offsets); phi
/// enters through its IEEE-754 bit pattern.
inline std::uint64_t run_seed(std::uint64_t master_seed, ScenarioKind kind, double phi,
                              std::size_t degree, std::size_t run_index) {
  std::uint64_t h = mix64(master_seed);
  h = combine_seed(h, static_cast<std::uint64_t>(kind));
  h = combine_seed(h, std::bit_cast<std::uint64_t>(phi));
  h = combine_seed(h, degree);
  h = combine_seed(h, run_index);
  return h;
}

/// Everything one run produced. When no generated network contained a node
/// of the requested degree within regen_limit attempts, regen_failed is set
/// and only networks_generated is meaningful.
struct RunDetail {
  bool regen_failed = false;
  std::size_t networks_generated = 0;
  Network net;
  NodeId innovator = 0;
  std::vector<double> beta;
  SimState final_state;
  RunOutcome outcome;
};

/// One run from a single seed: network generation (retrying until the target
/// degree exists), innovator choice, bias assignment, dynamics.
template <typename Observer = NoTrajectory>
RunDetail simulate_run(const ScenarioConfig& cfg, std::uint64_t seed, std::size_t regen_limit,
                       Observer&& observe = {}) {
  validate(cfg);
  Rng rng(seed);
  RunDetail d;
  std::optional<NodeId> innovator;
  while (!innovator && d.networks_generated < regen_limit) {
    d.net = generate_pa_network(cfg.n, cfg.attach_count, rng);
    ++d.networks_generated;
    innovator = find_node_with_degree(d.net, cfg.innovator_degree, rng);
  }
  if (!innovator) {
    d.regen_failed = true;
    return d;
  }
  d.innovator = *innovator;
  d.beta = assign_biases(cfg.kind, d.net, d.innovator, rng);
  const auto rules = make_rules(cfg.phi_deg, d.beta);
  d.final_state = init_state(d.net, d.innovator);
  d.outcome = run_dynamics(d.final_state, d.net, rules, cfg.alpha, cfg.max_iters, rng,
                           std::forward<Observer>(observe));
  return d;
}

struct RunRecord {
  ScenarioKind scenario = ScenarioKind::neutral;
  double phi_deg = 0.0;
  std::size_t degree = 0;
  std::size_t run_index = 0;
  std::optional<RunOutcome> outcome;  // empty on regeneration failure
};

inline RunRecord execute_run(const SweepSpec& spec, double phi, std::size_t degree,
                             std::size_t run_index) {
  const auto cfg = cell_config(spec, phi, degree);
  const auto seed = run_seed(spec.master_seed, cfg.kind, phi, degree, run_index);
  const auto d = simulate_run(cfg, seed, spec.regen_limit);
  RunRecord r{cfg.kind, phi, degree, run_index, std::nullopt};
  if (!d.regen_failed) r.outcome = d.outcome;
  return r;
}

struct CellResult {
  double phi_deg = 0.0;
  std::size_t innovator_degree = 0;
  std::size_t runs = 0;  // completed runs; regeneration failures excluded
  std::size_t n_survival = 0;
  std::size_t n_dominance = 0;
  std::size_t n_completion = 0;
  double mean_mbar_final = std::numeric_limits<double>::quiet_NaN();
  double sd_mbar_final = std::numeric_limits<double>::quiet_NaN();
  double mean_t_final = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_regen_failures = 0;
};

/// Aggregates the records of one cell in the order given. SD is the sample
/// (n - 1) deviation, zero for a single run.
inline CellResult aggregate_cell(double phi, std::size_t degree, std::span<const RunRecord> records) {
  CellResult c;
  c.phi_deg = phi;
  c.innovator_degree = degree;
  double sum_m = 0.0;
  double sum_t = 0.0;
  for (const auto& r : records) {
    if (!r.outcome) {
      ++c.n_regen_failures;
      continue;
    }
    ++c.runs;
    c.n_survival += r.outcome->flags.survival;
    c.n_dominance += r.outcome->flags.dominance;
    c.n_completion += r.outcome->flags.completion;
    sum_m += r.outcome->mbar_final;
    sum_t += static_cast<double>(r.outcome->t_final);
  }
  if (c.runs == 0) return c;
  const double n = static_cast<double>(c.runs);
  c.mean_mbar_final = sum_m / n;
  c.mean_t_final = sum_t / n;
  double ss = 0.0;
  for (const auto& r : records) {
    if (r.outcome) ss += (r.outcome->mbar_final - c.mean_mbar_final) * (r.outcome->mbar_final - c.mean_mbar_final);
  }
  c.sd_mbar_final = c.runs > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return c;
}

/// Serialises records that finish out of order into canonical index order.
/// Each record reaches the sink exactly once, and only after every record
/// with a smaller index has.
class OrderedAppender {
 public:
  using Sink = std::function<void(const RunRecord&)>;

  OrderedAppender(std::span<const std::optional<RunRecord>> slots, Sink sink)
      : slots_(slots), sink_(std::move(sink)) {}

  // Call after slots[index] has been filled.
  void publish(std::size_t index) {
    std::lock_guard lock(mu_);
    ready_.push_back(index);
    std::push_heap(ready_.begin(), ready_.end(), std::greater<>{});
    while (!ready_.empty() && ready_.front() == next_) {
      std::pop_heap(ready_.begin(), ready_.end(), std::greater<>{});
      ready_.pop_back();
      if (sink_) sink_(*slots_[next_]);
      ++next_;
    }
  }

 private:
  std::span<const std::optional<RunRecord>> slots_;
  Sink sink_;
  std::mutex mu_;
  std::vector<std::size_t> ready_;
  std::size_t next_ = 0;
};

struct SweepResult {
  std::vector<CellResult> cells;  // phi-major, then degree, in spec order
  std::vector<RunRecord> runs;    // cell order, then run_index
};

struct SweepOptions {
  std::size_t workers = 0;           // 0 = hardware concurrency
  OrderedAppender::Sink on_record;   // streamed in canonical order
};

/// Runs the whole grid on a pool of workers pulling run indices from a
/// shared counter. Every run is seeded from its coordinates and aggregation
/// walks records in canonical order, so the result does not depend on the
/// worker count or scheduling.
inline SweepResult execute_sweep(const SweepSpec& spec, const SweepOptions& opt = {}) {
  validate(spec);
  const std::size_t total = spec.run_count();
  const std::size_t per_cell = spec.runs_per_cell;
  const std::size_t n_deg = spec.degree_list.size();

  std::vector<std::optional<RunRecord>> slots(total);
  OrderedAppender appender(slots, opt.on_record);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  const auto work = [&] {
    for (std::size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
      const std::size_t cell = idx / per_cell;
      try {
        slots[idx] = execute_run(spec, spec.phi_list[cell / n_deg], spec.degree_list[cell % n_deg],
                                 idx % per_cell);
        appender.publish(idx);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(total);
      }
    }
  };

  std::size_t workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(total, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult out;
  out.runs.reserve(total);
  for (auto& s : slots) out.runs.push_back(std::move(*s));
  out.cells.reserve(spec.cell_count());
  for (std::size_t cell = 0; cell < spec.cell_count(); ++cell) {
    out.cells.push_back(aggregate_cell(spec.phi_list[cell / n_deg], spec.degree_list[cell % n_deg],
                                       std::span(out.runs).subspan(cell * per_cell, per_cell)));
  }
  return out;
}

// --- innovator-degree analysis ----------------------------------------------

/// Empirical P(degree), indexed by degree, pooled over many fresh networks.
inline std::vector<double> empirical_degree_pmf(std::size_t n, std::size_t attach_count,
                                                std::size_t networks, std::uint64_t seed) {
  if (networks < 1) throw DomainError("need at least one network");
  Rng rng(mix64(seed));
  std::vector<double> counts;
  for (std::size_t k = 0; k < networks; ++k) {
    const auto net = generate_pa_network(n, attach_count, rng);
    for (auto d : net.degrees()) {
      if (d >= counts.size()) counts.resize(d + 1, 0.0);
      counts[d] += 1.0;
    }
  }
  const double total = static_cast<double>(n * networks);
  for (double& c : counts) c /= total;
  return counts;
}

enum class CascadeClass { survival, dominance, completion };

inline bool reached(const OutcomeFlags& f, CascadeClass c) {
  switch (c) {
    case CascadeClass::survival: return f.survival;
    case CascadeClass::dominance: return f.dominance;
    case CascadeClass::completion: return f.completion;
  }
  return false;
}

struct DegreeConditional {
  std::size_t degree = 0;
  std::size_t runs = 0;
  std::size_t cascades = 0;
  double p_cascade_given_degree = 0.0;
  std::optional<double> p_degree_given_cascade;  // empty when no cascade occurred anywhere
};

/// P(cascade | degree) from run counts and, by Bayes with the network degree
/// distribution, P(degree | cascade) normalised over the degrees present.
/// Regeneration failures are ignored.
inline std::vector<DegreeConditional> conditional_degree_distribution(
    std::span<const RunRecord> records, std::span<const double> degree_pmf,
    CascadeClass cls = CascadeClass::completion) {
  std::map<std::size_t, DegreeConditional> by_degree;
  for (const auto& r : records) {
    if (!r.outcome) continue;
    auto& row = by_degree[r.degree];
    row.degree = r.degree;
    ++row.runs;
    row.cascades += reached(r.outcome->flags, cls);
  }
  if (by_degree.empty()) throw DomainError("no completed run records");

  std::vector<DegreeConditional> table;
  double norm = 0.0;
  for (auto& [d, row] : by_degree) {
    row.p_cascade_given_degree = static_cast<double>(row.cascades) / static_cast<double>(row.runs);
    const double prior = d < degree_pmf.size() ? degree_pmf[d] : 0.0;
    norm += row.p_cascade_given_degree * prior;
    table.push_back(row);
  }
  if (norm > 0.0) {
    for (auto& row : table) {
      const double prior = row.degree < degree_pmf.size() ? degree_pmf[row.degree] : 0.0;
      row.p_degree_given_cascade = row.p_cascade_given_degree * prior / norm;
    }
  }
  return table;
}

}  // namespace grassroots
