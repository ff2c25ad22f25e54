#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "grassroots/decision.hpp"
#include "grassroots/errors.hpp"
#include "grassroots/network.hpp"
#include "grassroots/rng.hpp"

namespace grassroots {

inline constexpr double kConsensusTol = 1e-8;
inline constexpr double kSurvivalThreshold = 1e-4;
inline constexpr double kDominanceThreshold = 0.5;
inline constexpr double kCompletionThreshold = 1.0 - 1e-4;
inline constexpr double kDefaultAlpha = 0.1;
inline constexpr std::size_t kDefaultMaxIters = 10000;

/// Mental states m (probability of the innovation being the norm) and the
/// signals s emitted in the most recent cycle. s is all zeros before the
/// first cycle and carries no meaning there.
struct SimState {
  std::vector<double> m;
  std::vector<std::uint8_t> s;
  std::size_t t = 0;

  double mean() const noexcept {
    double sum = 0.0;
    for (double x : m) sum += x;
    return m.empty() ? 0.0 : sum / static_cast<double>(m.size());
  }
};

enum class Termination { consensus_zero, consensus_one, max_iterations };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::consensus_zero: return "consensus_zero";
    case Termination::consensus_one: return "consensus_one";
    case Termination::max_iterations: return "max_iterations";
  }
  return "?";
}

struct OutcomeFlags {
  bool survival = false;
  bool dominance = false;
  bool completion = false;
};

inline OutcomeFlags classify_outcome(double mbar) {
  return {mbar > kSurvivalThreshold, mbar >= kDominanceThreshold, mbar >= kCompletionThreshold};
}

/// Highest outcome class reached: extinction < survival < dominance < completion.
inline std::string_view outcome_label(const OutcomeFlags& f) {
  if (f.completion) return "completion";
  if (f.dominance) return "dominance";
  if (f.survival) return "survival";
  return "extinction";
}

struct RunOutcome {
  double mbar_final = 0.0;
  std::size_t t_final = 0;
  Termination terminated_by = Termination::max_iterations;
  OutcomeFlags flags;
};

/// Everyone at m = 0 except the innovator at m = 1.
inline SimState init_state(const Network& net, NodeId innovator) {
  if (innovator >= net.size()) {
    throw DomainError("innovator " + std::to_string(innovator) + " out of range");
  }
  SimState st;
  st.m.assign(net.size(), 0.0);
  st.s.assign(net.size(), 0);
  st.m[innovator] = 1.0;
  return st;
}

/// Per-node clog rules sharing one categoriality angle.
inline std::vector<DecisionRule> make_rules(double phi_deg, std::span<const double> betas) {
  std::vector<DecisionRule> rules;
  rules.reserve(betas.size());
  for (double b : betas) rules.emplace_back(Family::clog, DecisionParams{phi_deg, b});
  return rules;
}

inline void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("alpha " + std::to_string(alpha) + " outside (0, 1]");
  }
}

struct StepExtent {
  double min_m = 0.0;
  double max_m = 0.0;
};

/// One synchronous cycle.
///   1. every node emits s_i = 1 with probability rule_i(m_i), reading the
///      pre-cycle m. A uniform draw is consumed only when 0 < p < 1.
///   2. every node averages its neighbors' fresh signals and moves
///      m_i <- alpha * input_i + (1 - alpha) * m_i.
/// Phase 2 reads only s and the node's own m, so updating m in place is
/// order independent. Returns the range of the new m.
inline StepExtent step(SimState& st, const Network& net, std::span<const DecisionRule> rules,
                       double alpha, Rng& rng) {
  const std::size_t n = net.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double p = rules[i](st.m[i]);
    if (p <= 0.0) {
      st.s[i] = 0;
    } else if (p >= 1.0) {
      st.s[i] = 1;
    } else {
      st.s[i] = uniform01(rng) < p ? 1 : 0;
    }
  }
  const double keep = 1.0 - alpha;
  StepExtent ext{1.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = net.neighbors(static_cast<NodeId>(i));
    double m = st.m[i];
    if (!nb.empty()) {
      unsigned ones = 0;
      for (NodeId j : nb) ones += st.s[j];
      const double input = static_cast<double>(ones) / static_cast<double>(nb.size());
      m = alpha * input + keep * m;
      st.m[i] = m;
    }
    if (m < ext.min_m) ext.min_m = m;
    if (m > ext.max_m) ext.max_m = m;
  }
  ++st.t;
  return ext;
}

struct NoTrajectory {
  void operator()(std::size_t, double) const noexcept {}
};

/// Steps st until consensus (all m < 1e-8, or all m > 1 - 1e-8) or until
/// st.t reaches max_iters, then classifies the final mean state. The
/// observer sees (t, mbar) at the starting state and after every cycle.
template <typename Observer = NoTrajectory>
RunOutcome run_dynamics(SimState& st, const Network& net, std::span<const DecisionRule> rules,
                        double alpha, std::size_t max_iters, Rng& rng, Observer&& observe = {}) {
  validate_alpha(alpha);
  if (max_iters < 1) throw DomainError("max_iters must be >= 1");
  if (rules.size() != net.size() || st.m.size() != net.size()) {
    throw DomainError("rule/state size does not match network");
  }
  constexpr bool observed = !std::is_same_v<std::decay_t<Observer>, NoTrajectory>;
  if constexpr (observed) observe(st.t, st.mean());
  RunOutcome out;
  while (st.t < max_iters) {
    const auto ext = step(st, net, rules, alpha, rng);
    if constexpr (observed) observe(st.t, st.mean());
    if (ext.max_m < kConsensusTol) {
      out.terminated_by = Termination::consensus_zero;
      break;
    }
    if (ext.min_m > 1.0 - kConsensusTol) {
      out.terminated_by = Termination::consensus_one;
      break;
    }
  }
  out.t_final = st.t;
  out.mbar_final = st.mean();
  out.flags = classify_outcome(out.mbar_final);
  return out;
}

inline RunOutcome run_to_completion(const Network& net, NodeId innovator,
                                    std::span<const DecisionRule> rules, double alpha,
                                    std::size_t max_iters, Rng& rng) {
  SimState st = init_state(net, innovator);
  return run_dynamics(st, net, rules, alpha, max_iters, rng);
}

}  // namespace grassroots
