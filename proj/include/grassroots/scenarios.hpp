#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grassroots/dynamics.hpp"
#include "grassroots/errors.hpp"
#include "grassroots/network.hpp"
#include "grassroots/rng.hpp"

namespace grassroots {

/// neutral:  probability matching (phi = 45), no bias.
/// unbiased: categorical decisions (phi > 45), no bias.
/// hubs / nearby / random: paired +-beta values handed out by degree rank,
/// by distance from the innovator, or uniformly at random.
enum class ScenarioKind { neutral, unbiased, hubs, nearby, random };

inline constexpr ScenarioKind kAllScenarios[] = {ScenarioKind::neutral, ScenarioKind::unbiased,
                                                 ScenarioKind::hubs, ScenarioKind::nearby,
                                                 ScenarioKind::random};

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::neutral: return "neutral";
    case ScenarioKind::unbiased: return "unbiased";
    case ScenarioKind::hubs: return "hubs";
    case ScenarioKind::nearby: return "nearby";
    case ScenarioKind::random: return "random";
  }
  return "?";
}

inline ScenarioKind scenario_from_string(std::string_view s) {
  for (auto k : kAllScenarios) {
    if (to_string(k) == s) return k;
  }
  throw DomainError("unknown scenario '" + std::string(s) + "'");
}

inline bool is_biased(ScenarioKind k) {
  return k == ScenarioKind::hubs || k == ScenarioKind::nearby || k == ScenarioKind::random;
}

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::nearby;
  double phi_deg = 60.0;
  double alpha = kDefaultAlpha;
  std::size_t n = 256;
  std::size_t attach_count = 2;
  std::size_t innovator_degree = 2;
  std::size_t max_iters = kDefaultMaxIters;
};

/// Throws ConfigError naming the offending field.
inline void validate(const ScenarioConfig& c) {
  if (!(c.phi_deg >= 45.0 && c.phi_deg <= 90.0)) {
    throw ConfigError("phi", "must lie in [45, 90], got " + std::to_string(c.phi_deg));
  }
  if (c.kind == ScenarioKind::neutral && c.phi_deg != 45.0) {
    throw ConfigError("phi", "neutral scenario requires phi = 45");
  }
  if (c.kind == ScenarioKind::unbiased && !(c.phi_deg > 45.0)) {
    throw ConfigError("phi", "unbiased scenario requires phi > 45");
  }
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha", "must lie in (0, 1]");
  if (c.attach_count < 1) throw ConfigError("attach", "must be >= 1");
  if (c.n < c.attach_count + 1) throw ConfigError("n", "must be >= attach + 1");
  if (c.n % 2 != 0) throw ConfigError("n", "must be even for paired bias sampling");
  if (c.innovator_degree < 1) throw ConfigError("degree", "must be >= 1");
  if (c.max_iters < 1) throw ConfigError("max_iters", "must be >= 1");
}

/// n/2 magnitudes from U[0, 0.5), each returned as the pair (-b, +b), so the
/// values sum to exactly zero.
inline std::vector<double> sample_neutral_biases(std::size_t n, Rng& rng) {
  if (n % 2 != 0) throw DomainError("bias sampling needs an even node count, got " + std::to_string(n));
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double b = uniform_real(rng, 0.0, 0.5);
    values.push_back(-b);
    values.push_back(b);
  }
  return values;
}

namespace detail {

// Nodes ranked by key ascending; ties land in uniformly random order.
template <typename Key>
std::vector<NodeId> rank_nodes(std::size_t n, Rng& rng, Key key) {
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  shuffle(std::span(order), rng);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return key(a) < key(b); });
  return order;
}

}  // namespace detail

/// Hands the sorted values (most innovation-favoring first) to nodes ranked
/// by the scenario rule. The innovator takes part like any other node.
/// Neutral and unbiased kinds get all zeros.
inline std::vector<double> allocate_biases(std::span<const double> values, const Network& net,
                                           NodeId innovator, ScenarioKind kind, Rng& rng) {
  const std::size_t n = net.size();
  if (values.size() != n) {
    throw DomainError("bias count " + std::to_string(values.size()) + " != node count " +
                      std::to_string(n));
  }
  if (n % 2 != 0) throw DomainError("bias allocation needs an even node count");
  if (!is_biased(kind)) return std::vector<double>(n, 0.0);

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<NodeId> order;
  switch (kind) {
    case ScenarioKind::hubs:
      order = detail::rank_nodes(n, rng, [&](NodeId i) { return -static_cast<long>(net.degree(i)); });
      break;
    case ScenarioKind::nearby: {
      const auto dist = bfs_distances(net, innovator);
      order = detail::rank_nodes(n, rng, [&](NodeId i) { return dist[i]; });
      break;
    }
    default:
      order.resize(n);
      std::iota(order.begin(), order.end(), NodeId{0});
      shuffle(std::span(order), rng);
      break;
  }

  std::vector<double> beta(n);
  for (std::size_t r = 0; r < n; ++r) beta[order[r]] = sorted[r];
  return beta;
}

/// Samples and allocates the biases a fresh run of this scenario uses.
inline std::vector<double> assign_biases(ScenarioKind kind, const Network& net, NodeId innovator,
                                         Rng& rng) {
  if (!is_biased(kind)) return std::vector<double>(net.size(), 0.0);
  const auto values = sample_neutral_biases(net.size(), rng);
  return allocate_biases(values, net, innovator, kind, rng);
}

}  // namespace grassroots
