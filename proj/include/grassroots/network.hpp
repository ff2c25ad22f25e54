#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grassroots/errors.hpp"
#include "grassroots/rng.hpp"

namespace grassroots {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable undirected simple graph in compressed adjacency form.
/// Neighbor lists are sorted ascending.
class Network {
 public:
  Network() = default;

  /// Builds from an edge list. Rejects self loops, parallel edges and ids >= n.
  static Network from_edges(std::size_t n, std::span<const Edge> edges) {
    std::vector<std::vector<NodeId>> adj(n);
    for (const auto& e : edges) {
      if (e.u >= n || e.v >= n) throw DomainError("edge endpoint out of range");
      if (e.u == e.v) throw DomainError("self loop at node " + std::to_string(e.u));
      adj[e.u].push_back(e.v);
      adj[e.v].push_back(e.u);
    }
    return Network(std::move(adj));
  }

  std::size_t size() const noexcept { return degree_.size(); }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

  std::size_t degree(NodeId i) const { return degree_.at(i); }
  std::span<const std::uint32_t> degrees() const noexcept { return degree_; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {neighbors_.data() + offset_.at(i), degree_.at(i)};
  }

  bool has_edge(NodeId u, NodeId v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Edges with u < v, ordered by (u, v).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < size(); ++u) {
      for (NodeId v : neighbors(u)) {
        if (u < v) out.push_back({u, v});
      }
    }
    return out;
  }

  double mean_degree() const noexcept {
    return size() == 0 ? 0.0 : 2.0 * static_cast<double>(edge_count()) / static_cast<double>(size());
  }

  std::size_t max_degree() const noexcept {
    return degree_.empty() ? 0 : *std::max_element(degree_.begin(), degree_.end());
  }

 private:
  explicit Network(std::vector<std::vector<NodeId>> adj) {
    const std::size_t n = adj.size();
    offset_.resize(n + 1, 0);
    degree_.resize(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& nb = adj[i];
      std::sort(nb.begin(), nb.end());
      if (std::adjacent_find(nb.begin(), nb.end()) != nb.end()) {
        throw DomainError("parallel edge at node " + std::to_string(i));
      }
      degree_[i] = static_cast<std::uint32_t>(nb.size());
      offset_[i + 1] = offset_[i] + nb.size();
    }
    neighbors_.reserve(offset_[n]);
    for (const auto& nb : adj) neighbors_.insert(neighbors_.end(), nb.begin(), nb.end());
  }

  std::vector<std::size_t> offset_;
  std::vector<std::uint32_t> degree_;
  std::vector<NodeId> neighbors_;
};

/// Barabasi-Albert growth. Seeds with a complete graph on attach_count + 1
/// nodes; every later node links to attach_count distinct existing nodes,
/// each drawn with probability proportional to its degree before the new
/// node arrived. Duplicate draws are redrawn.
inline Network generate_pa_network(std::size_t n, std::size_t attach_count, Rng& rng) {
  if (attach_count < 1) throw DomainError("attach_count must be >= 1");
  if (n < attach_count + 1) throw DomainError("n must be >= attach_count + 1");

  std::vector<Edge> edges;
  edges.reserve((attach_count + 1) * attach_count / 2 + (n - attach_count - 1) * attach_count);
  // Every edge contributes both endpoints, so a uniform pick from this list
  // is a degree-proportional pick of a node.
  std::vector<NodeId> endpoints;
  endpoints.reserve(2 * edges.capacity());

  const auto seed_size = static_cast<NodeId>(attach_count + 1);
  for (NodeId u = 0; u < seed_size; ++u) {
    for (NodeId v = u + 1; v < seed_size; ++v) {
      edges.push_back({u, v});
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }

  std::vector<NodeId> targets;
  targets.reserve(attach_count);
  for (auto node = seed_size; node < n; ++node) {
    targets.clear();
    const std::size_t pool = endpoints.size();
    while (targets.size() < attach_count) {
      const NodeId pick = endpoints[uniform_index(rng, pool)];
      if (std::find(targets.begin(), targets.end(), pick) == targets.end()) {
        targets.push_back(pick);
      }
    }
    for (NodeId t : targets) {
      edges.push_back({t, node});
      endpoints.push_back(t);
      endpoints.push_back(node);
    }
  }
  return Network::from_edges(n, edges);
}

inline constexpr int kUnreachable = -1;

/// Hop distances from source; kUnreachable for nodes in other components.
inline std::vector<int> bfs_distances(const Network& net, NodeId source) {
  if (source >= net.size()) throw DomainError("source node " + std::to_string(source) + " out of range");
  std::vector<int> dist(net.size(), kUnreachable);
  std::queue<NodeId> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : net.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

inline bool is_connected(const Network& net) {
  if (net.size() == 0) return true;
  const auto d = bfs_distances(net, 0);
  return std::none_of(d.begin(), d.end(), [](int x) { return x == kUnreachable; });
}

/// Uniform choice among nodes of exactly target_degree.
inline std::optional<NodeId> find_node_with_degree(const Network& net, std::size_t target_degree,
                                                   Rng& rng) {
  std::vector<NodeId> candidates;
  for (NodeId i = 0; i < net.size(); ++i) {
    if (net.degree(i) == target_degree) candidates.push_back(i);
  }
  if (candidates.empty()) return std::nullopt;
  return candidates[uniform_index(rng, candidates.size())];
}

}  // namespace grassroots
