#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "adaptsplit/trace.hpp"

namespace adaptsplit {

enum class NodeKind { Edge, Cloud };

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::Edge;
  double speed_gflops = 1.0;
  /// Unset means unconstrained (a cloud with elastic memory).
  std::optional<double> mem_bytes;
  bool trusted = false;
  Trace bg_util;
};

struct LinkSpec {
  std::string a;
  std::string b;
  Trace bandwidth_mbps;
  Trace latency_ms;  // one-way propagation
};

/// Nodes, undirected links and static routing: the direct link when one
/// exists, otherwise a two-hop route through the hub node.
class Topology {
 public:
  Topology() = default;
  /// Throws ConfigError on duplicate node ids, unknown link endpoints,
  /// self-links, parallel links or an unknown hub.
  Topology(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links,
           std::optional<std::string> hub = std::nullopt);

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<LinkSpec>& links() const { return links_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }
  const NodeSpec& node(std::size_t i) const { return nodes_.at(i); }
  const LinkSpec& link(std::size_t l) const { return links_.at(l); }
  std::optional<std::size_t> hub() const { return hub_; }

  std::optional<std::size_t> node_index(const std::string& id) const;
  std::size_t require_node(const std::string& id) const;
  std::optional<std::size_t> find_link(std::size_t a, std::size_t b) const;

  /// Link indices from a to b in traversal order. Empty when a == b.
  /// Throws NoRoute when neither a direct link nor a hub route exists.
  std::vector<std::size_t> path(std::size_t a, std::size_t b) const;
  bool reachable(std::size_t a, std::size_t b) const;

  /// Value-range violations (speeds, memory, trace ranges), naming the
  /// offending node or link.
  std::vector<std::string> validate() const;

 private:
  static std::size_t pair_key(std::size_t a, std::size_t b, std::size_t n);

  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  std::optional<std::size_t> hub_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::optional<std::size_t>> adjacency_;  // n*n, symmetric
};

/// speed * (1 - background utilization at t); always > 0 for valid nodes.
double effective_speed(const NodeSpec& node, double t);

/// Serialization plus propagation delay for one hop.
inline double transfer_seconds(double bytes, double bandwidth_mbps, double latency_ms) {
  return (bytes * 8.0) / (bandwidth_mbps * 1e6) + latency_ms / 1000.0;
}

inline double serialization_seconds(double bytes, double bandwidth_mbps) {
  return (bytes * 8.0) / (bandwidth_mbps * 1e6);
}

struct NodeState {
  double util = 0.0;  // background utilization
  double mem_free_bytes = 0.0;  // +inf when unconstrained
  double speed_gflops = 0.0;
  double effective_speed_gflops = 0.0;

  bool operator==(const NodeState&) const = default;
};

struct LinkState {
  double bandwidth_mbps = 0.0;
  double latency_ms = 0.0;

  bool operator==(const LinkState&) const = default;
};

/// Every node and link sampled from its traces at time t.
struct CapacitySnapshot {
  double t = 0.0;
  std::vector<NodeState> nodes;
  std::vector<LinkState> links;

  bool operator==(const CapacitySnapshot&) const = default;
};

CapacitySnapshot snapshot(const Topology& topology, double t);

/// What the orchestrator sees at a monitoring tick.
struct EnvState {
  double t = 0.0;
  CapacitySnapshot capacity;
  /// Background plus foreground busy fraction over the last window, in [0, 1].
  std::vector<double> node_util;
  std::vector<std::size_t> queue_depths;
  std::size_t in_flight = 0;
  double ewma_latency_ms = 0.0;
  /// Links on the current deployment's request path.
  std::vector<std::size_t> active_links;
};

}  // namespace adaptsplit
