#include "adaptsplit/topology.hpp"

#include <cmath>
#include <fmt/core.h>
#include <limits>

#include "adaptsplit/errors.hpp"

namespace adaptsplit {

Topology::Topology(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links, std::optional<std::string> hub)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) throw ConfigError(fmt::format("duplicate node id '{}'", nodes_[i].id));
  }
  adjacency_.assign(n * n, std::nullopt);
  for (std::size_t l = 0; l < links_.size(); ++l) {
    const auto a = node_index(links_[l].a);
    const auto b = node_index(links_[l].b);
    if (!a || !b)
      throw ConfigError(fmt::format("link {}-{} references an unknown node", links_[l].a, links_[l].b));
    if (*a == *b) throw ConfigError(fmt::format("link {}-{} is a self-link", links_[l].a, links_[l].b));
    if (adjacency_[pair_key(*a, *b, n)])
      throw ConfigError(fmt::format("more than one link between {} and {}", links_[l].a, links_[l].b));
    adjacency_[pair_key(*a, *b, n)] = l;
    adjacency_[pair_key(*b, *a, n)] = l;
  }
  if (hub) {
    hub_ = node_index(*hub);
    if (!hub_) throw ConfigError(fmt::format("hub '{}' is not a node", *hub));
  }
}

std::size_t Topology::pair_key(std::size_t a, std::size_t b, std::size_t n) { return a * n + b; }

std::optional<std::size_t> Topology::node_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Topology::require_node(const std::string& id) const {
  auto i = node_index(id);
  if (!i) throw ConfigError(fmt::format("unknown node '{}'", id));
  return *i;
}

std::optional<std::size_t> Topology::find_link(std::size_t a, std::size_t b) const {
  if (a >= nodes_.size() || b >= nodes_.size()) return std::nullopt;
  return adjacency_[pair_key(a, b, nodes_.size())];
}

std::vector<std::size_t> Topology::path(std::size_t a, std::size_t b) const {
  if (a >= nodes_.size() || b >= nodes_.size()) throw NoRoute("node index out of range");
  if (a == b) return {};
  if (auto l = find_link(a, b)) return {*l};
  if (hub_ && *hub_ != a && *hub_ != b) {
    auto first = find_link(a, *hub_);
    auto second = find_link(*hub_, b);
    if (first && second) return {*first, *second};
  }
  throw NoRoute(fmt::format("no route between {} and {}", nodes_[a].id, nodes_[b].id));
}

bool Topology::reachable(std::size_t a, std::size_t b) const {
  if (a >= nodes_.size() || b >= nodes_.size()) return false;
  if (a == b || find_link(a, b)) return true;
  return hub_ && *hub_ != a && *hub_ != b && find_link(a, *hub_) && find_link(*hub_, b);
}

std::vector<std::string> Topology::validate() const {
  std::vector<std::string> v;
  if (nodes_.empty()) v.push_back("topology has no nodes");
  for (const auto& n : nodes_) {
    if (!(n.speed_gflops > 0)) v.push_back(fmt::format("node {}: speed_gflops must be positive", n.id));
    if (n.mem_bytes && !(*n.mem_bytes > 0)) v.push_back(fmt::format("node {}: memory must be positive", n.id));
    for (const auto& msg : n.bg_util.check()) v.push_back(fmt::format("node {}: bg_util {}", n.id, msg));
    if (!(n.bg_util.min_value() >= 0) || !(n.bg_util.max_value() < 1))
      v.push_back(fmt::format("node {}: bg_util must stay in [0, 1)", n.id));
  }
  for (const auto& l : links_) {
    for (const auto& msg : l.bandwidth_mbps.check()) v.push_back(fmt::format("link {}-{}: bandwidth {}", l.a, l.b, msg));
    for (const auto& msg : l.latency_ms.check()) v.push_back(fmt::format("link {}-{}: latency {}", l.a, l.b, msg));
    if (!(l.bandwidth_mbps.min_value() > 0))
      v.push_back(fmt::format("link {}-{}: bandwidth must be positive", l.a, l.b));
    if (!(l.latency_ms.min_value() >= 0)) v.push_back(fmt::format("link {}-{}: latency must be non-negative", l.a, l.b));
  }
  return v;
}

double effective_speed(const NodeSpec& node, double t) { return node.speed_gflops * (1.0 - node.bg_util.sample(t)); }

CapacitySnapshot snapshot(const Topology& topology, double t) {
  CapacitySnapshot s;
  s.t = t;
  s.nodes.reserve(topology.node_count());
  for (const auto& n : topology.nodes()) {
    NodeState ns;
    ns.util = n.bg_util.sample(t);
    ns.mem_free_bytes = n.mem_bytes ? *n.mem_bytes : std::numeric_limits<double>::infinity();
    ns.speed_gflops = n.speed_gflops;
    ns.effective_speed_gflops = n.speed_gflops * (1.0 - ns.util);
    s.nodes.push_back(ns);
  }
  s.links.reserve(topology.link_count());
  for (const auto& l : topology.links()) s.links.push_back({l.bandwidth_mbps.sample(t), l.latency_ms.sample(t)});
  return s;
}

}  // namespace adaptsplit
