#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "adaptsplit/model_graph.hpp"
#include "adaptsplit/topology.hpp"

namespace adaptsplit {

/// Partition j (0-based) runs on node assignment[j].
struct Placement {
  std::vector<std::size_t> assignment;

  std::size_t size() const { return assignment.size(); }
  bool operator==(const Placement&) const = default;
};

struct CostWeights {
  double alpha = 1.0;  // latency, per second
  double beta = 0.0;   // utilization
  double gamma = 0.0;  // privacy
};

enum class PrivacyMode { Hard, Soft };

struct CostBreakdown {
  double latency_s = 0.0;
  double util = 0.0;
  double privacy = 0.0;
  double total = 0.0;
};

enum class ViolationKind { Assignment, Memory, Privacy };

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
};

/// Inputs that fix the planning environment for one decision.
struct PlanningContext {
  const ModelSpec* model = nullptr;
  const Topology* topology = nullptr;
  CapacitySnapshot snapshot;
  /// Expected arrival rate; projects per-request work into sustained utilization.
  double arrival_rate_rps = 0.0;
  PrivacyMode privacy_mode = PrivacyMode::Hard;
  /// Treat the partition holding block 0 as privacy-critical (a privacy=high
  /// request is pending).
  bool pin_input_trusted = false;
};

/// Planning cost over one snapshot, with all per-range and per-route tables
/// precomputed so the solvers can evaluate many candidates cheaply.
///
/// Latency is the uncongested pipeline estimate: consecutive partitions on the
/// same node form one run, each run costs (run work / effective speed), each
/// node change costs the boundary activation's transfer along the route, and
/// the final output returns to the first partition's node. Utilization is the
/// largest projected utilization among hosting nodes. Privacy sums each
/// partition's max sensitivity over partitions on untrusted nodes.
class CostModel {
 public:
  explicit CostModel(PlanningContext ctx);

  struct Scratch {
    std::vector<double> load;
    std::vector<double> mem;
    std::vector<double> util;
    std::vector<char> hosted;
  };

  struct Evaluation {
    CostBreakdown cost;
    bool feasible = false;
    bool routable = false;
  };

  /// Never throws for unroutable or infeasible candidates; their total is +inf.
  Evaluation evaluate(const SplitScheme& scheme, const Placement& placement, const CostWeights& w,
                      Scratch& scratch) const;
  Evaluation evaluate(const SplitScheme& scheme, const Placement& placement, const CostWeights& w) const;

  /// Seconds; throws NoRoute.
  double latency(const SplitScheme& scheme, const Placement& placement) const;
  double utilization(const SplitScheme& scheme, const Placement& placement) const;
  double privacy(const SplitScheme& scheme, const Placement& placement) const;
  /// Infeasible placements map to total = +inf. Throws NoRoute.
  CostBreakdown total(const SplitScheme& scheme, const Placement& placement, const CostWeights& w) const;
  FeasibilityReport check_feasible(const SplitScheme& scheme, const Placement& placement) const;

  const PlanningContext& context() const { return ctx_; }
  const ModelSpec& model() const { return *ctx_.model; }
  const Topology& topology() const { return *ctx_.topology; }
  std::size_t node_count() const { return nodes_; }
  std::size_t block_count() const { return blocks_; }

  // Range tables over blocks [a, b), 0 <= a < b <= block_count().
  double range_work(std::size_t a, std::size_t b) const { return work_[range_index(a, b)]; }
  double range_params(std::size_t a, std::size_t b) const { return params_[range_index(a, b)]; }
  double range_max_sensitivity(std::size_t a, std::size_t b) const { return sens_[range_index(a, b)]; }
  bool range_critical(std::size_t a, std::size_t b) const { return critical_[range_index(a, b)] != 0; }
  double compute_seconds(std::size_t a, std::size_t b, std::size_t node) const {
    return compute_[range_index(a, b) * nodes_ + node];
  }
  /// Transfer of the activation crossing boundary b (output of block b-1),
  /// 1 <= b < block_count(). +inf when unroutable, 0 when from == to.
  double boundary_transfer(std::size_t b, std::size_t from, std::size_t to) const {
    return transfer_[((b - 1) * nodes_ + from) * nodes_ + to];
  }
  double return_transfer(std::size_t from, std::size_t to) const { return return_[from * nodes_ + to]; }

  bool trusted(std::size_t node) const { return trusted_[node] != 0; }
  double mem_free(std::size_t node) const { return ctx_.snapshot.nodes[node].mem_free_bytes; }
  double bg_util(std::size_t node) const { return bg_[node]; }
  double effective_speed(std::size_t node) const { return eff_[node]; }
  double arrival_rate() const { return ctx_.arrival_rate_rps; }

  /// Whether blocks [a, b) may run on node under the hard privacy rules.
  bool privacy_allows(std::size_t a, std::size_t b, std::size_t node) const;

 private:
  std::size_t range_index(std::size_t a, std::size_t b) const { return a * (blocks_ + 1) + b; }

  PlanningContext ctx_;
  std::size_t nodes_ = 0;
  std::size_t blocks_ = 0;
  std::vector<double> work_, params_, sens_;
  std::vector<char> critical_;
  std::vector<double> compute_;
  std::vector<double> transfer_;
  std::vector<double> return_;
  std::vector<double> eff_, bg_;
  std::vector<char> trusted_;
};

// Free-function forms over a planning context.
double latency_term(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement);
double utilization_term(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement);
double privacy_term(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement);
CostBreakdown total_cost(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement,
                         const CostWeights& weights);
FeasibilityReport check_feasible(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement);

/// Links carrying request traffic for a deployment: the routes between
/// consecutive partitions and the return route. Sorted, unique.
std::vector<std::size_t> active_links(const Topology& topology, const SplitScheme& scheme,
                                      const Placement& placement);

/// True when partition 0 (raw input) or any privacy-critical partition sits
/// on an untrusted node.
bool exposes_private_data(const ModelSpec& model, const Topology& topology, const SplitScheme& scheme,
                          const Placement& placement);

}  // namespace adaptsplit
