#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adaptsplit/cost.hpp"

namespace adaptsplit {

enum class SolveMethod { Exact, DpHeuristic, MigrateOnly };

const char* to_string(SolveMethod m);

/// Parameters of partition `partition` (in the new scheme) that must be
/// copied from node `from` to node `to`.
struct Move {
  std::size_t partition = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  double bytes = 0.0;

  bool operator==(const Move&) const = default;
};

struct Solution {
  SplitScheme scheme;
  Placement placement;
  CostBreakdown cost;
  SolveMethod method = SolveMethod::Exact;
  std::uint64_t evaluated_count = 0;
  std::vector<Move> moves;  // filled by migrate_only

  double migration_bytes() const;
};

struct SolverConfig {
  std::size_t max_k = 3;
  /// Exhaustive search runs only when the candidate count fits this budget.
  std::uint64_t enumeration_budget = 100000;
  /// Cap on best-first expansions in the chain search.
  std::uint64_t search_limit = 200000;
};

/// Number of placements of k partitions over n nodes (n^k), saturating.
std::uint64_t placement_count(std::size_t nodes, std::size_t k);
/// Sum over schemes with 1..max_k partitions of nodes^k, saturating.
std::uint64_t joint_candidate_count(std::size_t blocks, std::size_t nodes, std::size_t max_k);

/// Minimum-cost placement for a fixed scheme by exhaustive enumeration.
/// Ties go to the lexicographically smallest node vector.
/// Throws BudgetExceeded or Infeasible.
Solution solve_placement(const CostModel& model, const SplitScheme& scheme, const CostWeights& weights,
                         const SolverConfig& config);

/// Minimum over schemes with up to config.max_k partitions and all their
/// placements. Falls back to dp_chain_solver when the candidate count exceeds
/// the budget. Throws Infeasible.
Solution solve_joint(const CostModel& model, const CostWeights& weights, const SolverConfig& config);

/// Best-first search over a layered chain graph (block boundary x hosting
/// node) with an additive surrogate objective: latency and privacy terms are
/// exact, utilization is charged per segment as beta * work * rate / speed.
/// Memory and privacy constraints are enforced along each path. When `fixed`
/// is given, only its cut points are used. Throws Infeasible.
Solution dp_chain_solver(const CostModel& model, const CostWeights& weights, const SolverConfig& config,
                         const SplitScheme* fixed = nullptr);

/// Best placement for the current scheme; keeps `current` unless another
/// placement is strictly cheaper. Reports moved partitions and their bytes.
Solution migrate_only(const CostModel& model, const SplitScheme& scheme, const Placement& current,
                      const CostWeights& weights, const SolverConfig& config);

/// Parameter transfers needed to go from one deployment to another, at block
/// granularity, grouped per (new partition, source node).
std::vector<Move> compute_moves(const ModelSpec& model, const SplitScheme& old_scheme, const Placement& old_placement,
                                const SplitScheme& new_scheme, const Placement& new_placement);

}  // namespace adaptsplit
