#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "adaptsplit/cost.hpp"
#include "adaptsplit/solver.hpp"
#include "adaptsplit/topology.hpp"

namespace adaptsplit {

/// Trigger thresholds and loop timing. Defaults are the standard operating
/// point: 150 ms EWMA latency, 0.85 utilization, 50 Mbps, 30 s cool-down.
struct Thresholds {
  double l_max_ms = 150.0;
  double u_max = 0.85;
  double b_min_mbps = 50.0;
  double t_cool_s = 30.0;
  double delta_t_s = 1.0;
  double ewma_lambda = 0.2;

  std::vector<std::string> validate() const;
};

struct EwmaState {
  double current = 0.0;
  bool initialized = false;
};

/// First sample initializes; afterwards lambda * sample + (1 - lambda) * current.
EwmaState update_ewma(EwmaState state, double sample_ms, double lambda);

struct TriggerReport {
  bool latency = false;
  bool utilization = false;
  bool bandwidth = false;
  bool privacy = false;

  bool any() const { return latency || utilization || bandwidth || privacy; }
  std::string describe() const;
};

/// Fires on: EWMA latency > l_max, max node utilization > u_max, min active
/// link bandwidth < b_min, or a pending privacy violation.
TriggerReport should_reconfigure(const EnvState& env, const EwmaState& ewma, const Thresholds& thresholds,
                                 bool pending_privacy_violation);

enum class Mode { Adaptive, Static };

struct OrchestratorState {
  SplitScheme scheme;
  Placement placement;
  double t_last = -std::numeric_limits<double>::infinity();
  Mode mode = Mode::Adaptive;
};

enum class PlanKind { Keep, Migrate, Resplit };

const char* to_string(PlanKind k);

struct ReconfigPlan {
  PlanKind kind = PlanKind::Keep;
  SplitScheme scheme;
  Placement placement;
  std::vector<Move> moves;
  TriggerReport triggers;
  /// Audit trail, e.g. {"migrate_rejected:latency", "resplit"} or {"cooldown"}.
  std::vector<std::string> reasons;
  CostBreakdown projected;
  double current_total = 0.0;
  /// Estimated time to copy moved parameters, including control overhead.
  double migration_seconds = 0.0;

  double moved_bytes() const;
};

struct OrchestratorPolicy {
  /// Minimum relative improvement of projected cost before a change is applied.
  double hysteresis = 0.05;
  /// Charge the benefit lost while the old mapping keeps serving during the
  /// parameter copy, amortized over the cool-down window.
  bool migration_amortization = true;
  double migration_overhead_s = 0.05;  // per moved partition
};

/// Estimated parameter copy time: sum of bytes over the bottleneck bandwidth of
/// each move's route, plus a fixed overhead per moved partition (at least
/// one). Throws NoRoute.
double estimate_migration_seconds(const std::vector<Move>& moves, const Topology& topology,
                                  const CapacitySnapshot& snapshot, double overhead_per_partition_s);

/// One decision after a trigger fired: cool-down check, then placement
/// migration, then split revision when migration cannot meet the fired
/// constraints. Throws Infeasible when no valid configuration exists.
ReconfigPlan decide(const OrchestratorState& state, const CostModel& model, const CostWeights& weights,
                    const SolverConfig& solver, const Thresholds& thresholds, const OrchestratorPolicy& policy,
                    const TriggerReport& triggers, double now);

/// Requires plan.kind != Keep.
OrchestratorState apply_reconfiguration(OrchestratorState state, const ReconfigPlan& plan, double now);

/// A frozen deployment. Throws Infeasible when the placement violates
/// constraints at the given planning snapshot.
OrchestratorState static_baseline(const CostModel& model, SplitScheme scheme, Placement placement);

}  // namespace adaptsplit
