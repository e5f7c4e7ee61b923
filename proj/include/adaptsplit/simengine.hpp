#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "adaptsplit/cost.hpp"
#include "adaptsplit/metrics.hpp"
#include "adaptsplit/orchestrator.hpp"
#include "adaptsplit/workload.hpp"

namespace adaptsplit {

/// Equal-time events are processed in this order, then by insertion sequence.
enum class EventKind {
  TraceBreakpoint,
  MigrationDone,
  ComputeDone,
  LinkIdle,
  TransferDone,
  Timeout,
  Arrival,
  MonitorTick,
};

const char* to_string(EventKind k);

struct SimConfig {
  std::uint64_t seed = 1;
  double horizon_s = 600.0;
  /// A request still running after timeout_multiplier * SLA budget is aborted
  /// and counted as a downtime incident.
  double timeout_multiplier = 5.0;
  double migration_overhead_ms = 50.0;
  double monitor_overhead_ms = 0.0;
  bool record_event_log = false;
};

struct LogRecord {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  std::int64_t request_id = -1;
  std::int64_t node = -1;  // node index, or link index for transfers
  std::string detail;
  double start = 0.0;       // compute/transfer start
  bool critical = false;    // compute of a privacy-critical partition
  bool trusted = true;      // compute node trust
};

/// One step of a request's pipeline.
struct Stage {
  enum class Kind { Compute, Transfer };
  Kind kind = Kind::Compute;
  std::size_t partition = 0;
  std::size_t node = 0;              // compute node
  double work_gflop = 0.0;           // compute
  bool critical = false;             // compute
  std::vector<std::size_t> links;    // transfer route, in order
  std::vector<std::size_t> hops;     // transfer: node reached after each link
  double bytes = 0.0;                // transfer
  bool is_return = false;
};

/// Compute per partition in order, a transfer for each crossing between
/// different nodes, and a return transfer to the first partition's node when
/// the last partition ran elsewhere. Throws NoRoute.
std::vector<Stage> schedule_request_pipeline(const ModelSpec& model, const Topology& topology,
                                             const SplitScheme& scheme, const Placement& placement);

struct ReconfigRecord {
  double time = 0.0;
  PlanKind kind = PlanKind::Keep;
  std::string reasons;
  double moved_bytes = 0.0;
  double completes_at = 0.0;
};

struct SimInputs {
  const ModelSpec* model = nullptr;
  const Topology* topology = nullptr;
  WorkloadSpec workload;
  CostWeights weights;
  PrivacyMode privacy_mode = PrivacyMode::Hard;
  SolverConfig solver;
  Thresholds thresholds;
  OrchestratorPolicy policy;
  OrchestratorState initial;
  SimConfig sim;
  std::string run_id;
  /// Explicit request list; when empty, requests come from `workload`.
  std::vector<RequestSpec> requests;
};

struct SimResult {
  MetricsReport report;
  std::vector<LogRecord> log;  // populated when sim.record_event_log
  std::vector<ReconfigRecord> reconfigs;
  std::vector<BusyInterval> busy;
};

/// Completion time of a parameter copy started at `now`. Throws NoRoute.
double execute_migration(const ReconfigPlan& plan, const Topology& topology, double now, double overhead_per_partition_s);

/// Discrete-event run to the horizon. Throws ConfigError when the initial
/// deployment is infeasible at t = 0.
SimResult run_scenario(const SimInputs& inputs);

/// One event-log line: {"time":..,"kind":..,"request_id":..,"node_id":..,"detail":..}.
std::string to_json_line(const LogRecord& record, const Topology& topology);

}  // namespace adaptsplit
