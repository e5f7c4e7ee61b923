#include "adaptsplit/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <set>

#include "adaptsplit/errors.hpp"

namespace adaptsplit {

std::vector<std::string> Thresholds::validate() const {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0)) out.push_back(fmt::format("{} must be positive", name));
  };
  positive(l_max_ms, "l_max_ms");
  positive(u_max, "u_max");
  positive(b_min_mbps, "b_min_mbps");
  positive(t_cool_s, "t_cool_s");
  positive(delta_t_s, "delta_t_s");
  if (!std::isfinite(delta_t_s)) out.push_back("delta_t_s must be finite");
  if (!(ewma_lambda > 0.0 && ewma_lambda <= 1.0)) out.push_back("ewma_lambda must be in (0, 1]");
  return out;
}

EwmaState update_ewma(EwmaState state, double sample_ms, double lambda) {
  if (!(sample_ms >= 0.0)) throw PreconditionError("latency sample must be non-negative");
  if (!state.initialized) return {sample_ms, true};
  state.current = lambda * sample_ms + (1.0 - lambda) * state.current;
  return state;
}

std::string TriggerReport::describe() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(latency, "latency");
  add(utilization, "utilization");
  add(bandwidth, "bandwidth");
  add(privacy, "privacy");
  return out.empty() ? "none" : out;
}

TriggerReport should_reconfigure(const EnvState& env, const EwmaState& ewma, const Thresholds& thresholds,
                                 bool pending_privacy_violation) {
  TriggerReport r;
  r.latency = ewma.initialized && ewma.current > thresholds.l_max_ms;
  for (double u : env.node_util) r.utilization = r.utilization || u > thresholds.u_max;
  for (std::size_t l : env.active_links)
    r.bandwidth = r.bandwidth || env.capacity.links.at(l).bandwidth_mbps < thresholds.b_min_mbps;
  r.privacy = pending_privacy_violation;
  return r;
}

const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::Keep:
      return "keep";
    case PlanKind::Migrate:
      return "migrate";
    case PlanKind::Resplit:
      return "resplit";
  }
  return "unknown";
}

double ReconfigPlan::moved_bytes() const {
  double total = 0.0;
  for (const Move& m : moves) total += m.bytes;
  return total;
}

double estimate_migration_seconds(const std::vector<Move>& moves, const Topology& topology,
                                  const CapacitySnapshot& snapshot, double overhead_per_partition_s) {
  double seconds = 0.0;
  std::set<std::size_t> partitions;
  for (const Move& m : moves) {
    double bottleneck = std::numeric_limits<double>::infinity();
    for (std::size_t l : topology.path(m.from, m.to))
      bottleneck = std::min(bottleneck, snapshot.links.at(l).bandwidth_mbps);
    if (std::isfinite(bottleneck)) seconds += (m.bytes * 8.0) / (bottleneck * 1e6);
    partitions.insert(m.partition);
  }
  // Even a move-free resplit pays one round of control traffic.
  const std::size_t rounds = std::max<std::size_t>(1, partitions.size());
  return seconds + overhead_per_partition_s * static_cast<double>(rounds);
}

namespace {

// Fired-trigger constraints the candidate still violates, empty when all hold.
std::vector<std::string> unmet_constraints(const CostModel& model, const SplitScheme& scheme,
                                           const Placement& placement, const CostBreakdown& projected,
                                           const TriggerReport& triggers, const Thresholds& thresholds) {
  std::vector<std::string> unmet;
  if (!std::isfinite(projected.total)) {
    unmet.push_back("infeasible");
    return unmet;
  }
  if (triggers.latency && !(projected.latency_s * 1000.0 <= thresholds.l_max_ms)) unmet.push_back("latency");
  if (triggers.utilization && !(projected.util <= thresholds.u_max)) unmet.push_back("utilization");
  if (triggers.bandwidth) {
    const auto& snap = model.context().snapshot;
    for (std::size_t l : active_links(model.topology(), scheme, placement))
      if (snap.links[l].bandwidth_mbps < thresholds.b_min_mbps) {
        unmet.push_back("bandwidth");
        break;
      }
  }
  if (triggers.privacy && exposes_private_data(model.model(), model.topology(), scheme, placement))
    unmet.push_back("privacy");
  return unmet;
}

bool accept_change(double current, double projected, double migration_s, const Thresholds& thresholds,
                   const OrchestratorPolicy& policy) {
  if (!std::isfinite(projected)) return false;
  if (!std::isfinite(current)) return true;
  double effective = projected;
  if (policy.migration_amortization) {
    const double share = std::min(1.0, migration_s / thresholds.t_cool_s);
    effective = projected + (current - projected) * share;
  }
  return effective <= (1.0 - policy.hysteresis) * current;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ',';
    out += p;
  }
  return out;
}

}  // namespace

ReconfigPlan decide(const OrchestratorState& state, const CostModel& model, const CostWeights& weights,
                    const SolverConfig& solver, const Thresholds& thresholds, const OrchestratorPolicy& policy,
                    const TriggerReport& triggers, double now) {
  ReconfigPlan plan;
  plan.kind = PlanKind::Keep;
  plan.scheme = state.scheme;
  plan.placement = state.placement;
  plan.triggers = triggers;
  const CostBreakdown current = model.evaluate(state.scheme, state.placement, weights).cost;
  plan.current_total = current.total;
  plan.projected = current;
  if (state.mode == Mode::Static) {
    plan.reasons.push_back("static");
    return plan;
  }
  if (now - state.t_last < thresholds.t_cool_s) {
    plan.reasons.push_back("cooldown");
    return plan;
  }

  const auto& snap = model.context().snapshot;
  auto consider = [&](const SplitScheme& scheme, const Placement& placement, const CostBreakdown& projected,
                      PlanKind kind) {
    if (scheme == state.scheme && placement == state.placement) {
      plan.reasons.push_back("no_change");
      return false;
    }
    auto moves = compute_moves(model.model(), state.scheme, state.placement, scheme, placement);
    const double seconds =
        estimate_migration_seconds(moves, model.topology(), snap, policy.migration_overhead_s);
    if (!accept_change(current.total, projected.total, seconds, thresholds, policy)) {
      plan.reasons.push_back("insufficient_gain");
      return false;
    }
    plan.kind = kind;
    plan.scheme = scheme;
    plan.placement = placement;
    plan.moves = std::move(moves);
    plan.projected = projected;
    plan.migration_seconds = seconds;
    plan.reasons.push_back(to_string(kind));
    return true;
  };

  std::vector<std::string> unmet;
  try {
    const Solution mig = migrate_only(model, state.scheme, state.placement, weights, solver);
    unmet = unmet_constraints(model, mig.scheme, mig.placement, mig.cost, triggers, thresholds);
    if (unmet.empty()) {
      consider(mig.scheme, mig.placement, mig.cost, PlanKind::Migrate);
      return plan;
    }
  } catch (const Infeasible&) {
    unmet = {"infeasible"};
  }
  plan.reasons.push_back("migrate_rejected:" + join(unmet));

  const Solution joint = solve_joint(model, weights, solver);
  consider(joint.scheme, joint.placement, joint.cost,
           joint.scheme == state.scheme ? PlanKind::Migrate : PlanKind::Resplit);
  return plan;
}

OrchestratorState apply_reconfiguration(OrchestratorState state, const ReconfigPlan& plan, double now) {
  if (plan.kind == PlanKind::Keep) throw PreconditionError("cannot apply a keep plan");
  if (state.mode == Mode::Static) throw PreconditionError("static deployments are never reconfigured");
  if (plan.placement.size() != plan.scheme.partition_count())
    throw PreconditionError("plan placement does not cover its scheme");
  state.scheme = plan.scheme;
  state.placement = plan.placement;
  state.t_last = now;
  return state;
}

OrchestratorState static_baseline(const CostModel& model, SplitScheme scheme, Placement placement) {
  const FeasibilityReport report = model.check_feasible(scheme, placement);
  if (!report.feasible()) {
    std::vector<std::string> details;
    for (const auto& v : report.violations) details.push_back(v.detail);
    throw Infeasible("initial deployment: " + join(details));
  }
  if (!model.evaluate(scheme, placement, CostWeights{}).routable)
    throw Infeasible("initial deployment routes between unconnected nodes");
  OrchestratorState state;
  state.scheme = std::move(scheme);
  state.placement = std::move(placement);
  state.mode = Mode::Static;
  return state;
}

}  // namespace adaptsplit
