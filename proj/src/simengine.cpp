#include "adaptsplit/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fmt/core.h>
#include <json.hpp>
#include <queue>

#include "adaptsplit/errors.hpp"

namespace adaptsplit {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::TraceBreakpoint:
      return "trace_breakpoint";
    case EventKind::MigrationDone:
      return "migration_done";
    case EventKind::ComputeDone:
      return "compute_done";
    case EventKind::LinkIdle:
      return "link_idle";
    case EventKind::TransferDone:
      return "transfer_done";
    case EventKind::Timeout:
      return "timeout";
    case EventKind::Arrival:
      return "arrival";
    case EventKind::MonitorTick:
      return "monitor_tick";
  }
  return "unknown";
}

std::vector<Stage> schedule_request_pipeline(const ModelSpec& model, const Topology& topology,
                                             const SplitScheme& scheme, const Placement& placement) {
  if (scheme.num_blocks() != model.size()) throw PreconditionError("scheme does not match model");
  if (placement.size() != scheme.partition_count()) throw PreconditionError("placement does not cover the scheme");
  for (std::size_t n : placement.assignment)
    if (n >= topology.node_count()) throw PreconditionError("placement names an unknown node");

  auto transfer = [&](std::size_t from, std::size_t to, double bytes, std::size_t partition, bool is_return) {
    Stage s;
    s.kind = Stage::Kind::Transfer;
    s.partition = partition;
    s.node = to;
    s.bytes = bytes;
    s.is_return = is_return;
    s.links = topology.path(from, to);
    std::size_t at = from;
    for (std::size_t l : s.links) {
      const LinkSpec& link = topology.link(l);
      const std::size_t a = topology.require_node(link.a);
      at = a == at ? topology.require_node(link.b) : a;
      s.hops.push_back(at);
    }
    return s;
  };

  std::vector<Stage> stages;
  const auto& a = placement.assignment;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const BlockRange r = scheme.partition(j);
    if (j > 0 && a[j] != a[j - 1])
      stages.push_back(transfer(a[j - 1], a[j], model.blocks[r.begin - 1].activation_out_bytes, j, false));
    Stage c;
    c.kind = Stage::Kind::Compute;
    c.partition = j;
    c.node = a[j];
    for (std::size_t b = r.begin; b < r.end; ++b) {
      c.work_gflop += model.blocks[b].work_gflop;
      c.critical = c.critical || model.blocks[b].privacy_critical;
    }
    stages.push_back(c);
  }
  if (a.back() != a.front()) stages.push_back(transfer(a.back(), a.front(), model.final_output_bytes(), a.size() - 1, true));
  return stages;
}

double execute_migration(const ReconfigPlan& plan, const Topology& topology, double now,
                         double overhead_per_partition_s) {
  if (plan.kind == PlanKind::Keep) throw PreconditionError("cannot execute a keep plan");
  return now + estimate_migration_seconds(plan.moves, topology, snapshot(topology, now), overhead_per_partition_s);
}

namespace {

struct Event {
  double time;
  EventKind kind;
  std::uint64_t seq;
  std::size_t payload;

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    return seq > o.seq;
  }
};

struct Deployment {
  SplitScheme scheme;
  Placement placement;
  std::vector<Stage> stages;
  bool exposes = false;
  std::vector<std::size_t> links;
};

struct RequestState {
  RequestSpec spec;
  std::size_t deployment = 0;
  std::size_t stage = 0;
  std::size_t hop = 0;
  bool arrived = false;
  bool done = false;
  bool aborted = false;
};

struct NodeServer {
  std::deque<std::size_t> queue;  // request indices
  bool busy = false;
  std::size_t current = 0;
  double started = 0.0;
  double window_busy = 0.0;
};

struct LinkServer {
  std::deque<std::size_t> queue;
  bool busy = false;
};

class Simulation {
 public:
  explicit Simulation(const SimInputs& in) : in_(in), model_(*in.model), topo_(*in.topology) {}

  SimResult run();

 private:
  void push(double t, EventKind kind, std::size_t payload) { events_.push({t, kind, seq_++, payload}); }
  void log(double t, EventKind kind, std::int64_t request, std::int64_t node, std::string detail,
           double start = 0.0, bool critical = false, bool trusted = true) {
    if (!in_.sim.record_event_log) return;
    result_.log.push_back({t, kind, request, node, std::move(detail), start, critical, trusted});
  }

  std::size_t add_deployment(const SplitScheme& scheme, const Placement& placement);
  void start_stage(std::size_t r, double t);
  void try_start_node(std::size_t n, double t);
  void try_start_link(std::size_t l, double t);
  void advance(std::size_t r, double t);
  void record_sample(double ms) {
    result_.report.latency_samples_ms.push_back(ms);
    window_sum_ += ms;
    ++window_count_;
  }
  void on_tick(double t);

  const SimInputs& in_;
  const ModelSpec& model_;
  const Topology& topo_;
  SimResult result_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;

  std::vector<Deployment> deployments_;
  std::size_t active_ = 0;
  std::size_t pending_deployment_ = 0;
  bool migrating_ = false;
  OrchestratorState state_;
  EwmaState ewma_;
  bool pending_privacy_ = false;

  std::vector<RequestState> requests_;
  std::vector<NodeServer> nodes_;
  std::vector<LinkServer> links_;
  std::size_t in_flight_ = 0;
  double window_start_ = 0.0;
  double window_sum_ = 0.0;
  std::size_t window_count_ = 0;
  std::vector<double> bg_sum_;
  std::size_t bg_samples_ = 0;
};

std::size_t Simulation::add_deployment(const SplitScheme& scheme, const Placement& placement) {
  Deployment d;
  d.scheme = scheme;
  d.placement = placement;
  d.stages = schedule_request_pipeline(model_, topo_, scheme, placement);
  d.exposes = exposes_private_data(model_, topo_, scheme, placement);
  d.links = active_links(topo_, scheme, placement);
  deployments_.push_back(std::move(d));
  return deployments_.size() - 1;
}

void Simulation::start_stage(std::size_t r, double t) {
  RequestState& rq = requests_[r];
  const Stage& s = deployments_[rq.deployment].stages[rq.stage];
  if (s.kind == Stage::Kind::Compute) {
    nodes_[s.node].queue.push_back(r);
    try_start_node(s.node, t);
  } else {
    rq.hop = 0;
    links_[s.links[0]].queue.push_back(r);
    try_start_link(s.links[0], t);
  }
}

void Simulation::try_start_node(std::size_t n, double t) {
  NodeServer& srv = nodes_[n];
  if (srv.busy) return;
  while (!srv.queue.empty() && requests_[srv.queue.front()].aborted) srv.queue.pop_front();
  if (srv.queue.empty()) return;
  const std::size_t r = srv.queue.front();
  srv.queue.pop_front();
  const RequestState& rq = requests_[r];
  const Stage& s = deployments_[rq.deployment].stages[rq.stage];
  const NodeSpec& node = topo_.node(n);
  const double duration = s.work_gflop * rq.spec.work_multiplier / effective_speed(node, t);
  srv.busy = true;
  srv.current = r;
  srv.started = t;
  const double end = t + duration;
  result_.busy.push_back({n, t, end});
  if (s.critical && !node.trusted) ++result_.report.privacy_violations;
  push(end, EventKind::ComputeDone, n);
}

void Simulation::try_start_link(std::size_t l, double t) {
  LinkServer& srv = links_[l];
  if (srv.busy) return;
  while (!srv.queue.empty() && requests_[srv.queue.front()].aborted) srv.queue.pop_front();
  if (srv.queue.empty()) return;
  const std::size_t r = srv.queue.front();
  srv.queue.pop_front();
  const RequestState& rq = requests_[r];
  const Stage& s = deployments_[rq.deployment].stages[rq.stage];
  const LinkSpec& link = topo_.link(l);
  const double ser = serialization_seconds(s.bytes, link.bandwidth_mbps.sample(t));
  const double prop = link.latency_ms.sample(t) / 1000.0;
  srv.busy = true;
  push(t + ser, EventKind::LinkIdle, l);
  push(t + ser + prop, EventKind::TransferDone, r);
}

void Simulation::advance(std::size_t r, double t) {
  RequestState& rq = requests_[r];
  if (++rq.stage < deployments_[rq.deployment].stages.size()) {
    start_stage(r, t);
    return;
  }
  rq.done = true;
  --in_flight_;
  ++result_.report.completions;
  record_sample((t - rq.spec.arrival_time) * 1000.0);
  log(t, EventKind::ComputeDone, static_cast<std::int64_t>(rq.spec.id), -1, "complete");
}

void Simulation::on_tick(double t) {
  const double dt = in_.thresholds.delta_t_s;
  EnvState env;
  env.t = t;
  env.capacity = snapshot(topo_, t);
  env.node_util.resize(nodes_.size());
  env.queue_depths.resize(nodes_.size());
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    NodeServer& srv = nodes_[n];
    if (srv.busy) srv.window_busy += t - std::max(srv.started, window_start_);
    env.node_util[n] = std::min(1.0, env.capacity.nodes[n].util + srv.window_busy / dt);
    std::size_t queued = 0;
    for (std::size_t r : srv.queue) queued += requests_[r].aborted ? 0 : 1;
    env.queue_depths[n] = queued + (srv.busy ? 1 : 0);
    srv.window_busy = 0.0;
    bg_sum_[n] += env.capacity.nodes[n].util;
  }
  ++bg_samples_;
  window_start_ = t;
  env.in_flight = in_flight_;
  if (window_count_ > 0) {
    ewma_ = update_ewma(ewma_, window_sum_ / static_cast<double>(window_count_), in_.thresholds.ewma_lambda);
    window_sum_ = 0.0;
    window_count_ = 0;
  }
  env.ewma_latency_ms = ewma_.initialized ? ewma_.current : 0.0;
  env.active_links = deployments_[active_].links;

  if (state_.mode != Mode::Adaptive || migrating_) return;
  const TriggerReport triggers = should_reconfigure(env, ewma_, in_.thresholds, pending_privacy_);
  if (!triggers.any()) return;

  PlanningContext ctx;
  ctx.model = &model_;
  ctx.topology = &topo_;
  ctx.snapshot = env.capacity;
  ctx.arrival_rate_rps = in_.workload.rate_at(t);
  ctx.privacy_mode = in_.privacy_mode;
  ctx.pin_input_trusted = pending_privacy_;
  const CostModel cost(std::move(ctx));
  ReconfigPlan plan;
  try {
    plan = decide(state_, cost, in_.weights, in_.solver, in_.thresholds, in_.policy, triggers, t);
  } catch (const Infeasible& e) {
    ++result_.report.downtime_incidents;
    log(t, EventKind::MonitorTick, -1, -1, fmt::format("infeasible: {}", e.what()));
    return;
  }
  std::string reasons;
  for (const auto& s : plan.reasons) reasons += (reasons.empty() ? "" : ";") + s;
  if (plan.reasons.empty() || plan.reasons.front() != "cooldown") pending_privacy_ = false;
  if (plan.kind == PlanKind::Keep) {
    log(t, EventKind::MonitorTick, -1, -1, fmt::format("triggers={} plan=keep reasons={}", triggers.describe(), reasons));
    return;
  }
  state_ = apply_reconfiguration(state_, plan, t);
  const double start = t + in_.sim.monitor_overhead_ms / 1000.0;
  const double done = execute_migration(plan, topo_, start, in_.sim.migration_overhead_ms / 1000.0);
  pending_deployment_ = add_deployment(plan.scheme, plan.placement);
  migrating_ = true;
  push(done, EventKind::MigrationDone, pending_deployment_);
  ++result_.report.reconfigurations;
  const std::string reason = fmt::format("{}:{}", to_string(plan.kind), triggers.describe());
  result_.report.reconfig_reasons.push_back(reason);
  result_.reconfigs.push_back({t, plan.kind, reasons, plan.moved_bytes(), done});
  log(t, EventKind::MonitorTick, -1, -1,
      fmt::format("triggers={} plan={} reasons={} moved_bytes={}", triggers.describe(), to_string(plan.kind), reasons,
                  plan.moved_bytes()));
}

SimResult Simulation::run() {
  const SimConfig& sim = in_.sim;
  if (!(sim.horizon_s > 0.0) || !std::isfinite(sim.horizon_s)) throw ConfigError("sim.horizon_s must be positive");
  if (!(sim.timeout_multiplier > 0.0)) throw ConfigError("sim.timeout_multiplier must be positive");
  if (auto v = in_.thresholds.validate(); !v.empty()) throw ConfigError("thresholds: " + v.front());

  {
    PlanningContext ctx;
    ctx.model = &model_;
    ctx.topology = &topo_;
    ctx.snapshot = snapshot(topo_, 0.0);
    ctx.arrival_rate_rps = in_.workload.rate_at(0.0);
    ctx.privacy_mode = in_.privacy_mode;
    try {
      static_baseline(CostModel(std::move(ctx)), in_.initial.scheme, in_.initial.placement);
    } catch (const Infeasible& e) {
      throw ConfigError(e.what());
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
  }
  state_ = in_.initial;
  active_ = add_deployment(state_.scheme, state_.placement);

  nodes_.resize(topo_.node_count());
  links_.resize(topo_.link_count());
  bg_sum_.assign(topo_.node_count(), 0.0);

  std::vector<RequestSpec> specs =
      in_.requests.empty() ? generate_requests(in_.workload, sim.seed, sim.horizon_s) : in_.requests;
  std::stable_sort(specs.begin(), specs.end(),
                   [](const RequestSpec& a, const RequestSpec& b) { return a.arrival_time < b.arrival_time; });
  for (const RequestSpec& s : specs) {
    if (!(s.arrival_time <= sim.horizon_s)) continue;
    requests_.push_back({s});
    push(s.arrival_time, EventKind::Arrival, requests_.size() - 1);
  }
  const double dt = in_.thresholds.delta_t_s;
  std::uint64_t tick = 1;
  if (dt <= sim.horizon_s) push(dt, EventKind::MonitorTick, 0);

  while (!events_.empty() && events_.top().time <= sim.horizon_s) {
    const Event ev = events_.top();
    events_.pop();
    const double t = ev.time;
    switch (ev.kind) {
      case EventKind::TraceBreakpoint:
        break;
      case EventKind::MigrationDone:
        active_ = ev.payload;
        migrating_ = false;
        log(t, ev.kind, -1, -1, "switch");
        break;
      case EventKind::ComputeDone: {
        NodeServer& srv = nodes_[ev.payload];
        const std::size_t r = srv.current;
        srv.busy = false;
        srv.window_busy += t - std::max(srv.started, window_start_);
        RequestState& rq = requests_[r];
        const Stage& s = deployments_[rq.deployment].stages[rq.stage];
        log(t, ev.kind, static_cast<std::int64_t>(rq.spec.id), static_cast<std::int64_t>(ev.payload),
            fmt::format("partition={}", s.partition), srv.started, s.critical, topo_.node(ev.payload).trusted);
        if (!rq.aborted) advance(r, t);
        try_start_node(ev.payload, t);
        break;
      }
      case EventKind::LinkIdle:
        links_[ev.payload].busy = false;
        try_start_link(ev.payload, t);
        break;
      case EventKind::TransferDone: {
        RequestState& rq = requests_[ev.payload];
        const Stage& s = deployments_[rq.deployment].stages[rq.stage];
        log(t, ev.kind, static_cast<std::int64_t>(rq.spec.id), static_cast<std::int64_t>(s.links[rq.hop]),
            s.is_return ? "return" : fmt::format("partition={}", s.partition));
        if (rq.aborted) break;
        if (++rq.hop < s.links.size()) {
          links_[s.links[rq.hop]].queue.push_back(ev.payload);
          try_start_link(s.links[rq.hop], t);
        } else {
          advance(ev.payload, t);
        }
        break;
      }
      case EventKind::Timeout: {
        RequestState& rq = requests_[ev.payload];
        if (rq.done) break;
        rq.aborted = true;
        --in_flight_;
        ++result_.report.timeouts;
        ++result_.report.downtime_incidents;
        record_sample(sim.timeout_multiplier * rq.spec.sla_budget_ms);
        log(t, ev.kind, static_cast<std::int64_t>(rq.spec.id), -1, "abort");
        break;
      }
      case EventKind::Arrival: {
        RequestState& rq = requests_[ev.payload];
        rq.arrived = true;
        rq.deployment = active_;
        ++in_flight_;
        if (rq.spec.privacy_high && deployments_[active_].exposes) pending_privacy_ = true;
        log(t, ev.kind, static_cast<std::int64_t>(rq.spec.id), -1, rq.spec.privacy_high ? "privacy=high" : "");
        push(t + sim.timeout_multiplier * rq.spec.sla_budget_ms / 1000.0, EventKind::Timeout, ev.payload);
        start_stage(ev.payload, t);
        break;
      }
      case EventKind::MonitorTick: {
        on_tick(t);
        ++tick;
        const double next = static_cast<double>(tick) * dt;
        if (next <= sim.horizon_s) push(next, EventKind::MonitorTick, 0);
        break;
      }
    }
  }

  MetricsReport& rep = result_.report;
  rep.run_id = in_.run_id;
  rep.mode = state_.mode == Mode::Static ? "static" : "adaptive";
  rep.seed = sim.seed;
  rep.horizon_s = sim.horizon_s;
  rep.requests = requests_.size();
  rep.truncated = 0;
  for (const RequestState& rq : requests_)
    if (!rq.done && !rq.aborted) ++rep.truncated;
  rep.sla_budget_ms = in_.workload.sla_budget_ms;
  for (const NodeSpec& n : topo_.nodes()) rep.node_ids.push_back(n.id);
  rep.utilization_per_node = utilization_summary(result_.busy, topo_.node_count(), sim.horizon_s);
  rep.background_util_per_node.resize(topo_.node_count());
  for (std::size_t n = 0; n < topo_.node_count(); ++n)
    rep.background_util_per_node[n] = bg_samples_ > 0 ? bg_sum_[n] / static_cast<double>(bg_samples_)
                                                       : topo_.node(n).bg_util.sample(0.0);
  finalize_report(rep);
  return std::move(result_);
}

}  // namespace

SimResult run_scenario(const SimInputs& inputs) {
  if (!inputs.model || !inputs.topology) throw PreconditionError("simulation without model or topology");
  Simulation sim(inputs);
  return sim.run();
}

std::string to_json_line(const LogRecord& record, const Topology& topology) {
  nlohmann::ordered_json j;
  j["time"] = record.time;
  j["kind"] = to_string(record.kind);
  j["request_id"] = record.request_id >= 0 ? nlohmann::ordered_json(record.request_id) : nlohmann::ordered_json();
  if (record.node < 0) {
    j["node_id"] = nullptr;
  } else if (record.kind == EventKind::TransferDone || record.kind == EventKind::LinkIdle) {
    const LinkSpec& l = topology.link(static_cast<std::size_t>(record.node));
    j["node_id"] = l.a + "-" + l.b;
  } else {
    j["node_id"] = topology.node(static_cast<std::size_t>(record.node)).id;
  }
  j["detail"] = record.detail;
  if (record.kind == EventKind::ComputeDone && record.node >= 0) {
    j["start"] = record.start;
    j["critical"] = record.critical;
    j["trusted"] = record.trusted;
  }
  return j.dump();
}

}  // namespace adaptsplit
