#include "adaptsplit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "adaptsplit/errors.hpp"
#include "adaptsplit/rng.hpp"

namespace adaptsplit {

using nlohmann::json;

namespace {

constexpr double kMB = 1e6;
constexpr double kGB = 1e9;

// Reads fields of one JSON object, collecting violations instead of throwing.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path, std::vector<std::string>& violations,
               std::initializer_list<const char*> allowed)
      : obj_(obj), path_(std::move(path)), out_(violations) {
    if (!obj_.is_object()) {
      out_.push_back(fmt::format("{}: expected an object", path_));
      return;
    }
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj_.items())
      if (!keys.count(k)) out_.push_back(fmt::format("{}: unknown key '{}'", path_, k));
  }

  bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }
  const json& at(const char* key) const { return obj_.at(key); }
  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const char* key, double fallback, bool required = false) const {
    if (!has(key)) {
      if (required) out_.push_back(fmt::format("{}: required", where(key)));
      return fallback;
    }
    const json& v = obj_.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
      return std::numeric_limits<double>::infinity();
    out_.push_back(fmt::format("{}: expected a number", where(key)));
    return fallback;
  }

  std::uint64_t count(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    out_.push_back(fmt::format("{}: expected a non-negative integer", where(key)));
    return fallback;
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (obj_.at(key).is_boolean()) return obj_.at(key).get<bool>();
    out_.push_back(fmt::format("{}: expected true or false", where(key)));
    return fallback;
  }

  std::string string(const char* key, std::string fallback, bool required = false) const {
    if (!has(key)) {
      if (required) out_.push_back(fmt::format("{}: required", where(key)));
      return fallback;
    }
    if (obj_.at(key).is_string()) return obj_.at(key).get<std::string>();
    out_.push_back(fmt::format("{}: expected a string", where(key)));
    return fallback;
  }

  void fail(const std::string& msg) const { out_.push_back(fmt::format("{}: {}", path_, msg)); }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& out_;
};

const json& empty_object() {
  static const json e = json::object();
  return e;
}

const json& section(const json& doc, const char* key) { return doc.contains(key) ? doc.at(key) : empty_object(); }

Trace parse_trace(const json& v, const std::string& path, std::vector<std::string>& out, std::uint64_t seed,
                  double horizon) {
  if (v.is_number()) return Trace::constant(v.get<double>());
  if (!v.is_object()) {
    out.push_back(fmt::format("{}: expected a number or a trace object", path));
    return Trace::constant(0.0);
  }
  const std::string kind = v.contains("kind") && v.at("kind").is_string() ? v.at("kind").get<std::string>() : "";
  Trace t;
  if (kind == "constant") {
    ObjectReader r(v, path, out, {"kind", "value"});
    t = Trace::constant(r.number("value", 0.0, true));
  } else if (kind == "piecewise") {
    ObjectReader r(v, path, out, {"kind", "points"});
    std::vector<std::pair<double, double>> pts;
    bool ok = r.has("points") && r.at("points").is_array();
    if (ok)
      for (const auto& p : r.at("points")) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          ok = false;
          break;
        }
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
    if (!ok) r.fail("points must be a list of [t, value] pairs");
    t = Trace::piecewise(std::move(pts));
  } else if (kind == "sinusoid") {
    ObjectReader r(v, path, out, {"kind", "base", "amplitude", "period_s", "phase_s"});
    t = Trace::sinusoid(r.number("base", 0.0, true), r.number("amplitude", 0.0, true), r.number("period_s", 1.0, true),
                        r.number("phase_s", 0.0));
  } else if (kind == "markov") {
    ObjectReader r(v, path, out, {"kind", "states", "mean_dwell_s", "initial_state"});
    Trace::Markov def;
    if (r.has("states") && r.at("states").is_array() &&
        std::all_of(r.at("states").begin(), r.at("states").end(), [](const json& s) { return s.is_number(); }))
      def.states = r.at("states").get<std::vector<double>>();
    else
      r.fail("states must be a list of numbers");
    def.mean_dwell_s = r.number("mean_dwell_s", 1.0, true);
    def.initial_state = r.count("initial_state", 0);
    t = Trace::markov(def, derive_seed(seed, "trace:" + path), horizon);
  } else {
    out.push_back(fmt::format("{}: unknown trace kind '{}'", path, kind));
    return Trace::constant(0.0);
  }
  for (const auto& msg : t.check()) out.push_back(fmt::format("{}: {}", path, msg));
  return t;
}

ModelSpec parse_model(const json& doc, std::vector<std::string>& out) {
  ModelSpec m;
  ObjectReader r(section(doc, "model"), "model", out, {"name", "blocks", "k_max", "output_mb"});
  m.name = r.string("name", "model");
  m.k_max = r.count("k_max", 1);
  if (r.has("output_mb")) m.output_bytes = r.number("output_mb", 0.0) * kMB;
  if (!r.has("blocks") || !r.at("blocks").is_array() || r.at("blocks").empty()) {
    out.push_back("model.blocks: expected a non-empty list");
    return m;
  }
  std::size_t i = 0;
  for (const json& b : r.at("blocks")) {
    ObjectReader br(b, fmt::format("model.blocks[{}]", i), out,
                    {"name", "work_gflop", "param_mb", "activation_out_mb", "privacy_critical", "sensitivity"});
    Block blk;
    blk.index = i;
    blk.work_gflop = br.number("work_gflop", 0.0, true);
    blk.param_bytes = br.number("param_mb", 0.0, true) * kMB;
    blk.activation_out_bytes = br.number("activation_out_mb", 0.0, true) * kMB;
    blk.privacy_critical = br.boolean("privacy_critical", false);
    blk.sensitivity = br.number("sensitivity", blk.privacy_critical ? 1.0 : 0.0);
    m.blocks.push_back(blk);
    ++i;
  }
  for (const auto& v : validate_model(m).violations) out.push_back("model: " + v);
  return m;
}


std::optional<Topology> parse_topology(const json& doc, std::vector<std::string>& out, std::uint64_t seed,
                                       double horizon) {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::optional<std::string> hub;
  const json& jn = section(doc, "nodes");
  if (!jn.is_array() || jn.empty()) {
    out.push_back("nodes: expected a non-empty list");
    return std::nullopt;
  }
  std::size_t i = 0;
  for (const json& n : jn) {
    ObjectReader r(n, fmt::format("nodes[{}]", i++), out,
                   {"id", "kind", "speed_gflops", "mem_gb", "trusted", "bg_util", "hub"});
    NodeSpec ns;
    ns.id = r.string("id", "", true);
    const std::string kind = r.string("kind", "edge");
    if (kind == "cloud")
      ns.kind = NodeKind::Cloud;
    else if (kind != "edge")
      r.fail(fmt::format("unknown node kind '{}'", kind));
    ns.speed_gflops = r.number("speed_gflops", 1.0, true);
    if (r.has("mem_gb")) ns.mem_bytes = r.number("mem_gb", 0.0) * kGB;
    ns.trusted = r.boolean("trusted", false);
    ns.bg_util = r.has("bg_util") ? parse_trace(r.at("bg_util"), fmt::format("node {}.bg_util", ns.id), out, seed, horizon)
                                  : Trace::constant(0.0);
    if (r.boolean("hub", false)) {
      if (hub) r.fail("more than one hub node");
      hub = ns.id;
    }
    nodes.push_back(std::move(ns));
  }
  const json& jl = section(doc, "links");
  if (!jl.is_array()) {
    out.push_back("links: expected a list");
    return std::nullopt;
  }
  i = 0;
  for (const json& l : jl) {
    ObjectReader r(l, fmt::format("links[{}]", i++), out, {"a", "b", "bandwidth_mbps", "latency_ms"});
    LinkSpec ls;
    ls.a = r.string("a", "", true);
    ls.b = r.string("b", "", true);
    const std::string name = fmt::format("link {}-{}", ls.a, ls.b);
    if (r.has("bandwidth_mbps"))
      ls.bandwidth_mbps = parse_trace(r.at("bandwidth_mbps"), name + ".bandwidth_mbps", out, seed, horizon);
    else
      r.fail("bandwidth_mbps: required");
    ls.latency_ms = r.has("latency_ms") ? parse_trace(r.at("latency_ms"), name + ".latency_ms", out, seed, horizon)
                                        : Trace::constant(0.0);
    links.push_back(std::move(ls));
  }
  try {
    Topology topo(std::move(nodes), std::move(links), hub);
    for (const auto& v : topo.validate()) out.push_back(v);
    return topo;
  } catch (const ConfigError& e) {
    out.push_back(e.what());
    return std::nullopt;
  }
}

WorkloadSpec parse_workload(const json& doc, std::vector<std::string>& out) {
  WorkloadSpec w;
  ObjectReader r(section(doc, "workload"), "workload", out,
                 {"kind", "rate_rps", "rate_schedule", "arrivals", "duration_s", "privacy_high_prob", "sla_budget_ms",
                  "work_multiplier", "work_jitter"});
  const std::string kind = r.string("kind", "poisson");
  if (kind == "trace")
    w.kind = WorkloadSpec::Kind::Trace;
  else if (kind != "poisson")
    r.fail(fmt::format("unknown workload kind '{}'", kind));
  w.rate_rps = r.number("rate_rps", w.rate_rps);
  if (r.has("rate_schedule")) {
    bool ok = r.at("rate_schedule").is_array();
    if (ok)
      for (const auto& s : r.at("rate_schedule")) {
        if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
          ok = false;
          break;
        }
        w.rate_schedule.push_back({s[0].get<double>(), s[1].get<double>()});
      }
    if (!ok) r.fail("rate_schedule must be a list of [t, rate] pairs");
  }
  if (r.has("arrivals")) {
    const json& a = r.at("arrivals");
    if (a.is_array() && std::all_of(a.begin(), a.end(), [](const json& x) { return x.is_number(); }))
      w.arrivals = a.get<std::vector<double>>();
    else
      r.fail("arrivals must be a list of times");
  }
  if (w.kind == WorkloadSpec::Kind::Trace && !r.has("arrivals")) r.fail("trace workloads need arrivals");
  w.duration_s = r.number("duration_s", 0.0);
  w.privacy_high_prob = r.number("privacy_high_prob", 0.0);
  w.sla_budget_ms = r.number("sla_budget_ms", w.sla_budget_ms);
  w.work_multiplier = r.number("work_multiplier", 1.0);
  w.work_jitter = r.number("work_jitter", 0.0);
  for (const auto& v : w.validate()) out.push_back(v);
  return w;
}

}  // namespace

ScenarioLoad parse_scenario(const json& doc) {
  ScenarioLoad load;
  auto& out = load.violations;
  ObjectReader top(doc, "", out,
                   {"schema_version", "name", "description", "model", "nodes", "links", "workload", "cost",
                    "thresholds", "orchestrator", "solver", "sim"});
  if (!doc.is_object()) return load;
  if (!top.has("schema_version"))
    out.push_back("schema_version: required");
  else if (top.count("schema_version", 0) != 1)
    out.push_back("schema_version: only version 1 is supported");

  Scenario s;
  s.doc = doc;
  s.name = top.string("name", "scenario");

  {
    ObjectReader r(section(doc, "sim"), "sim", out,
                   {"seed", "horizon_s", "timeout_multiplier", "migration_overhead_ms", "monitor_overhead_ms"});
    s.sim.seed = r.count("seed", s.sim.seed);
    s.sim.horizon_s = r.number("horizon_s", s.sim.horizon_s);
    s.sim.timeout_multiplier = r.number("timeout_multiplier", s.sim.timeout_multiplier);
    s.sim.migration_overhead_ms = r.number("migration_overhead_ms", s.sim.migration_overhead_ms);
    s.sim.monitor_overhead_ms = r.number("monitor_overhead_ms", s.sim.monitor_overhead_ms);
    if (!(s.sim.horizon_s > 0.0) || !std::isfinite(s.sim.horizon_s)) r.fail("horizon_s must be positive and finite");
    if (!(s.sim.timeout_multiplier > 0.0)) r.fail("timeout_multiplier must be positive");
    if (!(s.sim.migration_overhead_ms >= 0.0)) r.fail("migration_overhead_ms must be >= 0");
    if (!(s.sim.monitor_overhead_ms >= 0.0)) r.fail("monitor_overhead_ms must be >= 0");
  }

  s.model = parse_model(doc, out);
  const auto topo = parse_topology(doc, out, s.sim.seed, s.sim.horizon_s);
  s.workload = parse_workload(doc, out);

  {
    ObjectReader r(section(doc, "cost"), "cost", out, {"alpha", "beta", "gamma", "privacy_mode"});
    s.weights.alpha = r.number("alpha", s.weights.alpha);
    s.weights.beta = r.number("beta", s.weights.beta);
    s.weights.gamma = r.number("gamma", s.weights.gamma);
    for (double w : {s.weights.alpha, s.weights.beta, s.weights.gamma})
      if (!(w >= 0.0) || !std::isfinite(w)) r.fail("weights must be finite and >= 0");
    const std::string pm = r.string("privacy_mode", "hard");
    if (pm == "soft")
      s.privacy_mode = PrivacyMode::Soft;
    else if (pm != "hard")
      r.fail(fmt::format("unknown privacy_mode '{}'", pm));
  }
  {
    ObjectReader r(section(doc, "thresholds"), "thresholds", out,
                   {"l_max_ms", "u_max", "b_min_mbps", "t_cool_s", "delta_t_s", "ewma_lambda"});
    Thresholds& t = s.thresholds;
    t.l_max_ms = r.number("l_max_ms", t.l_max_ms);
    t.u_max = r.number("u_max", t.u_max);
    t.b_min_mbps = r.number("b_min_mbps", t.b_min_mbps);
    t.t_cool_s = r.number("t_cool_s", t.t_cool_s);
    t.delta_t_s = r.number("delta_t_s", t.delta_t_s);
    t.ewma_lambda = r.number("ewma_lambda", t.ewma_lambda);
    for (const auto& v : t.validate()) out.push_back("thresholds." + v);
  }
  {
    ObjectReader r(section(doc, "orchestrator"), "orchestrator", out,
                   {"mode", "hysteresis", "migration_amortization", "initial"});
    const std::string mode = r.string("mode", "adaptive");
    if (mode == "static")
      s.mode = Mode::Static;
    else if (mode != "adaptive")
      r.fail(fmt::format("unknown mode '{}'", mode));
    s.policy.hysteresis = r.number("hysteresis", s.policy.hysteresis);
    if (!(s.policy.hysteresis >= 0.0 && s.policy.hysteresis < 1.0)) r.fail("hysteresis must be in [0, 1)");
    s.policy.migration_amortization = r.boolean("migration_amortization", s.policy.migration_amortization);
    s.policy.migration_overhead_s = s.sim.migration_overhead_ms / 1000.0;
    if (r.has("initial")) {
      ObjectReader ir(r.at("initial"), "orchestrator.initial", out, {"cut_points", "placement"});
      const json& cuts = ir.has("cut_points") ? ir.at("cut_points") : json::array();
      if (cuts.is_array() && std::all_of(cuts.begin(), cuts.end(), [](const json& c) { return c.is_number_unsigned(); }))
        s.initial_cuts = cuts.get<std::vector<std::size_t>>();
      else
        ir.fail("cut_points must be a list of block indices");
      if (ir.has("placement") && ir.at("placement").is_array() &&
          std::all_of(ir.at("placement").begin(), ir.at("placement").end(), [](const json& c) { return c.is_string(); }))
        s.initial_nodes = ir.at("placement").get<std::vector<std::string>>();
      else
        ir.fail("placement must be a list of node ids");
      if (s.initial_cuts && s.initial_nodes) {
        try {
          const SplitScheme scheme(s.model.size(), *s.initial_cuts);
          if (scheme.partition_count() != s.initial_nodes->size())
            ir.fail(fmt::format("{} partitions but {} placement entries", scheme.partition_count(),
                                s.initial_nodes->size()));
          if (scheme.partition_count() > s.model.k_max) ir.fail("more partitions than model.k_max");
        } catch (const PreconditionError& e) {
          ir.fail(e.what());
        }
        if (topo)
          for (const auto& id : *s.initial_nodes)
            if (!topo->node_index(id)) ir.fail(fmt::format("unknown node '{}'", id));
      }
    }
  }
  {
    ObjectReader r(section(doc, "solver"), "solver", out, {"enumeration_budget", "max_k", "search_limit"});
    s.solver.enumeration_budget = r.count("enumeration_budget", s.solver.enumeration_budget);
    s.solver.max_k = r.count("max_k", s.solver.max_k);
    s.solver.search_limit = r.count("search_limit", s.solver.search_limit);
    if (s.solver.max_k < 1) r.fail("max_k must be >= 1");
  }
  s.sim.record_event_log = false;

  if (out.empty()) load.scenario = std::move(s);
  return load;
}

Topology Scenario::topology_for_seed(std::uint64_t seed) const {
  std::vector<std::string> out;
  auto topo = parse_topology(doc, out, seed, sim.horizon_s);
  if (!topo || !out.empty()) throw ConfigError(out.empty() ? "invalid topology" : out.front());
  return std::move(*topo);
}

json read_scenario_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return json::parse(ss.str());
}

namespace {

// Scalar keys of the schema, so overrides can set keys a document omits.
const char* const kKnownScalars[] = {
    "name", "description", "model.k_max", "model.output_mb", "workload.kind", "workload.rate_rps",
    "workload.duration_s", "workload.privacy_high_prob", "workload.sla_budget_ms", "workload.work_multiplier",
    "workload.work_jitter", "cost.alpha", "cost.beta", "cost.gamma", "cost.privacy_mode", "thresholds.l_max_ms",
    "thresholds.u_max", "thresholds.b_min_mbps", "thresholds.t_cool_s", "thresholds.delta_t_s",
    "thresholds.ewma_lambda", "orchestrator.mode", "orchestrator.hysteresis", "orchestrator.migration_amortization",
    "solver.enumeration_budget", "solver.max_k", "solver.search_limit", "sim.seed", "sim.horizon_s",
    "sim.timeout_multiplier", "sim.migration_overhead_ms", "sim.monitor_overhead_ms"};

void collect_leaves(const json& node, const std::string& prefix, std::set<std::string>& out) {
  if (!node.is_object()) return;
  for (const auto& [k, v] : node.items()) {
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object())
      collect_leaves(v, path, out);
    else if (!v.is_array())
      out.insert(path);
  }
}

std::string leaf_of(const std::string& path) {
  const auto dot = path.rfind('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

}  // namespace

std::optional<std::string> resolve_scalar_key(const json& doc, const std::string& key) {
  std::set<std::string> leaves(std::begin(kKnownScalars), std::end(kKnownScalars));
  collect_leaves(doc, "", leaves);
  if (leaves.count(key)) return key;
  std::vector<std::string> exact, prefix;
  for (const auto& p : leaves) {
    const std::string leaf = leaf_of(p);
    if (leaf == key) exact.push_back(p);
    if (leaf.rfind(key, 0) == 0) prefix.push_back(p);
  }
  if (exact.size() == 1) return exact.front();
  if (exact.empty() && prefix.size() == 1) return prefix.front();
  return std::nullopt;
}

std::optional<std::string> apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) return fmt::format("override '{}' is not key=value", assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  const auto path = resolve_scalar_key(doc, key);
  if (!path) return fmt::format("unknown or ambiguous key '{}'", key);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  std::string pointer;
  std::stringstream ss(*path);
  for (std::string part; std::getline(ss, part, '.');) pointer += "/" + part;
  try {
    doc[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    return fmt::format("cannot set '{}': {}", *path, e.what());
  }
  return std::nullopt;
}

OrchestratorState initial_deployment(const Scenario& scenario, const Topology& topology) {
  PlanningContext ctx;
  ctx.model = &scenario.model;
  ctx.topology = &topology;
  ctx.snapshot = snapshot(topology, 0.0);
  ctx.arrival_rate_rps = scenario.workload.rate_at(0.0);
  ctx.privacy_mode = scenario.privacy_mode;
  const CostModel cost(std::move(ctx));
  SplitScheme scheme;
  Placement placement;
  if (scenario.initial_cuts && scenario.initial_nodes) {
    scheme = SplitScheme(scenario.model.size(), *scenario.initial_cuts);
    for (const auto& id : *scenario.initial_nodes) placement.assignment.push_back(topology.require_node(id));
  } else {
    const Solution best = solve_joint(cost, scenario.weights, scenario.solver);
    scheme = best.scheme;
    placement = best.placement;
  }
  OrchestratorState state = static_baseline(cost, std::move(scheme), std::move(placement));
  state.mode = scenario.mode;
  return state;
}

SimResult run_scenario(const Scenario& scenario, const RunOptions& options, Topology* topology_out) {
  const Topology topology = scenario.topology_for_seed(options.seed);
  OrchestratorState state = initial_deployment(scenario, topology);
  state.mode = options.mode;

  SimInputs in;
  in.model = &scenario.model;
  in.topology = &topology;
  in.workload = scenario.workload;
  in.weights = scenario.weights;
  in.privacy_mode = scenario.privacy_mode;
  in.solver = scenario.solver;
  in.thresholds = scenario.thresholds;
  in.policy = scenario.policy;
  in.initial = std::move(state);
  in.sim = scenario.sim;
  in.sim.seed = options.seed;
  in.sim.record_event_log = options.record_event_log;
  in.run_id = options.run_id;
  SimResult result = run_scenario(in);
  if (topology_out) *topology_out = topology;
  return result;
}

}  // namespace adaptsplit
