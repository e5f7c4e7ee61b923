// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fmt/core.h>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adaptsplit/errors.hpp"
#include "adaptsplit/metrics.hpp"
#include "adaptsplit/orchestrator.hpp"
#include "adaptsplit/scenario.hpp"
#include "adaptsplit/simengine.hpp"
#include "adaptsplit/solver.hpp"
#include "support/instances.hpp"

using namespace adaptsplit;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string scenario_path(const std::string& name) { return std::string(ADAPTSPLIT_SCENARIO_DIR) + "/" + name + ".json"; }

const std::vector<std::string> kShipped{"reference_mec", "smartcity_surge", "factory_ramp", "v2x_corridor"};

Scenario load(const json& doc) {
  auto l = parse_scenario(doc);
  if (!l.scenario) throw ConfigError(l.violations.empty() ? "invalid scenario" : l.violations.front());
  return std::move(*l.scenario);
}

Scenario load_named(const std::string& name) { return load(read_scenario_document(scenario_path(name))); }

double joint_or_inf(const CostModel& cm, const CostWeights& w, const SolverConfig& cfg,
                    const std::function<Solution(const CostModel&, const CostWeights&, const SolverConfig&)>& f) {
  try {
    return f(cm, w, cfg).cost.total;
  } catch (const Infeasible&) {
    return kInf;
  }
}

SolverConfig full_config(const ModelSpec& m) {
  SolverConfig cfg;
  cfg.max_k = m.size();
  return cfg;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  int mismatches = 0, feasible = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto inst = testsupport::random_instance(seed);
    const CostModel cm(testsupport::context_of(inst));
    const double exact = joint_or_inf(cm, inst.weights, full_config(inst.model), solve_joint);
    const double brute = testsupport::brute_force_min(inst, inst.model.size());
    if (!(exact == brute)) {
      ++mismatches;
      fmt::print(stderr, "  C1 seed {}: solve_joint {} vs brute force {}\n", seed, exact, brute);
    }
    if (std::isfinite(brute)) ++feasible;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0,
          fmt::format("200 instances ({} feasible), {} mismatches, {:.2f} s", feasible, mismatches, secs)};
}

Outcome dp_dominance() {
  int below = 0, unequal = 0, additive_checked = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    for (bool additive : {false, true}) {
      testsupport::InstanceShape shape;
      shape.additive = additive;
      const auto inst = testsupport::random_instance(seed, shape);
      const CostModel cm(testsupport::context_of(inst));
      const auto cfg = full_config(inst.model);
      const double exact = joint_or_inf(cm, inst.weights, cfg, solve_joint);
      const double dp = joint_or_inf(cm, inst.weights, cfg, [](const CostModel& c, const CostWeights& w,
                                                               const SolverConfig& s) { return dp_chain_solver(c, w, s); });
      if (dp < exact) {
        ++below;
        fmt::print(stderr, "  C2 seed {}: dp {} below exact {}\n", seed, dp, exact);
      }
      if (additive) {
        ++additive_checked;
        if (!(dp == exact)) {
          ++unequal;
          fmt::print(stderr, "  C2 seed {} additive: dp {} vs exact {}\n", seed, dp, exact);
        }
      }
    }
  }
  return {below == 0 && unequal == 0,
          fmt::format("400 runs, {} below exact, {} of {} additive runs not equal", below, unequal, additive_checked)};
}

Outcome no_contention() {
  int checked = 0, off = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; checked < 50 && seed < 1000; ++seed) {
    const auto inst = testsupport::random_instance(seed + 5000);
    const PlanningContext ctx = testsupport::context_of(inst);
    Solution sol;
    try {
      sol = solve_joint(CostModel(ctx), inst.weights, full_config(inst.model));
    } catch (const Infeasible&) {
      continue;
    }
    SimInputs in;
    in.model = &inst.model;
    in.topology = inst.topology.get();
    in.privacy_mode = ctx.privacy_mode;
    in.initial.scheme = sol.scheme;
    in.initial.placement = sol.placement;
    in.initial.mode = Mode::Static;
    in.workload.rate_rps = 0.0;
    in.sim.horizon_s = 1e6;
    RequestSpec r;
    r.arrival_time = 0.0;
    r.sla_budget_ms = 1e12;
    in.requests = {r};
    const auto res = run_scenario(in);
    const double expected = latency_term(ctx, sol.scheme, sol.placement) * 1000.0;
    if (res.report.completions != 1) {
      ++off;
      continue;
    }
    const double got = res.report.latency_samples_ms[0];
    const double rel = std::abs(got - expected) / std::max(std::abs(got), std::abs(expected));
    worst = std::max(worst, rel);
    if (!(rel <= 1e-9)) ++off;
    ++checked;
  }
  return {checked == 50 && off == 0,
          fmt::format("{} instances, {} outside 1e-9, worst relative error {:.3g}", checked, off, worst)};
}

Outcome reference_bands() {
  const auto t0 = Clock::now();
  const Scenario s = load_named("reference_mec");
  int bad = 0;
  double min_ad_sla = 1, max_ad_p95 = 0, max_st_sla = 0, min_st_p95 = kInf;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RunOptions opt;
    opt.seed = seed;
    opt.mode = Mode::Adaptive;
    const auto ad = run_scenario(s, opt).report;
    opt.mode = Mode::Static;
    const auto st = run_scenario(s, opt).report;
    const double ad_sla = ad.sla_hit_rate.value_or(0), st_sla = st.sla_hit_rate.value_or(1);
    const double ad_p95 = ad.p95_ms.value_or(kInf), st_p95 = st.p95_ms.value_or(0);
    min_ad_sla = std::min(min_ad_sla, ad_sla);
    max_ad_p95 = std::max(max_ad_p95, ad_p95);
    max_st_sla = std::max(max_st_sla, st_sla);
    min_st_p95 = std::min(min_st_p95, st_p95);
    const bool ok = ad_sla >= 0.95 && st_sla <= 0.70 && ad_p95 <= 300 && st_p95 >= 500;
    if (!ok) {
      ++bad;
      fmt::print(stderr, "  C4 seed {}: adaptive sla {} p95 {}, static sla {} p95 {}\n", seed, ad_sla, ad_p95, st_sla,
                 st_p95);
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 60.0,
          fmt::format("10 seeds: adaptive sla >= {:.3f}, p95 <= {:.0f} ms; static sla <= {:.3f}, p95 >= {:.0f} ms; "
                      "{:.2f} s",
                      min_ad_sla, max_ad_p95, max_st_sla, min_st_p95, secs)};
}

Outcome throughput_ordering() {
  json doc = read_scenario_document(scenario_path("reference_mec"));
  if (auto err = apply_override(doc, "rate_rps=20")) return {false, *err};
  const Scenario s = load(doc);
  double worst = kInf;
  std::string rows;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunOptions opt;
    opt.seed = seed;
    const double ad = run_scenario(s, opt).report.throughput_rps;
    opt.mode = Mode::Static;
    const double st = run_scenario(s, opt).report.throughput_rps;
    const double ratio = st > 0 ? ad / st : kInf;
    worst = std::min(worst, ratio);
    if (seed == 1) rows = fmt::format("seed 1: adaptive {:.2f} rps vs static {:.2f} rps", ad, st);
  }
  return {worst >= 3.0, fmt::format("20 rps, 5 seeds, worst ratio {:.1f}x ({})", worst, rows)};
}

Outcome trigger_boundaries() {
  int failures = 0, cases = 0;
  auto expect = [&](bool cond, const std::string& what) {
    ++cases;
    if (!cond) {
      ++failures;
      fmt::print(stderr, "  C6 {}\n", what);
    }
  };
  std::mt19937_64 rng(42);
  std::vector<Thresholds> variants(1);
  for (int i = 0; i < 20; ++i) {
    Thresholds t;
    t.l_max_ms = std::uniform_real_distribution<double>(1, 1000)(rng);
    t.u_max = std::uniform_real_distribution<double>(0.05, 0.99)(rng);
    t.b_min_mbps = std::uniform_real_distribution<double>(1, 1000)(rng);
    variants.push_back(t);
  }
  for (const Thresholds& th : variants) {
    EnvState env;
    env.capacity.links = {LinkState{th.b_min_mbps * 4, 1}};
    env.active_links = {0};
    env.node_util = {0.0, th.u_max / 2};
    const EwmaState calm{th.l_max_ms / 2, true};
    expect(!should_reconfigure(env, calm, th, false).any(), "calm state fires");

    const double l = th.l_max_ms;
    expect(should_reconfigure(env, {std::nextafter(l, kInf), true}, th, false).latency, "latency just above");
    expect(!should_reconfigure(env, {l, true}, th, false).latency, "latency at threshold");
    expect(!should_reconfigure(env, {std::nextafter(l, 0.0), true}, th, false).latency, "latency below");

    for (double u : {std::nextafter(th.u_max, 1.0), th.u_max, std::nextafter(th.u_max, 0.0)}) {
      EnvState e = env;
      e.node_util[1] = u;
      expect(should_reconfigure(e, calm, th, false).utilization == (u > th.u_max), fmt::format("utilization {}", u));
    }
    for (double b : {std::nextafter(th.b_min_mbps, 0.0), th.b_min_mbps, std::nextafter(th.b_min_mbps, kInf)}) {
      EnvState e = env;
      e.capacity.links[0].bandwidth_mbps = b;
      expect(should_reconfigure(e, calm, th, false).bandwidth == (b < th.b_min_mbps), fmt::format("bandwidth {}", b));
      e.active_links.clear();
      expect(!should_reconfigure(e, calm, th, false).bandwidth, "inactive link fires");
    }
    const auto p = should_reconfigure(env, calm, th, true);
    expect(p.privacy && !p.latency && !p.utilization && !p.bandwidth, "privacy flag alone");
  }
  const Thresholds d;
  EnvState env;
  env.capacity.links = {LinkState{49, 1}};
  env.active_links = {0};
  env.node_util = {0.86};
  expect(should_reconfigure(env, {160, true}, d, false).latency, "160 > 150");
  expect(!should_reconfigure(env, {150, true}, d, false).latency, "150 not > 150");
  expect(should_reconfigure(env, {}, d, false).utilization, "0.86 > 0.85");
  expect(should_reconfigure(env, {}, d, false).bandwidth, "49 < 50");
  expect(should_reconfigure(env, {}, d, true).privacy, "privacy flag");
  return {failures == 0, fmt::format("{} boundary cases, {} failures", cases, failures)};
}

json storm_document(std::mt19937_64& rng, const std::string& base, double t_cool) {
  json doc = read_scenario_document(scenario_path(base));
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  doc["thresholds"]["l_max_ms"] = u(20, 120);
  doc["thresholds"]["u_max"] = u(0.3, 0.85);
  doc["thresholds"]["b_min_mbps"] = u(50, 800);
  doc["thresholds"]["delta_t_s"] = u(0.25, 2.0);
  doc["thresholds"]["t_cool_s"] = std::isinf(t_cool) ? json("inf") : json(t_cool);
  doc["orchestrator"]["hysteresis"] = 0.0;
  doc["orchestrator"]["migration_amortization"] = false;
  doc["sim"]["horizon_s"] = 300;
  // Volatile background load on every untrusted node keeps the planner busy.
  for (auto& n : doc["nodes"])
    if (!n.value("trusted", false))
      n["bg_util"] = {{"kind", "markov"}, {"states", {0.05, 0.5, 0.9}}, {"mean_dwell_s", u(2, 20)}};
  return doc;
}

Outcome cooldown_invariant() {
  std::mt19937_64 rng(7);
  int runs = 0, violations = 0, multi = 0;
  std::size_t applied = 0;
  for (int i = 0; i < 60; ++i) {
    const double t_cool = std::uniform_real_distribution<double>(0.5, 40)(rng);
    const Scenario s = load(storm_document(rng, kShipped[i % kShipped.size()], t_cool));
    RunOptions opt;
    opt.seed = static_cast<std::uint64_t>(i + 1);
    const auto res = run_scenario(s, opt);
    ++runs;
    applied += res.reconfigs.size();
    if (res.reconfigs.size() > 1) ++multi;
    for (std::size_t k = 1; k < res.reconfigs.size(); ++k)
      if (res.reconfigs[k].time - res.reconfigs[k - 1].time < t_cool) {
        ++violations;
        fmt::print(stderr, "  C7 run {}: reconfigs at {} and {} with t_cool {}\n", i, res.reconfigs[k - 1].time,
                   res.reconfigs[k].time, t_cool);
      }
  }
  int inf_runs = 0, inf_over = 0;
  for (int i = 0; i < 20; ++i) {
    const Scenario s = load(storm_document(rng, kShipped[i % kShipped.size()], kInf));
    RunOptions opt;
    opt.seed = static_cast<std::uint64_t>(100 + i);
    const auto res = run_scenario(s, opt);
    ++inf_runs;
    if (res.reconfigs.size() > 1) ++inf_over;
  }

  // Direct storms against decide(): random trigger reports at random times.
  int direct_violations = 0, direct_applied = 0;
  const Scenario ref = load_named("reference_mec");
  const Topology topo = ref.topology_for_seed(1);
  for (int storm = 0; storm < 20; ++storm) {
    Thresholds th = ref.thresholds;
    th.t_cool_s = storm % 5 == 0 ? kInf : std::uniform_real_distribution<double>(1, 60)(rng);
    OrchestratorPolicy pol = ref.policy;
    pol.hysteresis = 0.0;
    pol.migration_amortization = false;
    OrchestratorState st = initial_deployment(ref, topo);
    std::vector<double> times;
    double now = 0.0;
    for (int step = 0; step < 200; ++step) {
      now += std::exponential_distribution<double>(0.5)(rng);
      PlanningContext ctx;
      ctx.model = &ref.model;
      ctx.topology = &topo;
      ctx.snapshot = snapshot(topo, std::fmod(now, ref.sim.horizon_s));
      ctx.arrival_rate_rps = std::uniform_real_distribution<double>(0, 20)(rng);
      ctx.pin_input_trusted = rng() % 4 == 0;
      const CostModel cm(std::move(ctx));
      TriggerReport tr;
      tr.latency = rng() % 2;
      tr.utilization = rng() % 2;
      tr.bandwidth = rng() % 3 == 0;
      tr.privacy = rng() % 4 == 0;
      try {
        const auto plan = decide(st, cm, ref.weights, ref.solver, th, pol, tr, now);
        if (plan.kind == PlanKind::Keep) continue;
        st = apply_reconfiguration(st, plan, now);
        times.push_back(now);
      } catch (const Infeasible&) {
      }
    }
    direct_applied += static_cast<int>(times.size());
    for (std::size_t k = 1; k < times.size(); ++k)
      if (times[k] - times[k - 1] < th.t_cool_s) ++direct_violations;
    if (std::isinf(th.t_cool_s) && times.size() > 1) ++direct_violations;
  }
  const bool pass = violations == 0 && inf_over == 0 && direct_violations == 0 && multi > 0;
  return {pass, fmt::format("{} simulated storms ({} reconfigurations, {} runs with several), {} gap violations; "
                            "{} runs with t_cool=inf, {} with more than one; {} direct decisions applied, {} violations",
                            runs, applied, multi, violations, inf_runs, inf_over, direct_applied, direct_violations)};
}

json fuzz_document(std::mt19937_64& rng) {
  json doc = read_scenario_document(scenario_path(kShipped[rng() % kShipped.size()]));
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  doc["orchestrator"].erase("initial");
  doc["sim"]["horizon_s"] = u(60, 240);
  doc["workload"]["rate_rps"] = u(0.5, 15);
  doc["workload"]["privacy_high_prob"] = u(0, 0.5);
  doc["workload"].erase("rate_schedule");
  doc["thresholds"]["t_cool_s"] = u(1, 30);
  doc["thresholds"]["l_max_ms"] = u(30, 300);
  for (auto& b : doc["model"]["blocks"]) {
    if (rng() % 4 == 0) b["privacy_critical"] = true;
    b["work_gflop"] = b["work_gflop"].get<double>() * u(0.5, 2.0);
  }
  doc["model"]["blocks"][0]["privacy_critical"] = true;
  auto& nodes = doc["nodes"];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& n = nodes[i];
    n["speed_gflops"] = n["speed_gflops"].get<double>() * u(0.5, 2.0);
    if (i > 0) n["trusted"] = rng() % 4 == 0;
    if (rng() % 2) n["bg_util"] = {{"kind", "markov"}, {"states", {u(0, 0.3), u(0.3, 0.7), u(0.7, 0.95)}}, {"mean_dwell_s", u(5, 60)}};
  }
  for (auto& l : doc["links"])
    if (rng() % 2) l["bandwidth_mbps"] = {{"kind", "markov"}, {"states", {u(10, 60), u(60, 400), u(400, 2000)}}, {"mean_dwell_s", u(5, 60)}};
  return doc;
}

struct PrivacyTally {
  int runs = 0;
  std::uint64_t reported = 0;
  std::uint64_t logged = 0;
  std::uint64_t critical_computes = 0;
  std::size_t reconfigs = 0;
};

void privacy_run(const Scenario& s, RunOptions opt, PrivacyTally& tally) {
  opt.record_event_log = true;
  const auto res = run_scenario(s, opt);
  ++tally.runs;
  tally.reported += res.report.privacy_violations;
  tally.reconfigs += res.reconfigs.size();
  for (const auto& r : res.log) {
    if (r.kind != EventKind::ComputeDone || r.node < 0 || !r.critical) continue;
    ++tally.critical_computes;
    if (!r.trusted) ++tally.logged;
  }
}

Outcome privacy_safety() {
  PrivacyTally shipped, fuzzed;
  for (const auto& name : kShipped) {
    const Scenario s = load_named(name);
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
      for (Mode m : {Mode::Adaptive, Mode::Static}) {
        RunOptions opt;
        opt.seed = seed;
        opt.mode = m;
        privacy_run(s, opt, shipped);
      }
  }
  std::mt19937_64 rng(2024);
  int skipped = 0;
  while (fuzzed.runs < 100 && skipped < 1000) {
    const json doc = fuzz_document(rng);
    const auto l = parse_scenario(doc);
    if (!l.scenario) {
      ++skipped;
      continue;
    }
    RunOptions opt;
    opt.seed = rng() % 1000 + 1;
    try {
      privacy_run(*l.scenario, opt, fuzzed);
    } catch (const Infeasible&) {
      ++skipped;
    }
  }
  const bool pass = fuzzed.runs == 100 && shipped.reported + shipped.logged + fuzzed.reported + fuzzed.logged == 0;
  return {pass, fmt::format("shipped: {} runs, {} critical computes, {} violations; fuzzed: {} runs ({} skipped as "
                            "infeasible), {} reconfigurations, {} critical computes, {} violations",
                            shipped.runs, shipped.critical_computes, shipped.reported + shipped.logged, fuzzed.runs,
                            skipped, fuzzed.reconfigs, fuzzed.critical_computes, fuzzed.reported + fuzzed.logged)};
}

Outcome determinism() {
  int runs = 0, differing = 0;
  for (const auto& name : kShipped) {
    const Scenario s = load_named(name);
    for (Mode m : {Mode::Adaptive, Mode::Static})
      for (std::uint64_t seed : {1, 9}) {
        RunOptions opt;
        opt.seed = seed;
        opt.mode = m;
        opt.run_id = fmt::format("{}-{}", name, seed);
        opt.record_event_log = true;
        std::string csv[2], events[2];
        for (int rep = 0; rep < 2; ++rep) {
          Topology topo;
          const auto res = run_scenario(s, opt, &topo);
          std::ostringstream out;
          const std::vector<MetricsReport> reports{res.report};
          export_csv(reports, out);
          export_cdf_csv(latency_cdf(res.report.latency_samples_ms), out);
          csv[rep] = out.str();
          for (const auto& r : res.log) events[rep] += to_json_line(r, topo) + "\n";
        }
        ++runs;
        if (csv[0] != csv[1] || events[0] != events[1]) ++differing;
      }
  }
  return {differing == 0, fmt::format("{} repeated runs, {} with differing exports", runs, differing)};
}

Outcome decision_budget() {
  const Scenario s = load_named("reference_mec");
  const Topology topo = s.topology_for_seed(3);
  std::mt19937_64 rng(99);
  const auto splits = enumerate_splits(s.model, s.solver.max_k);
  std::vector<double> ms;
  int escalated = 0;
  while (ms.size() < 1000) {
    const double t = std::uniform_real_distribution<double>(0, s.sim.horizon_s)(rng);
    OrchestratorState st;
    st.scheme = splits[rng() % splits.size()];
    st.placement.assignment.assign(st.scheme.partition_count(), 0);
    for (std::size_t j = 1; j < st.placement.size(); ++j) st.placement.assignment[j] = rng() % topo.node_count();
    TriggerReport tr;
    tr.latency = rng() % 2;
    tr.utilization = rng() % 2;
    tr.bandwidth = rng() % 2;
    tr.privacy = rng() % 4 == 0;
    if (!tr.any()) tr.latency = true;
    const auto t0 = Clock::now();
    PlanningContext ctx;
    ctx.model = &s.model;
    ctx.topology = &topo;
    ctx.snapshot = snapshot(topo, t);
    ctx.arrival_rate_rps = s.workload.rate_at(t);
    ctx.pin_input_trusted = tr.privacy;
    const CostModel cm(std::move(ctx));
    try {
      const auto plan = decide(st, cm, s.weights, s.solver, s.thresholds, s.policy, tr, t);
      if (!plan.reasons.empty() && plan.reasons.front().rfind("migrate_rejected", 0) == 0) ++escalated;
    } catch (const Infeasible&) {
    }
    ms.push_back(seconds_since(t0) * 1000.0);
  }
  const double p99 = *percentile_nearest_rank(ms, 99);
  const double p50 = *percentile_nearest_rank(ms, 50);
  return {p99 < 10.0,
          fmt::format("1000 cycles ({} escalated to a joint solve): p50 {:.3f} ms, p99 {:.3f} ms", escalated, p50, p99)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},   {"chain search dominance", dp_dominance},
      {"no-contention latency", no_contention},     {"reference SLA and tail bands", reference_bands},
      {"saturated throughput", throughput_ordering}, {"trigger boundaries", trigger_boundaries},
      {"cool-down invariant", cooldown_invariant},   {"privacy safety", privacy_safety},
      {"determinism", determinism},                 {"decision-cycle budget", decision_budget},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass) ++failed;
    fmt::print("{} {:>2} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
