#include "adaptsplit/cost.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>

#include "adaptsplit/errors.hpp"
#include "adaptsplit/kernels.hpp"

namespace adaptsplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool assignment_valid(const SplitScheme& scheme, const Placement& placement, std::size_t nodes) {
  if (placement.size() != scheme.partition_count()) return false;
  return std::all_of(placement.assignment.begin(), placement.assignment.end(),
                     [nodes](std::size_t n) { return n < nodes; });
}

}  // namespace

CostModel::CostModel(PlanningContext ctx) : ctx_(std::move(ctx)) {
  if (!ctx_.model || !ctx_.topology) throw PreconditionError("planning context without model or topology");
  const ModelSpec& model = *ctx_.model;
  const Topology& topo = *ctx_.topology;
  nodes_ = topo.node_count();
  blocks_ = model.size();
  if (ctx_.snapshot.nodes.size() != nodes_ || ctx_.snapshot.links.size() != topo.link_count())
    throw PreconditionError("snapshot does not match topology");

  const std::size_t stride = blocks_ + 1;
  work_.assign(stride * stride, 0.0);
  params_.assign(stride * stride, 0.0);
  sens_.assign(stride * stride, 0.0);
  critical_.assign(stride * stride, 0);
  for (std::size_t a = 0; a < blocks_; ++a) {
    double w = 0.0, p = 0.0, s = 0.0;
    bool c = false;
    for (std::size_t b = a + 1; b <= blocks_; ++b) {
      const Block& blk = model.blocks[b - 1];
      w += blk.work_gflop;
      p += blk.param_bytes;
      s = std::max(s, blk.sensitivity);
      c = c || blk.privacy_critical;
      const std::size_t idx = range_index(a, b);
      work_[idx] = w;
      params_[idx] = p;
      sens_[idx] = s;
      critical_[idx] = c ? 1 : 0;
    }
  }

  eff_.resize(nodes_);
  bg_.resize(nodes_);
  trusted_.resize(nodes_);
  for (std::size_t i = 0; i < nodes_; ++i) {
    eff_[i] = ctx_.snapshot.nodes[i].effective_speed_gflops;
    bg_[i] = ctx_.snapshot.nodes[i].util;
    trusted_[i] = topo.node(i).trusted ? 1 : 0;
  }

  compute_.assign(stride * stride * nodes_, 0.0);
  for (std::size_t a = 0; a < blocks_; ++a)
    for (std::size_t b = a + 1; b <= blocks_; ++b)
      kernels::div_scalar_by(work_[range_index(a, b)], eff_,
                             std::span<double>(compute_.data() + range_index(a, b) * nodes_, nodes_));

  // Per-link hop times for each activation size, then summed along routes.
  const std::size_t links = topo.link_count();
  std::vector<double> bw(links), lat(links), hop(links);
  for (std::size_t l = 0; l < links; ++l) {
    bw[l] = ctx_.snapshot.links[l].bandwidth_mbps;
    lat[l] = ctx_.snapshot.links[l].latency_ms;
  }
  std::vector<std::vector<std::size_t>> routes(nodes_ * nodes_);
  std::vector<char> routable(nodes_ * nodes_, 0);
  for (std::size_t i = 0; i < nodes_; ++i)
    for (std::size_t j = 0; j < nodes_; ++j)
      if (topo.reachable(i, j)) {
        routes[i * nodes_ + j] = topo.path(i, j);
        routable[i * nodes_ + j] = 1;
      }
  auto fill_pairs = [&](double bytes, double* out) {
    kernels::link_times(bytes * 8.0, bw, lat, hop);
    for (std::size_t i = 0; i < nodes_; ++i)
      for (std::size_t j = 0; j < nodes_; ++j) {
        const std::size_t pj = i * nodes_ + j;
        if (!routable[pj]) {
          out[pj] = kInf;
          continue;
        }
        double t = 0.0;
        for (std::size_t l : routes[pj]) t += hop[l];
        out[pj] = t;
      }
  };
  transfer_.assign(blocks_ > 1 ? (blocks_ - 1) * nodes_ * nodes_ : 0, 0.0);
  for (std::size_t b = 1; b < blocks_; ++b)
    fill_pairs(model.blocks[b - 1].activation_out_bytes, transfer_.data() + (b - 1) * nodes_ * nodes_);
  return_.assign(nodes_ * nodes_, 0.0);
  fill_pairs(model.final_output_bytes(), return_.data());
}

bool CostModel::privacy_allows(std::size_t a, std::size_t b, std::size_t node) const {
  if (trusted(node)) return true;
  if (ctx_.pin_input_trusted && a == 0) return false;
  return !(ctx_.privacy_mode == PrivacyMode::Hard && range_critical(a, b));
}

CostModel::Evaluation CostModel::evaluate(const SplitScheme& scheme, const Placement& placement, const CostWeights& w,
                                          Scratch& scratch) const {
  if (scheme.num_blocks() != blocks_) throw PreconditionError("scheme does not match model");
  Evaluation ev;
  if (!assignment_valid(scheme, placement, nodes_)) {
    ev.cost = {kInf, kInf, kInf, kInf};
    return ev;
  }
  const auto& a = placement.assignment;
  const auto cuts = scheme.cut_points();
  const std::size_t k = a.size();

  scratch.load.assign(nodes_, 0.0);
  scratch.mem.assign(nodes_, 0.0);
  scratch.util.resize(nodes_);
  scratch.hosted.assign(nodes_, 0);

  // Compute over maximal runs of co-located partitions.
  double latency = 0.0;
  std::size_t run_begin = 0;  // first block of the current run
  for (std::size_t j = 1; j <= k; ++j) {
    if (j < k && a[j] == a[j - 1]) continue;
    const std::size_t run_end = j < k ? cuts[j - 1] : blocks_;
    const std::size_t node = a[j - 1];
    latency += compute_seconds(run_begin, run_end, node);
    scratch.load[node] += range_work(run_begin, run_end);
    scratch.mem[node] += range_params(run_begin, run_end);
    scratch.hosted[node] = 1;
    run_begin = run_end;
  }
  bool routable = true;
  for (std::size_t j = 1; j < k; ++j) {
    if (a[j] == a[j - 1]) continue;
    const double t = boundary_transfer(cuts[j - 1], a[j - 1], a[j]);
    routable = routable && std::isfinite(t);
    latency += t;
  }
  const double ret = return_transfer(a[k - 1], a[0]);
  routable = routable && std::isfinite(ret);
  latency += ret;

  kernels::projected_util(bg_, scratch.load, eff_, ctx_.arrival_rate_rps, scratch.util);
  double util = 0.0;
  for (std::size_t i = 0; i < nodes_; ++i)
    if (scratch.hosted[i]) util = std::max(util, scratch.util[i]);

  double privacy = 0.0;
  bool feasible = true;
  for (std::size_t j = 0; j < k; ++j) {
    const BlockRange r = scheme.partition(j);
    if (!trusted(a[j])) privacy += range_max_sensitivity(r.begin, r.end);
    feasible = feasible && privacy_allows(r.begin, r.end, a[j]);
  }
  for (std::size_t i = 0; i < nodes_; ++i)
    if (scratch.hosted[i] && !(scratch.mem[i] <= mem_free(i))) feasible = false;

  ev.feasible = feasible;
  ev.routable = routable;
  ev.cost.latency_s = latency;
  ev.cost.util = util;
  ev.cost.privacy = privacy;
  ev.cost.total = feasible && routable ? w.alpha * latency + w.beta * util + w.gamma * privacy : kInf;
  return ev;
}

CostModel::Evaluation CostModel::evaluate(const SplitScheme& scheme, const Placement& placement,
                                          const CostWeights& w) const {
  Scratch scratch;
  return evaluate(scheme, placement, w, scratch);
}

namespace {

void require_assignment(const SplitScheme& scheme, const Placement& placement, std::size_t nodes) {
  if (!assignment_valid(scheme, placement, nodes))
    throw PreconditionError("placement is not a total assignment over the scheme's partitions");
}

}  // namespace

double CostModel::latency(const SplitScheme& scheme, const Placement& placement) const {
  require_assignment(scheme, placement, nodes_);
  const auto ev = evaluate(scheme, placement, CostWeights{});
  if (!ev.routable) throw NoRoute("placement routes between unconnected nodes");
  return ev.cost.latency_s;
}

double CostModel::utilization(const SplitScheme& scheme, const Placement& placement) const {
  require_assignment(scheme, placement, nodes_);
  return evaluate(scheme, placement, CostWeights{}).cost.util;
}

double CostModel::privacy(const SplitScheme& scheme, const Placement& placement) const {
  require_assignment(scheme, placement, nodes_);
  return evaluate(scheme, placement, CostWeights{}).cost.privacy;
}

CostBreakdown CostModel::total(const SplitScheme& scheme, const Placement& placement, const CostWeights& w) const {
  require_assignment(scheme, placement, nodes_);
  const auto ev = evaluate(scheme, placement, w);
  if (!ev.routable) throw NoRoute("placement routes between unconnected nodes");
  return ev.cost;
}

FeasibilityReport CostModel::check_feasible(const SplitScheme& scheme, const Placement& placement) const {
  FeasibilityReport report;
  const Topology& topo = topology();
  if (placement.size() != scheme.partition_count()) {
    report.violations.push_back({ViolationKind::Assignment,
                                 fmt::format("{} partitions but {} assignments", scheme.partition_count(),
                                             placement.size())});
    return report;
  }
  for (std::size_t j = 0; j < placement.size(); ++j)
    if (placement.assignment[j] >= nodes_) {
      report.violations.push_back(
          {ViolationKind::Assignment, fmt::format("partition {} assigned to unknown node {}", j, placement.assignment[j])});
      return report;
    }
  std::vector<double> mem(nodes_, 0.0);
  std::vector<char> hosted(nodes_, 0);
  for (std::size_t j = 0; j < placement.size(); ++j) {
    const BlockRange r = scheme.partition(j);
    const std::size_t node = placement.assignment[j];
    mem[node] += range_params(r.begin, r.end);
    hosted[node] = 1;
    if (!trusted(node)) {
      if (ctx_.privacy_mode == PrivacyMode::Hard && range_critical(r.begin, r.end))
        report.violations.push_back(
            {ViolationKind::Privacy,
             fmt::format("privacy-critical partition {} on untrusted node {}", j, topo.node(node).id)});
      else if (ctx_.pin_input_trusted && r.begin == 0)
        report.violations.push_back(
            {ViolationKind::Privacy, fmt::format("input partition on untrusted node {}", topo.node(node).id)});
    }
  }
  for (std::size_t i = 0; i < nodes_; ++i)
    if (hosted[i] && !(mem[i] <= mem_free(i)))
      report.violations.push_back({ViolationKind::Memory, fmt::format("node {}: {} bytes assigned, {} free",
                                                                      topo.node(i).id, mem[i], mem_free(i))});
  return report;
}

double latency_term(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement) {
  return CostModel(ctx).latency(scheme, placement);
}

double utilization_term(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement) {
  return CostModel(ctx).utilization(scheme, placement);
}

double privacy_term(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement) {
  return CostModel(ctx).privacy(scheme, placement);
}

CostBreakdown total_cost(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement,
                         const CostWeights& weights) {
  return CostModel(ctx).total(scheme, placement, weights);
}

FeasibilityReport check_feasible(const PlanningContext& ctx, const SplitScheme& scheme, const Placement& placement) {
  return CostModel(ctx).check_feasible(scheme, placement);
}

std::vector<std::size_t> active_links(const Topology& topology, const SplitScheme& scheme,
                                      const Placement& placement) {
  std::vector<std::size_t> out;
  const auto& a = placement.assignment;
  if (a.empty()) return out;
  for (std::size_t j = 1; j < a.size(); ++j) {
    if (a[j] == a[j - 1]) continue;
    for (std::size_t l : topology.path(a[j - 1], a[j])) out.push_back(l);
  }
  for (std::size_t l : topology.path(a.back(), a.front())) out.push_back(l);
  (void)scheme;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool exposes_private_data(const ModelSpec& model, const Topology& topology, const SplitScheme& scheme,
                          const Placement& placement) {
  for (std::size_t j = 0; j < placement.size(); ++j) {
    if (topology.node(placement.assignment[j]).trusted) continue;
    if (j == 0) return true;
    if (partition_stats(model, scheme, j).privacy_critical) return true;
  }
  return false;
}

}  // namespace adaptsplit
