#include "adaptsplit/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <map>
#include <queue>

#include "adaptsplit/errors.hpp"

namespace adaptsplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return b > kSaturated - a ? kSaturated : a + b; }

std::size_t effective_max_k(const CostModel& model, const SolverConfig& config) {
  return std::max<std::size_t>(1, std::min({config.max_k, model.model().k_max, model.block_count()}));
}

// Enumerates all placements of `scheme` in lexicographic node order, keeping
// the first strictly cheapest. Returns false when none is feasible.
bool enumerate_placements(const CostModel& model, const SplitScheme& scheme, const CostWeights& weights,
                          CostModel::Scratch& scratch, Solution& best, std::uint64_t& evaluated) {
  const std::size_t k = scheme.partition_count();
  const std::size_t n = model.node_count();
  Placement p{std::vector<std::size_t>(k, 0)};
  bool found = false;
  while (true) {
    const auto ev = model.evaluate(scheme, p, weights, scratch);
    ++evaluated;
    if (ev.cost.total < best.cost.total) {
      best.scheme = scheme;
      best.placement = p;
      best.cost = ev.cost;
      found = true;
    }
    std::size_t d = k;
    while (d > 0) {
      --d;
      if (++p.assignment[d] < n) break;
      p.assignment[d] = 0;
      if (d == 0) return found;
    }
  }
}

Solution empty_solution() {
  Solution s;
  s.cost.total = kInf;
  return s;
}

}  // namespace

const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Exact:
      return "exact";
    case SolveMethod::DpHeuristic:
      return "dp_heuristic";
    case SolveMethod::MigrateOnly:
      return "migrate_only";
  }
  return "unknown";
}

double Solution::migration_bytes() const {
  double total = 0.0;
  for (const Move& m : moves) total += m.bytes;
  return total;
}

std::uint64_t placement_count(std::size_t nodes, std::size_t k) {
  std::uint64_t c = 1;
  for (std::size_t i = 0; i < k; ++i) c = sat_mul(c, nodes);
  return c;
}

std::uint64_t joint_candidate_count(std::size_t blocks, std::size_t nodes, std::size_t max_k) {
  if (blocks == 0) return 0;
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(blocks-1, k-1)
  for (std::size_t k = 1; k <= std::min(max_k, blocks); ++k) {
    if (k > 1) {
      // C(m, k-1) = C(m, k-2) * (m - k + 2) / (k - 1), exact in 128 bits.
      const unsigned __int128 next = static_cast<unsigned __int128>(binom) * (blocks - k + 1) / (k - 1);
      binom = next > kSaturated ? kSaturated : static_cast<std::uint64_t>(next);
    }
    total = sat_add(total, sat_mul(binom, placement_count(nodes, k)));
  }
  return total;
}

Solution solve_placement(const CostModel& model, const SplitScheme& scheme, const CostWeights& weights,
                         const SolverConfig& config) {
  if (scheme.num_blocks() != model.block_count()) throw PreconditionError("scheme does not match model");
  const std::uint64_t count = placement_count(model.node_count(), scheme.partition_count());
  if (count > config.enumeration_budget)
    throw BudgetExceeded(fmt::format("{} placements exceed the enumeration budget of {}", count,
                                     config.enumeration_budget));
  Solution best = empty_solution();
  best.method = SolveMethod::Exact;
  CostModel::Scratch scratch;
  if (!enumerate_placements(model, scheme, weights, scratch, best, best.evaluated_count))
    throw Infeasible("no placement satisfies the memory and privacy constraints");
  return best;
}

Solution solve_joint(const CostModel& model, const CostWeights& weights, const SolverConfig& config) {
  const std::size_t max_k = effective_max_k(model, config);
  if (joint_candidate_count(model.block_count(), model.node_count(), max_k) > config.enumeration_budget)
    return dp_chain_solver(model, weights, config);
  Solution best = empty_solution();
  best.method = SolveMethod::Exact;
  CostModel::Scratch scratch;
  bool found = false;
  for (const SplitScheme& scheme : enumerate_splits(model.model(), max_k))
    found = enumerate_placements(model, scheme, weights, scratch, best, best.evaluated_count) || found;
  if (!found) throw Infeasible("no split and placement satisfies the memory and privacy constraints");
  return best;
}

namespace {

// Exact cost-to-go of the chain search with memory constraints relaxed.
// Index: ((s * (B+1) + b) * n + i) * (K+1) + c.
class ChainHeuristic {
 public:
  ChainHeuristic(std::size_t blocks, std::size_t nodes, std::size_t max_k)
      : blocks_(blocks), nodes_(nodes), max_k_(max_k), h_((blocks + 1) * nodes * nodes * (max_k + 1), kInf) {}

  double& at(std::size_t s, std::size_t b, std::size_t i, std::size_t c) {
    return h_[((s * (blocks_ + 1) + b) * nodes_ + i) * (max_k_ + 1) + c];
  }

 private:
  std::size_t blocks_, nodes_, max_k_;
  std::vector<double> h_;
};

struct SearchEntry {
  double g = 0.0;
  std::size_t boundary = 0;  // blocks [0, boundary) are placed
  std::size_t node = 0;      // host of the last segment
  std::size_t segments = 0;
  std::size_t start = 0;  // host of the first segment
  std::size_t parent = 0;
  std::size_t mem_offset = 0;  // into the memory arena, node_count() values
};

struct QueueItem {
  double f;
  std::uint64_t seq;
  std::size_t entry;
  bool operator>(const QueueItem& o) const { return f != o.f ? f > o.f : seq > o.seq; }
};

}  // namespace

Solution dp_chain_solver(const CostModel& model, const CostWeights& weights, const SolverConfig& config,
                         const SplitScheme* fixed) {
  const std::size_t B = model.block_count();
  const std::size_t n = model.node_count();
  if (fixed && fixed->num_blocks() != B) throw PreconditionError("scheme does not match model");
  const std::size_t K = fixed ? fixed->partition_count() : effective_max_k(model, config);
  const double a = weights.alpha, be = weights.beta, ga = weights.gamma;
  const double rate = model.arrival_rate();

  // Allowed segment ends from each boundary.
  std::vector<std::vector<std::size_t>> ends(B + 1);
  if (fixed) {
    std::vector<std::size_t> bounds{0};
    for (std::size_t c : fixed->cut_points()) bounds.push_back(c);
    bounds.push_back(B);
    for (std::size_t t = 0; t + 1 < bounds.size(); ++t) ends[bounds[t]].push_back(bounds[t + 1]);
  } else {
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t e = b + 1; e <= B; ++e) ends[b].push_back(e);
  }

  auto segment_cost = [&](std::size_t b, std::size_t e, std::size_t j) {
    if (!model.privacy_allows(b, e, j)) return kInf;
    if (!(model.range_params(b, e) <= model.mem_free(j))) return kInf;
    const double util = model.range_work(b, e) * rate / model.effective_speed(j);
    const double priv = model.trusted(j) ? 0.0 : model.range_max_sensitivity(b, e);
    return a * model.compute_seconds(b, e, j) + be * util + ga * priv;
  };
  auto hop_allowed = [&](std::size_t i, std::size_t j) { return fixed != nullptr || i != j; };

  ChainHeuristic H(B, n, K);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 1; c <= K; ++c) H.at(s, B, i, c) = a * model.return_transfer(i, s);
    for (std::size_t b = B; b-- > 1;)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 1; c < K; ++c) {
          double best = kInf;
          for (std::size_t e : ends[b])
            for (std::size_t j = 0; j < n; ++j) {
              if (!hop_allowed(i, j)) continue;
              const double rest = H.at(s, e, j, c + 1);
              if (!std::isfinite(rest)) continue;
              const double v = a * model.boundary_transfer(b, i, j) + segment_cost(b, e, j) + rest;
              best = std::min(best, v);
            }
          H.at(s, b, i, c) = best;
        }
  }

  std::vector<SearchEntry> entries;
  std::vector<double> arena;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> open;
  std::uint64_t seq = 0;
  // Popped memory vectors per (start, boundary, node, segments), for dominance.
  std::map<std::array<std::size_t, 4>, std::vector<std::size_t>> closed;

  auto push = [&](SearchEntry e, double h) {
    const double f = e.g + h;
    if (!std::isfinite(f)) return;
    entries.push_back(e);
    open.push({f, seq++, entries.size() - 1});
  };

  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t e : ends[0]) {
      double g = segment_cost(0, e, s);
      double h = H.at(s, e, s, 1);
      if (e == B) {
        g += a * model.return_transfer(s, s);
        h = 0.0;
      }
      if (!std::isfinite(g) || !std::isfinite(h)) continue;
      const std::size_t off = arena.size();
      arena.resize(off + n, 0.0);
      arena[off + s] = model.range_params(0, e);
      push({g, e, s, 1, s, 0, off}, h);
    }

  std::uint64_t expansions = 0;
  std::size_t goal = entries.size();
  bool found = false;
  while (!open.empty()) {
    const QueueItem item = open.top();
    open.pop();
    const SearchEntry cur = entries[item.entry];
    if (cur.boundary == B) {
      goal = item.entry;
      found = true;
      break;
    }
    auto& seen = closed[{cur.start, cur.boundary, cur.node, cur.segments}];
    const bool dominated = std::any_of(seen.begin(), seen.end(), [&](std::size_t off) {
      for (std::size_t i = 0; i < n; ++i)
        if (arena[off + i] > arena[cur.mem_offset + i]) return false;
      return true;
    });
    if (dominated) continue;
    seen.push_back(cur.mem_offset);
    if (++expansions > config.search_limit)
      throw Infeasible(fmt::format("chain search stopped after {} expansions", config.search_limit));
    if (cur.segments >= K) continue;
    for (std::size_t e : ends[cur.boundary])
      for (std::size_t j = 0; j < n; ++j) {
        if (!hop_allowed(cur.node, j)) continue;
        const double seg = segment_cost(cur.boundary, e, j);
        if (!std::isfinite(seg)) continue;
        const double mem = arena[cur.mem_offset + j] + model.range_params(cur.boundary, e);
        if (!(mem <= model.mem_free(j))) continue;
        double h;
        double g = cur.g + a * model.boundary_transfer(cur.boundary, cur.node, j) + seg;
        if (e == B) {
          g += a * model.return_transfer(j, cur.start);
          h = 0.0;
        } else {
          h = H.at(cur.start, e, j, cur.segments + 1);
        }
        if (!std::isfinite(g + h)) continue;
        const std::size_t off = arena.size();
        arena.insert(arena.end(), arena.begin() + static_cast<std::ptrdiff_t>(cur.mem_offset),
                     arena.begin() + static_cast<std::ptrdiff_t>(cur.mem_offset + n));
        arena[off + j] = mem;
        push({g, e, j, cur.segments + 1, cur.start, item.entry, off}, h);
      }
  }
  if (!found) throw Infeasible("no split and placement satisfies the memory and privacy constraints");

  std::vector<std::size_t> chain;
  for (std::size_t idx = goal;; idx = entries[idx].parent) {
    chain.push_back(idx);
    if (entries[idx].segments == 1) break;
  }
  std::reverse(chain.begin(), chain.end());
  std::vector<std::size_t> cuts;
  Placement placement;
  for (std::size_t t = 0; t < chain.size(); ++t) {
    placement.assignment.push_back(entries[chain[t]].node);
    if (t + 1 < chain.size()) cuts.push_back(entries[chain[t]].boundary);
  }
  Solution sol;
  sol.scheme = SplitScheme(B, cuts);
  sol.placement = std::move(placement);
  sol.method = SolveMethod::DpHeuristic;
  sol.evaluated_count = expansions;
  const auto ev = model.evaluate(sol.scheme, sol.placement, weights);
  if (!ev.feasible || !ev.routable) throw Infeasible("chain search produced an infeasible deployment");
  sol.cost = ev.cost;
  return sol;
}

Solution migrate_only(const CostModel& model, const SplitScheme& scheme, const Placement& current,
                      const CostWeights& weights, const SolverConfig& config) {
  if (scheme.num_blocks() != model.block_count()) throw PreconditionError("scheme does not match model");
  Solution cur;
  cur.scheme = scheme;
  cur.placement = current;
  cur.method = SolveMethod::MigrateOnly;
  cur.cost = model.evaluate(scheme, current, weights).cost;

  Solution best;
  bool have_best = false;
  try {
    if (placement_count(model.node_count(), scheme.partition_count()) <= config.enumeration_budget)
      best = solve_placement(model, scheme, weights, config);
    else
      best = dp_chain_solver(model, weights, config, &scheme);
    have_best = true;
  } catch (const Infeasible&) {
    if (!std::isfinite(cur.cost.total)) throw;
  }
  if (!have_best || !(best.cost.total < cur.cost.total)) {
    cur.evaluated_count = have_best ? best.evaluated_count : 0;
    return cur;
  }
  best.method = SolveMethod::MigrateOnly;
  best.moves = compute_moves(model.model(), scheme, current, scheme, best.placement);
  return best;
}

std::vector<Move> compute_moves(const ModelSpec& model, const SplitScheme& old_scheme, const Placement& old_placement,
                                const SplitScheme& new_scheme, const Placement& new_placement) {
  if (old_scheme.num_blocks() != model.size() || new_scheme.num_blocks() != model.size())
    throw PreconditionError("scheme does not match model");
  if (old_placement.size() != old_scheme.partition_count() || new_placement.size() != new_scheme.partition_count())
    throw PreconditionError("placement does not match scheme");
  std::vector<Move> moves;
  for (std::size_t j = 0; j < new_scheme.partition_count(); ++j) {
    const BlockRange r = new_scheme.partition(j);
    const std::size_t to = new_placement.assignment[j];
    std::map<std::size_t, double> by_source;
    for (std::size_t blk = r.begin; blk < r.end; ++blk) {
      const std::size_t from = old_placement.assignment[old_scheme.partition_of_block(blk)];
      if (from != to) by_source[from] += model.blocks[blk].param_bytes;
    }
    for (const auto& [from, bytes] : by_source) moves.push_back({j, from, to, bytes});
  }
  return moves;
}

}  // namespace adaptsplit
