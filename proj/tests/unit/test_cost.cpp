#include <cmath>
#include <doctest.h>

#include "adaptsplit/cost.hpp"
#include "adaptsplit/errors.hpp"
#include "support/instances.hpp"

using namespace adaptsplit;

namespace {

// Three blocks (10, 80, 10 Gflop) with 2 MB activations; a device at
// 10 Gflop/s and an edge at 100 Gflop/s joined by a 100 Mbps, 5 ms link.
struct Reference {
  ModelSpec model;
  Topology topology;
  PlanningContext ctx;

  explicit Reference(double device_bg = 0.0, double device_speed = 10.0) {
    for (std::size_t i = 0; i < 3; ++i) {
      Block b;
      b.index = i;
      b.work_gflop = i == 1 ? 80 : 10;
      b.param_bytes = 1e9;
      b.activation_out_bytes = 2e6;
      model.blocks.push_back(b);
    }
    model.k_max = 3;
    NodeSpec device{"device", NodeKind::Edge, device_speed, 8e9, true, Trace::constant(device_bg)};
    NodeSpec edge{"edge", NodeKind::Edge, 100.0, 16e9, false, Trace::constant(0.0)};
    NodeSpec cloud{"cloud", NodeKind::Cloud, 1000.0, std::nullopt, false, Trace::constant(0.0)};
    topology = Topology({device, edge, cloud},
                        {{"device", "edge", Trace::constant(100), Trace::constant(5)},
                         {"edge", "cloud", Trace::constant(1000), Trace::constant(20)}},
                        "edge");
    ctx.model = &model;
    ctx.topology = &topology;
    ctx.snapshot = snapshot(topology, 0.0);
  }
};

const SplitScheme kThree(3, {1, 2});

}  // namespace

TEST_CASE("co-located latency is total work over speed") {
  Reference r;
  r.topology = Topology({NodeSpec{"solo", NodeKind::Edge, 100.0, std::nullopt, true, Trace::constant(0.0)}}, {});
  r.ctx.snapshot = snapshot(r.topology, 0.0);
  CHECK(latency_term(r.ctx, kThree, Placement{{0, 0, 0}}) == 1.0);
  CHECK(latency_term(r.ctx, SplitScheme::whole(3), Placement{{0}}) == 1.0);
}

TEST_CASE("device-edge-device pipeline latency") {
  Reference r;
  // 10/10 + 80/100 + 10/10 + 2 * (16 Mb / 100 Mbps + 5 ms); output stays on the device.
  const double oracle = 1.0 + 0.8 + 1.0 + 2.0 * (16e6 / 100e6 + 0.005);
  CHECK(oracle == doctest::Approx(3.13).epsilon(1e-12));
  CHECK(latency_term(r.ctx, kThree, Placement{{0, 1, 0}}) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("pure transfer latency") {
  ModelSpec m;
  m.blocks = {Block{0, 0.0, 0.0, 1e6, false, 0.0}, Block{1, 0.0, 0.0, 0.0, false, 0.0}};
  m.k_max = 2;
  Topology t({NodeSpec{"a", NodeKind::Edge, 1, std::nullopt, true, Trace::constant(0)},
              NodeSpec{"b", NodeKind::Edge, 1, std::nullopt, true, Trace::constant(0)}},
             {{"a", "b", Trace::constant(80), Trace::constant(0)}});
  PlanningContext ctx{&m, &t, snapshot(t, 0), 0.0};
  CHECK(latency_term(ctx, SplitScheme(2, {1}), Placement{{0, 1}}) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("utilization term") {
  Reference r;
  r.ctx.arrival_rate_rps = 0.0;
  CHECK(utilization_term(r.ctx, kThree, Placement{{1, 1, 1}}) == 0.0);

  Reference hot(0.8);
  hot.ctx.arrival_rate_rps = 0.01;
  CHECK(utilization_term(hot.ctx, SplitScheme::whole(3), Placement{{0}}) >= 0.8);

  // Two identical nodes: an even split keeps the maximum lower.
  ModelSpec m;
  m.blocks = {Block{0, 10, 0, 0, false, 0}, Block{1, 10, 0, 0, false, 0}};
  m.k_max = 2;
  Topology t({NodeSpec{"a", NodeKind::Edge, 100, std::nullopt, true, Trace::constant(0)},
              NodeSpec{"b", NodeKind::Edge, 100, std::nullopt, true, Trace::constant(0)}},
             {{"a", "b", Trace::constant(1000), Trace::constant(1)}});
  PlanningContext ctx{&m, &t, snapshot(t, 0), 2.0};
  const SplitScheme two(2, {1});
  CHECK(utilization_term(ctx, two, Placement{{0, 1}}) < utilization_term(ctx, two, Placement{{0, 0}}));
  CHECK(utilization_term(ctx, two, Placement{{0, 1}}) == doctest::Approx(0.2));
}

TEST_CASE("privacy term") {
  Reference r;
  auto model = r.model;
  model.blocks[1].sensitivity = 0.5;
  r.ctx.model = &model;
  CHECK(privacy_term(r.ctx, kThree, Placement{{0, 0, 0}}) == 0.0);
  CHECK(privacy_term(r.ctx, kThree, Placement{{0, 1, 0}}) == 0.5);

  model.blocks[1].privacy_critical = true;
  const auto b = total_cost(r.ctx, kThree, Placement{{0, 1, 0}}, CostWeights{1, 0, 1});
  CHECK(std::isinf(b.total));
  CHECK_FALSE(check_feasible(r.ctx, kThree, Placement{{0, 1, 0}}).feasible());

  r.ctx.privacy_mode = PrivacyMode::Soft;
  CHECK(std::isfinite(total_cost(r.ctx, kThree, Placement{{0, 1, 0}}, CostWeights{1, 0, 1}).total));
}

TEST_CASE("total cost composes the terms") {
  Reference r;
  const Placement p{{0, 1, 0}};
  CHECK(total_cost(r.ctx, kThree, p, CostWeights{1, 0, 0}).total == latency_term(r.ctx, kThree, p));
  CHECK(total_cost(r.ctx, kThree, p, CostWeights{0, 0, 0}).total == 0.0);

  // Device at 30% background load with its nominal speed raised so the
  // effective speed is still 10 Gflop/s; no arrivals, so U = 0.3.
  Reference loaded(0.3, 10.0 / 0.7);
  const auto b = total_cost(loaded.ctx, kThree, p, CostWeights{1, 0.5, 10});
  CHECK(b.util == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(b.privacy == 0.0);
  CHECK(b.total == doctest::Approx(3.13 + 0.5 * 0.3).epsilon(1e-12));
  CHECK(b.total == doctest::Approx(3.28).epsilon(1e-12));
}

TEST_CASE("feasibility checks") {
  ModelSpec m;
  m.blocks = {Block{0, 1, 14e9, 1e6, false, 0}};
  m.k_max = 1;
  Topology t({NodeSpec{"small", NodeKind::Edge, 10, 8e9, true, Trace::constant(0)},
              NodeSpec{"cloud", NodeKind::Cloud, 100, std::nullopt, false, Trace::constant(0)}},
             {{"small", "cloud", Trace::constant(100), Trace::constant(10)}});
  PlanningContext ctx{&m, &t, snapshot(t, 0), 0.0};
  const auto mem = check_feasible(ctx, SplitScheme::whole(1), Placement{{0}});
  REQUIRE(mem.violations.size() == 1);
  CHECK(mem.violations[0].kind == ViolationKind::Memory);
  CHECK(check_feasible(ctx, SplitScheme::whole(1), Placement{{1}}).feasible());

  Reference r;
  auto model = r.model;
  model.blocks[0].privacy_critical = true;
  model.blocks[0].sensitivity = 1.0;
  r.ctx.model = &model;
  const auto priv = check_feasible(r.ctx, kThree, Placement{{1, 1, 1}});
  REQUIRE_FALSE(priv.feasible());
  CHECK(priv.violations[0].kind == ViolationKind::Privacy);
  CHECK(check_feasible(r.ctx, kThree, Placement{{0, 1, 1}}).feasible());
  CHECK(check_feasible(r.ctx, kThree, Placement{{0, 1}}).violations[0].kind == ViolationKind::Assignment);
}

TEST_CASE("memory is aggregated per node across partitions") {
  ModelSpec m;
  m.blocks = {Block{0, 1, 5e9, 1e6, false, 0}, Block{1, 1, 1e9, 1e6, false, 0}, Block{2, 1, 5e9, 1e6, false, 0}};
  m.k_max = 3;
  Topology t({NodeSpec{"a", NodeKind::Edge, 10, 8e9, true, Trace::constant(0)},
              NodeSpec{"b", NodeKind::Edge, 10, 8e9, true, Trace::constant(0)}},
             {{"a", "b", Trace::constant(100), Trace::constant(1)}});
  PlanningContext ctx{&m, &t, snapshot(t, 0), 0.0};
  const SplitScheme s(3, {1, 2});
  CHECK_FALSE(check_feasible(ctx, s, Placement{{0, 1, 0}}).feasible());
  CHECK(check_feasible(ctx, s, Placement{{0, 1, 1}}).feasible());
}

TEST_CASE("pinned input must stay on a trusted node") {
  Reference r;
  r.ctx.pin_input_trusted = true;
  CHECK(std::isinf(total_cost(r.ctx, kThree, Placement{{1, 0, 0}}, CostWeights{}).total));
  CHECK(std::isfinite(total_cost(r.ctx, kThree, Placement{{0, 1, 1}}, CostWeights{}).total));
}

TEST_CASE("unroutable placements raise NoRoute") {
  ModelSpec m;
  m.blocks = {Block{0, 1, 0, 1e6, false, 0}, Block{1, 1, 0, 1e6, false, 0}};
  m.k_max = 2;
  Topology t({NodeSpec{"a", NodeKind::Edge, 10, std::nullopt, true, Trace::constant(0)},
              NodeSpec{"b", NodeKind::Edge, 10, std::nullopt, true, Trace::constant(0)}},
             {});
  PlanningContext ctx{&m, &t, snapshot(t, 0), 0.0};
  CHECK_THROWS_AS(latency_term(ctx, SplitScheme(2, {1}), Placement{{0, 1}}), NoRoute);
  CHECK_THROWS_AS(latency_term(ctx, SplitScheme(2, {1}), Placement{{0}}), PreconditionError);
  const CostModel cm(ctx);
  CHECK(std::isinf(cm.evaluate(SplitScheme(2, {1}), Placement{{0, 1}}, CostWeights{}).cost.total));
}

TEST_CASE("cost model agrees with plain pipeline arithmetic on random instances") {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const auto inst = testsupport::random_instance(seed);
    const auto ctx = testsupport::context_of(inst);
    const std::size_t B = inst.model.size();
    const std::size_t n = inst.topology->node_count();
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::size_t> cuts;
      for (std::size_t c = 1; c < B; ++c)
        if (rng() % 2) cuts.push_back(c);
      const SplitScheme scheme(B, cuts);
      Placement p;
      for (std::size_t j = 0; j < scheme.partition_count(); ++j) p.assignment.push_back(rng() % n);
      double lat;
      try {
        lat = latency_term(ctx, scheme, p);
      } catch (const NoRoute&) {
        continue;
      }
      CAPTURE(seed);
      CHECK(testsupport::relative_close(lat, testsupport::plain_latency(inst, scheme, p), 1e-12));
    }
  }
}

TEST_CASE("active links cover inter-partition and return routes") {
  Reference r;
  CHECK(active_links(r.topology, kThree, Placement{{0, 0, 0}}).empty());
  CHECK(active_links(r.topology, kThree, Placement{{0, 1, 0}}) == std::vector<std::size_t>{0});
  CHECK(active_links(r.topology, kThree, Placement{{0, 2, 2}}) == std::vector<std::size_t>{0, 1});
  auto model = r.model;
  model.blocks[2].privacy_critical = true;
  model.blocks[2].sensitivity = 1;
  CHECK(exposes_private_data(model, r.topology, kThree, Placement{{0, 0, 1}}));
  CHECK(exposes_private_data(model, r.topology, kThree, Placement{{1, 0, 0}}));
  CHECK_FALSE(exposes_private_data(model, r.topology, kThree, Placement{{0, 1, 0}}));
}
