#include <cmath>
#include <doctest.h>
#include <numbers>

#include "adaptsplit/errors.hpp"
#include "adaptsplit/rng.hpp"
#include "adaptsplit/topology.hpp"

using namespace adaptsplit;

namespace {

NodeSpec node(std::string id, double speed, Trace bg = Trace::constant(0.0), bool trusted = false) {
  NodeSpec n;
  n.id = std::move(id);
  n.speed_gflops = speed;
  n.bg_util = std::move(bg);
  n.trusted = trusted;
  return n;
}

LinkSpec link(std::string a, std::string b, Trace bw, Trace lat = Trace::constant(1.0)) {
  return {std::move(a), std::move(b), std::move(bw), std::move(lat)};
}

Topology star() {
  return Topology({node("device", 10), node("bs", 100), node("cloud", 1000)},
                  {link("device", "bs", Trace::constant(100)), link("bs", "cloud", Trace::constant(1000))}, "bs");
}

}  // namespace

TEST_CASE("constant traces give the same snapshot at any time") {
  const Topology t = star();
  CHECK(snapshot(t, 0.0).nodes == snapshot(t, 123.4).nodes);
  CHECK(snapshot(t, 7.0).links[0].bandwidth_mbps == 100.0);
}

TEST_CASE("piecewise bandwidth is a step function") {
  const Trace bw = Trace::piecewise({{0, 100}, {10, 40}});
  CHECK(bw.sample(12) == 40.0);
  CHECK(bw.sample(9.999) == 100.0);
  CHECK(bw.sample(10) == 40.0);
  CHECK(bw.sample(-1) == 100.0);
  CHECK(bw.breakpoints() == std::vector<double>{10});
}

TEST_CASE("sinusoid utilization") {
  const Trace u = Trace::sinusoid(0.5, 0.3, 60);
  CHECK(u.sample(15) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(u.sample(0) == doctest::Approx(0.5));
  CHECK(u.max_value() == doctest::Approx(0.8));
  CHECK(u.min_value() == doctest::Approx(0.2));
}

TEST_CASE("markov traces are reproducible per seed and move between states") {
  Trace::Markov def{{600, 200, 20}, 5.0, 0};
  const Trace a = Trace::markov(def, 42, 300);
  const Trace b = Trace::markov(def, 42, 300);
  const Trace c = Trace::markov(def, 43, 300);
  CHECK(a.breakpoints() == b.breakpoints());
  CHECK(a.breakpoints() != c.breakpoints());
  CHECK(a.sample(0) == 600.0);
  for (double t : a.breakpoints()) CHECK(a.sample(t) != a.sample(std::nextafter(t, 0.0)));
  CHECK(a.check().empty());
  CHECK_FALSE(Trace::markov({{}, 1.0, 0}, 1, 10).check().empty());
}

TEST_CASE("effective speed scales with background utilization") {
  CHECK(effective_speed(node("a", 280), 0) == 280.0);
  CHECK(effective_speed(node("a", 280, Trace::constant(0.9)), 0) == doctest::Approx(28.0).epsilon(1e-12));
  CHECK(effective_speed(node("a", 100, Trace::constant(0.5)), 0) == 50.0);
}

TEST_CASE("routing: co-located, direct and via hub") {
  const Topology t = star();
  CHECK(t.path(0, 0).empty());
  CHECK(t.path(0, 1) == std::vector<std::size_t>{0});
  CHECK(t.path(0, 2) == std::vector<std::size_t>{0, 1});
  CHECK(t.path(2, 0) == std::vector<std::size_t>{1, 0});
  CHECK(t.reachable(0, 2));
}

TEST_CASE("no route without a link or hub") {
  const Topology t({node("a", 1), node("b", 1), node("c", 1)}, {link("a", "b", Trace::constant(10))});
  CHECK_THROWS_AS(t.path(0, 2), NoRoute);
  CHECK_FALSE(t.reachable(0, 2));
}

TEST_CASE("structural errors are configuration errors") {
  CHECK_THROWS_AS(Topology({node("a", 1), node("a", 1)}, {}), ConfigError);
  CHECK_THROWS_AS(Topology({node("a", 1)}, {link("a", "z", Trace::constant(1))}), ConfigError);
  CHECK_THROWS_AS(Topology({node("a", 1)}, {link("a", "a", Trace::constant(1))}), ConfigError);
  CHECK_THROWS_AS(Topology({node("a", 1), node("b", 1)},
                           {link("a", "b", Trace::constant(1)), link("b", "a", Trace::constant(1))}),
                  ConfigError);
  CHECK_THROWS_AS(Topology({node("a", 1)}, {}, "hub"), ConfigError);
}

TEST_CASE("validate names the offending link or node") {
  const Topology t({node("a", 1), node("b", -2)}, {link("a", "b", Trace::constant(-5))});
  const auto v = t.validate();
  REQUIRE(v.size() >= 2);
  bool link_named = false, node_named = false;
  for (const auto& s : v) {
    link_named = link_named || s.find("a-b") != std::string::npos;
    node_named = node_named || s.find("node b") != std::string::npos;
  }
  CHECK(link_named);
  CHECK(node_named);
  CHECK(star().validate().empty());
}

TEST_CASE("transfer time is serialization plus propagation") {
  CHECK(transfer_seconds(2e6, 100, 5) == doctest::Approx(0.165).epsilon(1e-14));
  CHECK(serialization_seconds(1e9, 1000) == 8.0);
}

TEST_CASE("snapshot marks unconstrained memory as infinite") {
  Topology t({node("a", 1)}, {});
  CHECK(std::isinf(snapshot(t, 0).nodes[0].mem_free_bytes));
  NodeSpec n = node("b", 1);
  n.mem_bytes = 8e9;
  Topology t2({n}, {});
  CHECK(snapshot(t2, 0).nodes[0].mem_free_bytes == 8e9);
}

TEST_CASE("derived seeds separate concerns") {
  CHECK(derive_seed(1, "arrivals") != derive_seed(1, "privacy"));
  CHECK(derive_seed(1, "arrivals") == derive_seed(1, "arrivals"));
  RandomStream r(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = r.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    CHECK(r.below(3) < 3);
  }
}
