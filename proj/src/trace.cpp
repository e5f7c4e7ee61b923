#include "adaptsplit/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <numbers>

#include "adaptsplit/errors.hpp"
#include "adaptsplit/rng.hpp"

namespace adaptsplit {

namespace {

double sample_piecewise(const Trace::Piecewise& p, double t) {
  if (p.points.empty()) return 0.0;
  auto it = std::upper_bound(p.points.begin(), p.points.end(), t,
                             [](double x, const std::pair<double, double>& pt) { return x < pt.first; });
  if (it == p.points.begin()) return p.points.front().second;
  return std::prev(it)->second;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Trace Trace::constant(double value) { return Trace(Constant{value}); }

Trace Trace::piecewise(std::vector<std::pair<double, double>> points) {
  return Trace(Piecewise{std::move(points)});
}

Trace Trace::sinusoid(double base, double amplitude, double period_s, double phase_s) {
  return Trace(Sinusoid{base, amplitude, period_s, phase_s});
}

Trace Trace::markov(Markov def, std::uint64_t seed, double horizon_s) {
  RealizedMarkov rm{def, {}};
  if (def.states.empty() || !(def.mean_dwell_s > 0)) return Trace(std::move(rm));
  RandomStream rng(seed);
  std::size_t state = std::min(def.initial_state, def.states.size() - 1);
  double t = 0.0;
  rm.path.points.emplace_back(0.0, def.states[state]);
  while (true) {
    t += rng.exponential(def.mean_dwell_s);
    if (t > horizon_s) break;
    if (def.states.size() > 1) {
      std::size_t next = static_cast<std::size_t>(rng.below(def.states.size() - 1));
      if (next >= state) ++next;
      state = next;
    }
    rm.path.points.emplace_back(t, def.states[state]);
  }
  return Trace(std::move(rm));
}

Trace::Kind Trace::kind() const {
  switch (def_.index()) {
    case 0: return Kind::Constant;
    case 1: return Kind::Piecewise;
    case 2: return Kind::Sinusoid;
    default: return Kind::Markov;
  }
}

double Trace::sample(double t) const {
  return std::visit(overloaded{
                        [](const Constant& c) { return c.value; },
                        [t](const Piecewise& p) { return sample_piecewise(p, t); },
                        [t](const Sinusoid& s) {
                          return s.base + s.amplitude * std::sin(2.0 * std::numbers::pi * (t + s.phase_s) / s.period_s);
                        },
                        [t](const RealizedMarkov& m) { return sample_piecewise(m.path, t); },
                    },
                    def_);
}

double Trace::min_value() const {
  return std::visit(overloaded{
                        [](const Constant& c) { return c.value; },
                        [](const Piecewise& p) {
                          double m = p.points.empty() ? 0.0 : p.points.front().second;
                          for (const auto& pt : p.points) m = std::min(m, pt.second);
                          return m;
                        },
                        [](const Sinusoid& s) { return s.base - std::abs(s.amplitude); },
                        [](const RealizedMarkov& m) {
                          return m.def.states.empty() ? 0.0 : *std::min_element(m.def.states.begin(), m.def.states.end());
                        },
                    },
                    def_);
}

double Trace::max_value() const {
  return std::visit(overloaded{
                        [](const Constant& c) { return c.value; },
                        [](const Piecewise& p) {
                          double m = p.points.empty() ? 0.0 : p.points.front().second;
                          for (const auto& pt : p.points) m = std::max(m, pt.second);
                          return m;
                        },
                        [](const Sinusoid& s) { return s.base + std::abs(s.amplitude); },
                        [](const RealizedMarkov& m) {
                          return m.def.states.empty() ? 0.0 : *std::max_element(m.def.states.begin(), m.def.states.end());
                        },
                    },
                    def_);
}

std::vector<double> Trace::breakpoints() const {
  std::vector<double> out;
  const Piecewise* p = nullptr;
  if (const auto* pw = std::get_if<Piecewise>(&def_)) p = pw;
  if (const auto* m = std::get_if<RealizedMarkov>(&def_)) p = &m->path;
  if (p) {
    for (std::size_t i = 1; i < p->points.size(); ++i) out.push_back(p->points[i].first);
  }
  return out;
}

std::vector<std::string> Trace::check() const {
  std::vector<std::string> v;
  std::visit(overloaded{
                 [&](const Constant& c) {
                   if (!std::isfinite(c.value)) v.push_back("non-finite constant");
                 },
                 [&](const Piecewise& p) {
                   if (p.points.empty()) v.push_back("piecewise trace without points");
                   for (std::size_t i = 1; i < p.points.size(); ++i)
                     if (!(p.points[i].first > p.points[i - 1].first))
                       v.push_back("piecewise breakpoints not strictly increasing");
                 },
                 [&](const Sinusoid& s) {
                   if (!(s.period_s > 0)) v.push_back("sinusoid period must be positive");
                 },
                 [&](const RealizedMarkov& m) {
                   if (m.def.states.empty()) v.push_back("markov trace without states");
                   if (!(m.def.mean_dwell_s > 0)) v.push_back("markov mean dwell must be positive");
                   if (m.def.initial_state >= m.def.states.size()) v.push_back("markov initial state out of range");
                 },
             },
             def_);
  return v;
}

}  // namespace adaptsplit
