#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace adaptsplit {

/// A time-varying scalar (utilization, bandwidth, latency). Sampling is a pure
/// function of the definition, the seed it was built with and t.
class Trace {
 public:
  struct Constant {
    double value = 0.0;
  };
  /// Step function: the value of the last breakpoint at or before t; the first
  /// value before the first breakpoint.
  struct Piecewise {
    std::vector<std::pair<double, double>> points;
  };
  struct Sinusoid {
    double base = 0.0;
    double amplitude = 0.0;
    double period_s = 1.0;
    double phase_s = 0.0;
  };
  /// Continuous-time chain: exponential dwell with the given mean, then a jump
  /// to a uniformly chosen different state.
  struct Markov {
    std::vector<double> states;
    double mean_dwell_s = 1.0;
    std::size_t initial_state = 0;
  };

  enum class Kind { Constant, Piecewise, Sinusoid, Markov };

  Trace() : def_(Constant{}) {}
  static Trace constant(double value);
  static Trace piecewise(std::vector<std::pair<double, double>> points);
  static Trace sinusoid(double base, double amplitude, double period_s, double phase_s = 0.0);
  /// Realizes the chain over [0, horizon_s]; beyond it the last state holds.
  static Trace markov(Markov def, std::uint64_t seed, double horizon_s);

  Kind kind() const;
  double sample(double t) const;

  double min_value() const;
  double max_value() const;

  /// Times at which a step change takes effect (piecewise and markov only).
  std::vector<double> breakpoints() const;

  /// Empty when the definition is well formed.
  std::vector<std::string> check() const;

 private:
  struct RealizedMarkov {
    Markov def;
    Piecewise path;
  };
  using Def = std::variant<Constant, Piecewise, Sinusoid, RealizedMarkov>;
  explicit Trace(Def def) : def_(std::move(def)) {}

  Def def_;
};

}  // namespace adaptsplit
