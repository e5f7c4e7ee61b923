#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace adaptsplit {

struct RequestSpec {
  std::uint64_t id = 0;
  double arrival_time = 0.0;
  double work_multiplier = 1.0;  // scales every block's work for this request
  bool privacy_high = false;
  double sla_budget_ms = 400.0;
};

struct RateStep {
  double t = 0.0;
  double rate_rps = 0.0;
};

struct WorkloadSpec {
  enum class Kind { Poisson, Trace };

  Kind kind = Kind::Poisson;
  double rate_rps = 1.0;
  /// Optional piecewise-constant rate over time; overrides rate_rps from each
  /// step's start.
  std::vector<RateStep> rate_schedule;
  std::vector<double> arrivals;  // Kind::Trace
  double duration_s = 0.0;       // 0 = until the horizon
  double privacy_high_prob = 0.0;
  double sla_budget_ms = 400.0;
  double work_multiplier = 1.0;
  /// Uniform relative jitter on work_multiplier, in [0, 1).
  double work_jitter = 0.0;

  double rate_at(double t) const;
  double mean_rate(double horizon_s) const;
  std::vector<std::string> validate() const;
};

/// Arrivals, privacy tags and work multipliers draw from separate streams
/// derived from `seed`. Only arrivals before min(duration, horizon) are kept.
std::vector<RequestSpec> generate_requests(const WorkloadSpec& spec, std::uint64_t seed, double horizon_s);

}  // namespace adaptsplit
