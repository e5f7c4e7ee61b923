#include "adaptsplit/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>

#include "adaptsplit/rng.hpp"

namespace adaptsplit {

double WorkloadSpec::rate_at(double t) const {
  double rate = rate_rps;
  for (const RateStep& s : rate_schedule) {
    if (s.t > t) break;
    rate = s.rate_rps;
  }
  return rate;
}

double WorkloadSpec::mean_rate(double horizon_s) const {
  const double end = duration_s > 0.0 ? std::min(duration_s, horizon_s) : horizon_s;
  if (!(end > 0.0)) return rate_at(0.0);
  if (kind == Kind::Trace) {
    const auto n = std::count_if(arrivals.begin(), arrivals.end(), [end](double a) { return a < end; });
    return static_cast<double>(n) / end;
  }
  double area = 0.0;
  double t = 0.0;
  for (const RateStep& s : rate_schedule) {
    if (s.t >= end) break;
    if (s.t > t) {
      area += rate_at(t) * (s.t - t);
      t = s.t;
    }
  }
  area += rate_at(t) * (end - t);
  return area / end;
}

std::vector<std::string> WorkloadSpec::validate() const {
  std::vector<std::string> out;
  if (!(rate_rps >= 0.0) || !std::isfinite(rate_rps)) out.push_back("workload.rate_rps must be a finite value >= 0");
  double prev = -std::numeric_limits<double>::infinity();
  for (const RateStep& s : rate_schedule) {
    if (!(s.t >= 0.0) || !(s.t > prev)) out.push_back("workload.rate_schedule times must be increasing and >= 0");
    if (!(s.rate_rps >= 0.0) || !std::isfinite(s.rate_rps))
      out.push_back(fmt::format("workload.rate_schedule rate at t={} must be a finite value >= 0", s.t));
    prev = s.t;
  }
  if (kind == Kind::Trace) {
    if (!std::is_sorted(arrivals.begin(), arrivals.end())) out.push_back("workload.arrivals must be sorted");
    if (!arrivals.empty() && !(arrivals.front() >= 0.0)) out.push_back("workload.arrivals must be >= 0");
  }
  if (!(duration_s >= 0.0)) out.push_back("workload.duration_s must be >= 0");
  if (!(privacy_high_prob >= 0.0 && privacy_high_prob <= 1.0))
    out.push_back("workload.privacy_high_prob must be in [0, 1]");
  if (!(sla_budget_ms > 0.0)) out.push_back("workload.sla_budget_ms must be positive");
  if (!(work_multiplier > 0.0)) out.push_back("workload.work_multiplier must be positive");
  if (!(work_jitter >= 0.0 && work_jitter < 1.0)) out.push_back("workload.work_jitter must be in [0, 1)");
  return out;
}

namespace {

// Piecewise-constant Poisson process: exponential gaps at the current step's
// rate, restarted at each step boundary.
std::vector<double> poisson_arrivals(const WorkloadSpec& spec, RandomStream& rng, double end) {
  std::vector<double> times;
  double t = 0.0;
  while (t < end) {
    const double rate = spec.rate_at(t);
    double next_step = end;
    for (const RateStep& s : spec.rate_schedule)
      if (s.t > t) {
        next_step = std::min(next_step, s.t);
        break;
      }
    if (!(rate > 0.0)) {
      t = next_step;
      continue;
    }
    const double candidate = t + rng.exponential(1.0 / rate);
    if (candidate >= next_step) {
      t = next_step;
      continue;
    }
    t = candidate;
    times.push_back(t);
  }
  return times;
}

}  // namespace

std::vector<RequestSpec> generate_requests(const WorkloadSpec& spec, std::uint64_t seed, double horizon_s) {
  const double end = spec.duration_s > 0.0 ? std::min(spec.duration_s, horizon_s) : horizon_s;
  std::vector<double> times;
  if (spec.kind == WorkloadSpec::Kind::Trace) {
    for (double a : spec.arrivals)
      if (a < end) times.push_back(a);
  } else {
    RandomStream arrivals(derive_seed(seed, "arrivals"));
    times = poisson_arrivals(spec, arrivals, end);
  }
  RandomStream privacy(derive_seed(seed, "privacy"));
  RandomStream work(derive_seed(seed, "work"));
  std::vector<RequestSpec> out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    RequestSpec r;
    r.id = i;
    r.arrival_time = times[i];
    r.privacy_high = privacy.bernoulli(spec.privacy_high_prob);
    r.work_multiplier = spec.work_multiplier * (1.0 + spec.work_jitter * (2.0 * work.uniform() - 1.0));
    r.sla_budget_ms = spec.sla_budget_ms;
    out.push_back(r);
  }
  return out;
}

}  // namespace adaptsplit
