#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adaptsplit {

struct MetricsReport {
  std::string run_id;
  std::string mode;
  std::uint64_t seed = 0;
  double horizon_s = 0.0;

  std::uint64_t requests = 0;
  std::uint64_t completions = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t truncated = 0;

  /// Completed latencies plus timed-out requests censored at the timeout.
  std::vector<double> latency_samples_ms;
  std::optional<double> p50_ms, p95_ms, p99_ms;
  double throughput_rps = 0.0;
  std::optional<double> sla_hit_rate;
  double sla_budget_ms = 400.0;

  std::vector<std::string> node_ids;
  std::vector<double> utilization_per_node;  // foreground busy fraction
  std::vector<double> background_util_per_node;
  double max_util = 0.0;
  double mean_util = 0.0;

  std::uint64_t downtime_incidents = 0;
  double downtime_per_h = 0.0;
  std::uint64_t reconfigurations = 0;
  std::vector<std::string> reconfig_reasons;
  std::uint64_t privacy_violations = 0;

  bool operator==(const MetricsReport&) const = default;
};

/// Fraction of samples <= budget; nullopt for no samples.
std::optional<double> sla_hit_rate(std::span<const double> samples, double budget_ms);

/// Nearest-rank percentile (p in (0, 100]); nullopt for no samples.
std::optional<double> percentile_nearest_rank(std::span<const double> samples, double p);

/// Empirical CDF over distinct sample values.
class CdfSeries {
 public:
  /// Throws PreconditionError on empty input.
  explicit CdfSeries(std::span<const double> samples);

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& fractions() const { return fractions_; }
  /// Fraction of samples <= x.
  double at(double x) const;

 private:
  std::vector<double> sorted_;
  std::vector<double> values_;
  std::vector<double> fractions_;
};

CdfSeries latency_cdf(std::span<const double> samples);

struct BusyInterval {
  std::size_t node = 0;
  double start = 0.0;
  double end = 0.0;
};

/// Busy time clipped to [0, horizon] divided by horizon, per node.
std::vector<double> utilization_summary(std::span<const BusyInterval> intervals, std::size_t node_count,
                                        double horizon_s);

/// Fills the derived fields (percentiles, hit rate, throughput, utilization
/// aggregates, downtime rate) from the raw counters and samples.
void finalize_report(MetricsReport& report);

// Fixed summary CSV schema, one row per report.
extern const char* const kCsvColumns[17];
std::string csv_header();
std::string csv_row(const MetricsReport& report);
void export_csv(std::span<const MetricsReport> reports, std::ostream& out);
std::vector<MetricsReport> parse_csv(std::istream& in);
void export_cdf_csv(const CdfSeries& cdf, std::ostream& out);

std::string export_json(const MetricsReport& report);
MetricsReport parse_json(const std::string& text);

/// Writes to a file; throws Error on IO failure.
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace adaptsplit
