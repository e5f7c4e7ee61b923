#include "adaptsplit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "adaptsplit/errors.hpp"
#include "adaptsplit/kernels.hpp"

namespace adaptsplit {

std::optional<double> sla_hit_rate(std::span<const double> samples, double budget_ms) {
  if (!(budget_ms > 0.0)) throw PreconditionError("SLA budget must be positive");
  if (samples.empty()) return std::nullopt;
  return static_cast<double>(kernels::count_at_most(samples, budget_ms)) / static_cast<double>(samples.size());
}

std::optional<double> percentile_nearest_rank(std::span<const double> samples, double p) {
  if (!(p > 0.0 && p <= 100.0)) throw PreconditionError("percentile must be in (0, 100]");
  if (samples.empty()) return std::nullopt;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = std::ceil(p / 100.0 * static_cast<double>(sorted.size()));
  const std::size_t idx = rank < 1.0 ? 0 : std::min(sorted.size(), static_cast<std::size_t>(rank)) - 1;
  return sorted[idx];
}

CdfSeries::CdfSeries(std::span<const double> samples) : sorted_(samples.begin(), samples.end()) {
  if (sorted_.empty()) throw PreconditionError("CDF of an empty sample set");
  std::sort(sorted_.begin(), sorted_.end());
  const double n = static_cast<double>(sorted_.size());
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
    values_.push_back(sorted_[i]);
    fractions_.push_back(static_cast<double>(i + 1) / n);
  }
}

double CdfSeries::at(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

CdfSeries latency_cdf(std::span<const double> samples) { return CdfSeries(samples); }

std::vector<double> utilization_summary(std::span<const BusyInterval> intervals, std::size_t node_count,
                                        double horizon_s) {
  std::vector<double> busy(node_count, 0.0);
  if (!(horizon_s > 0.0)) return busy;
  for (const BusyInterval& iv : intervals) {
    if (iv.node >= node_count) throw PreconditionError("busy interval on unknown node");
    const double s = std::max(0.0, iv.start);
    const double e = std::min(horizon_s, iv.end);
    if (e > s) busy[iv.node] += e - s;
  }
  for (double& b : busy) b = std::min(1.0, b / horizon_s);
  return busy;
}

void finalize_report(MetricsReport& r) {
  const auto& s = r.latency_samples_ms;
  r.p50_ms = percentile_nearest_rank(s, 50.0);
  r.p95_ms = percentile_nearest_rank(s, 95.0);
  r.p99_ms = percentile_nearest_rank(s, 99.0);
  r.sla_hit_rate = sla_hit_rate(s, r.sla_budget_ms);
  r.throughput_rps = r.horizon_s > 0.0 ? static_cast<double>(r.completions) / r.horizon_s : 0.0;
  r.max_util = 0.0;
  r.mean_util = 0.0;
  for (double u : r.utilization_per_node) {
    r.max_util = std::max(r.max_util, u);
    r.mean_util += u;
  }
  if (!r.utilization_per_node.empty()) r.mean_util /= static_cast<double>(r.utilization_per_node.size());
  r.downtime_per_h = r.horizon_s > 0.0 ? static_cast<double>(r.downtime_incidents) / (r.horizon_s / 3600.0) : 0.0;
}

const char* const kCsvColumns[17] = {"run_id",      "mode",        "seed",          "requests",       "completions",
                                     "timeouts",    "truncated",   "p50_ms",        "p95_ms",         "p99_ms",
                                     "throughput_rps", "sla_hit_rate", "max_util",   "mean_util",      "downtime_per_h",
                                     "reconfigs",   "privacy_violations"};

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) { return fmt::format("{}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string("NA"); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(fmt::format("malformed number '{}'", s));
  }
  if (used != s.size()) throw Error(fmt::format("malformed number '{}'", s));
  return v;
}

std::uint64_t parse_count(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw Error(fmt::format("malformed count '{}'", s));
  }
  if (used != s.size()) throw Error(fmt::format("malformed count '{}'", s));
  return v;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s == "NA") return std::nullopt;
  return parse_double(s);
}

}  // namespace

std::string csv_header() {
  std::string out;
  for (std::size_t i = 0; i < 17; ++i) {
    if (i) out += ',';
    out += kCsvColumns[i];
  }
  return out;
}

std::string csv_row(const MetricsReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", csv_field(r.run_id), csv_field(r.mode),
                     r.seed, r.requests, r.completions, r.timeouts, r.truncated, num(r.p50_ms), num(r.p95_ms),
                     num(r.p99_ms), num(r.throughput_rps), num(r.sla_hit_rate), num(r.max_util), num(r.mean_util),
                     num(r.downtime_per_h), r.reconfigurations, r.privacy_violations);
}

void export_csv(std::span<const MetricsReport> reports, std::ostream& out) {
  out << csv_header() << '\n';
  for (const auto& r : reports) out << csv_row(r) << '\n';
}

std::vector<MetricsReport> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw Error("CSV header does not match the report schema");
  std::vector<MetricsReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 17) throw Error(fmt::format("CSV row has {} fields, expected 17", f.size()));
    MetricsReport r;
    r.run_id = f[0];
    r.mode = f[1];
    r.seed = parse_count(f[2]);
    r.requests = parse_count(f[3]);
    r.completions = parse_count(f[4]);
    r.timeouts = parse_count(f[5]);
    r.truncated = parse_count(f[6]);
    r.p50_ms = parse_optional(f[7]);
    r.p95_ms = parse_optional(f[8]);
    r.p99_ms = parse_optional(f[9]);
    r.throughput_rps = parse_double(f[10]);
    r.sla_hit_rate = parse_optional(f[11]);
    r.max_util = parse_double(f[12]);
    r.mean_util = parse_double(f[13]);
    r.downtime_per_h = parse_double(f[14]);
    r.reconfigurations = parse_count(f[15]);
    r.privacy_violations = parse_count(f[16]);
    out.push_back(std::move(r));
  }
  return out;
}

void export_cdf_csv(const CdfSeries& cdf, std::ostream& out) {
  out << "latency_ms,cum_fraction\n";
  for (std::size_t i = 0; i < cdf.values().size(); ++i)
    out << num(cdf.values()[i]) << ',' << num(cdf.fractions()[i]) << '\n';
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> opt_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string export_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["run_id"] = r.run_id;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["horizon_s"] = r.horizon_s;
  j["requests"] = r.requests;
  j["completions"] = r.completions;
  j["timeouts"] = r.timeouts;
  j["truncated"] = r.truncated;
  j["latency_samples_ms"] = r.latency_samples_ms;
  j["p50_ms"] = opt_json(r.p50_ms);
  j["p95_ms"] = opt_json(r.p95_ms);
  j["p99_ms"] = opt_json(r.p99_ms);
  j["throughput_rps"] = r.throughput_rps;
  j["sla_hit_rate"] = opt_json(r.sla_hit_rate);
  j["sla_budget_ms"] = r.sla_budget_ms;
  j["node_ids"] = r.node_ids;
  j["utilization_per_node"] = r.utilization_per_node;
  j["background_util_per_node"] = r.background_util_per_node;
  j["max_util"] = r.max_util;
  j["mean_util"] = r.mean_util;
  j["downtime_incidents"] = r.downtime_incidents;
  j["downtime_per_h"] = r.downtime_per_h;
  j["reconfigurations"] = r.reconfigurations;
  j["reconfig_reasons"] = r.reconfig_reasons;
  j["privacy_violations"] = r.privacy_violations;
  return j.dump(2) + "\n";
}

MetricsReport parse_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("report JSON: {}", e.what()));
  }
  MetricsReport r;
  try {
    r.run_id = j.at("run_id").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.horizon_s = j.at("horizon_s").get<double>();
    r.requests = j.at("requests").get<std::uint64_t>();
    r.completions = j.at("completions").get<std::uint64_t>();
    r.timeouts = j.at("timeouts").get<std::uint64_t>();
    r.truncated = j.at("truncated").get<std::uint64_t>();
    r.latency_samples_ms = j.at("latency_samples_ms").get<std::vector<double>>();
    r.p50_ms = opt_from(j.at("p50_ms"));
    r.p95_ms = opt_from(j.at("p95_ms"));
    r.p99_ms = opt_from(j.at("p99_ms"));
    r.throughput_rps = j.at("throughput_rps").get<double>();
    r.sla_hit_rate = opt_from(j.at("sla_hit_rate"));
    r.sla_budget_ms = j.at("sla_budget_ms").get<double>();
    r.node_ids = j.at("node_ids").get<std::vector<std::string>>();
    r.utilization_per_node = j.at("utilization_per_node").get<std::vector<double>>();
    r.background_util_per_node = j.at("background_util_per_node").get<std::vector<double>>();
    r.max_util = j.at("max_util").get<double>();
    r.mean_util = j.at("mean_util").get<double>();
    r.downtime_incidents = j.at("downtime_incidents").get<std::uint64_t>();
    r.downtime_per_h = j.at("downtime_per_h").get<double>();
    r.reconfigurations = j.at("reconfigurations").get<std::uint64_t>();
    r.reconfig_reasons = j.at("reconfig_reasons").get<std::vector<std::string>>();
    r.privacy_violations = j.at("privacy_violations").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("report JSON: {}", e.what()));
  }
  return r;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot open {} for writing", path));
  out << contents;
  if (!out.flush()) throw Error(fmt::format("write to {} failed", path));
}

}  // namespace adaptsplit
