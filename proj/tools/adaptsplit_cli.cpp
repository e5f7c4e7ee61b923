#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fmt/core.h>
#include <fstream>
#include <iostream>
#include <sstream>

#include "adaptsplit/errors.hpp"
#include "adaptsplit/scenario.hpp"

using namespace adaptsplit;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kIo = 3, kInfeasible = 4 };

struct Failure {
  int code;
  std::string message;
};

std::string default_out_dir() {
  const char* env = std::getenv("ADAPTSPLIT_OUT");
  return env && *env ? env : "out";
}

nlohmann::json load_document(const std::string& path) {
  try {
    return read_scenario_document(path);
  } catch (const nlohmann::json::exception& e) {
    throw Failure{kIo, fmt::format("{}: {}", path, e.what())};
  } catch (const Error& e) {
    throw Failure{kIo, e.what()};
  }
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  nlohmann::json doc = load_document(path);
  for (const auto& o : overrides)
    if (auto err = apply_override(doc, o)) throw Failure{kInvalid, *err};
  ScenarioLoad load = parse_scenario(doc);
  if (!load.scenario) {
    std::string msg = fmt::format("{}: invalid scenario", path);
    for (const auto& v : load.violations) msg += "\n  " + v;
    throw Failure{kInvalid, msg};
  }
  return std::move(*load.scenario);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kIo, fmt::format("cannot create {}: {}", dir, ec.message())};
}

void write_file(const fs::path& path, const std::string& contents) {
  try {
    write_text_file(path.string(), contents);
  } catch (const Error& e) {
    throw Failure{kIo, e.what()};
  }
}

std::string reports_csv(std::vector<MetricsReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const MetricsReport& a, const MetricsReport& b) { return a.run_id < b.run_id; });
  std::ostringstream ss;
  export_csv(reports, ss);
  return ss.str();
}

std::string cdf_csv(const std::vector<double>& samples) {
  std::ostringstream ss;
  if (samples.empty())
    ss << "latency_ms,cum_fraction\n";
  else
    export_cdf_csv(latency_cdf(samples), ss);
  return ss.str();
}

const char* mode_name(Mode m) { return m == Mode::Static ? "static" : "adaptive"; }

SimResult simulate(const Scenario& sc, std::uint64_t seed, Mode mode, bool event_log, Topology* topo = nullptr) {
  RunOptions opt;
  opt.seed = seed;
  opt.mode = mode;
  opt.run_id = fmt::format("{}-{}-{}", sc.name, mode_name(mode), seed);
  opt.record_event_log = event_log;
  try {
    return run_scenario(sc, opt, topo);
  } catch (const Infeasible& e) {
    throw Failure{kInfeasible, fmt::format("infeasible deployment: {}", e.what())};
  } catch (const NoRoute& e) {
    throw Failure{kInfeasible, fmt::format("infeasible deployment: {}", e.what())};
  } catch (const ConfigError& e) {
    throw Failure{kInvalid, e.what()};
  }
}

std::string opt_str(const std::optional<double>& v, const char* fmtspec = "{:.1f}") {
  return v ? fmt::format(fmt::runtime(fmtspec), *v) : "NA";
}

void print_summary(const MetricsReport& r) {
  fmt::print("{}: requests={} completed={} timeouts={} p95={}ms sla_hit={} throughput={:.2f}rps reconfigs={} "
             "privacy_violations={}\n",
             r.run_id, r.requests, r.completions, r.timeouts, opt_str(r.p95_ms), opt_str(r.sla_hit_rate, "{:.3f}"),
             r.throughput_rps, r.reconfigurations, r.privacy_violations);
}

int cmd_validate(const std::string& path) {
  const Scenario sc = load_scenario(path, {});
  fmt::print("{}: ok ({} blocks, {} nodes)\n", path, sc.model.size(), sc.topology_for_seed(sc.sim.seed).node_count());
  return kOk;
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides, const std::string& out,
            bool event_log) {
  const Scenario sc = load_scenario(path, overrides);
  Topology topo;
  const SimResult res = simulate(sc, sc.sim.seed, sc.mode, event_log, &topo);
  ensure_dir(out);
  const fs::path dir(out);
  const std::string stem = res.report.run_id;
  write_file(dir / (stem + ".csv"), reports_csv({res.report}));
  write_file(dir / (stem + "_cdf.csv"), cdf_csv(res.report.latency_samples_ms));
  write_file(dir / (stem + ".json"), export_json(res.report));
  if (event_log) {
    std::string lines;
    for (const auto& rec : res.log) lines += to_json_line(rec, topo) + "\n";
    write_file(dir / (stem + "_events.jsonl"), lines);
  }
  print_summary(res.report);
  return kOk;
}

struct Comparison {
  std::vector<MetricsReport> reports;
  std::vector<std::string> delta_rows;
  std::vector<double> static_samples, adaptive_samples;
};

double or_zero(const std::optional<double>& v) { return v.value_or(0.0); }

Comparison compare(const Scenario& sc, std::size_t seeds) {
  Comparison c;
  for (std::size_t i = 0; i < seeds; ++i) {
    const std::uint64_t seed = sc.sim.seed + i;
    const MetricsReport st = simulate(sc, seed, Mode::Static, false).report;
    const MetricsReport ad = simulate(sc, seed, Mode::Adaptive, false).report;
    c.static_samples.insert(c.static_samples.end(), st.latency_samples_ms.begin(), st.latency_samples_ms.end());
    c.adaptive_samples.insert(c.adaptive_samples.end(), ad.latency_samples_ms.begin(), ad.latency_samples_ms.end());
    c.delta_rows.push_back(fmt::format("{},{},{},{},{},{}", seed, or_zero(ad.p95_ms) - or_zero(st.p95_ms),
                                       or_zero(ad.sla_hit_rate) - or_zero(st.sla_hit_rate),
                                       ad.throughput_rps - st.throughput_rps, ad.max_util - st.max_util,
                                       ad.downtime_per_h - st.downtime_per_h));
    c.reports.push_back(st);
    c.reports.push_back(ad);
  }
  return c;
}

int cmd_compare(const std::string& path, std::size_t seeds, const std::vector<std::string>& overrides,
                const std::string& out) {
  if (seeds < 1) throw Failure{kInvalid, "--seeds must be at least 1"};
  const Scenario sc = load_scenario(path, overrides);
  const Comparison c = compare(sc, seeds);
  ensure_dir(out);
  const fs::path dir(out);
  write_file(dir / "compare_runs.csv", reports_csv(c.reports));
  std::string delta = "seed,delta_p95_ms,delta_sla_hit_rate,delta_throughput_rps,delta_max_util,delta_downtime_per_h\n";
  for (const auto& row : c.delta_rows) delta += row + "\n";
  write_file(dir / "compare_delta.csv", delta);
  write_file(dir / "cdf_static.csv", cdf_csv(c.static_samples));
  write_file(dir / "cdf_adaptive.csv", cdf_csv(c.adaptive_samples));
  for (const auto& r : c.reports) print_summary(r);
  const auto st = sla_hit_rate(c.static_samples, sc.workload.sla_budget_ms);
  const auto ad = sla_hit_rate(c.adaptive_samples, sc.workload.sla_budget_ms);
  fmt::print("pooled sla_hit_rate: static={} adaptive={}\n", opt_str(st, "{:.3f}"), opt_str(ad, "{:.3f}"));
  return kOk;
}

int cmd_sweep(const std::string& path, const std::string& param, const std::vector<std::string>& values,
              std::size_t seeds, const std::string& out) {
  if (values.empty()) throw Failure{kInvalid, "--values must list at least one value"};
  if (seeds < 1) throw Failure{kInvalid, "--seeds must be at least 1"};
  const nlohmann::json doc = load_document(path);
  const auto key = resolve_scalar_key(doc, param);
  if (!key) throw Failure{kInvalid, fmt::format("unknown or ambiguous parameter '{}'", param)};
  std::string csv = "param,value," + csv_header() + "\n";
  for (const auto& v : values) {
    const Scenario sc = load_scenario(path, {*key + "=" + v});
    const Comparison c = compare(sc, seeds);
    std::vector<MetricsReport> sorted = c.reports;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const MetricsReport& a, const MetricsReport& b) { return a.run_id < b.run_id; });
    for (const auto& r : sorted) csv += fmt::format("{},{},{}\n", *key, v, csv_row(r));
    fmt::print("{}={}: done ({} runs)\n", *key, v, sorted.size());
  }
  ensure_dir(out);
  write_file(fs::path(out) / "sweep.csv", csv);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive split-inference orchestration simulator"};
  app.require_subcommand(1);

  std::string path;
  std::vector<std::string> overrides;
  std::string out = default_out_dir();
  bool event_log = false;
  std::size_t seeds = 10;
  std::string param;
  std::vector<std::string> values;

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("file", path, "Scenario JSON")->required();

  auto* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("file", path, "Scenario JSON")->required();
  run->add_option("--set", overrides, "Override key=value (repeatable)");
  run->add_option("--out", out, "Output directory");
  run->add_flag("--event-log", event_log, "Write the event log as JSON lines");

  auto* cmp = app.add_subcommand("compare", "Static vs adaptive over several seeds");
  cmp->add_option("file", path, "Scenario JSON")->required();
  cmp->add_option("--seeds", seeds, "Number of seeds")->required();
  cmp->add_option("--set", overrides, "Override key=value (repeatable)");
  cmp->add_option("--out", out, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Compare across values of one parameter");
  sweep->add_option("file", path, "Scenario JSON")->required();
  sweep->add_option("--param", param, "Scenario key")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Seeds per value")->default_val(1);
  sweep->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) return cmd_validate(path);
    if (*run) return cmd_run(path, overrides, out, event_log);
    if (*cmp) return cmd_compare(path, seeds, overrides, out);
    if (*sweep) return cmd_sweep(path, param, values, seeds, out);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}
