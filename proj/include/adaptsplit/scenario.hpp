#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adaptsplit/simengine.hpp"
#include "json.hpp"

namespace adaptsplit {

/// A parsed scenario document. Traces are re-realized per seed, so the
/// topology is built on demand.
struct Scenario {
  nlohmann::json doc;
  std::string name;
  ModelSpec model;
  WorkloadSpec workload;
  CostWeights weights;
  PrivacyMode privacy_mode = PrivacyMode::Hard;
  Thresholds thresholds;
  OrchestratorPolicy policy;
  Mode mode = Mode::Adaptive;
  SolverConfig solver;
  SimConfig sim;
  std::optional<std::vector<std::size_t>> initial_cuts;
  std::optional<std::vector<std::string>> initial_nodes;

  Topology topology_for_seed(std::uint64_t seed) const;
};

struct ScenarioLoad {
  std::optional<Scenario> scenario;
  std::vector<std::string> violations;
};

/// Schema and value validation. Unknown keys are violations.
ScenarioLoad parse_scenario(const nlohmann::json& doc);

/// Throws Error on unreadable files and nlohmann::json::parse_error on
/// malformed documents.
nlohmann::json read_scenario_document(const std::string& path);

/// Resolves a key for --set / sweep: an exact dotted path, a unique leaf
/// name, or a unique leaf-name prefix ("b_min" -> "thresholds.b_min_mbps").
std::optional<std::string> resolve_scalar_key(const nlohmann::json& doc, const std::string& key);

/// Applies `key=value`; value parsed as JSON when possible, else as a string.
/// Returns an error message on failure.
std::optional<std::string> apply_override(nlohmann::json& doc, const std::string& assignment);

/// Initial deployment: the configured one, or the joint optimum at t = 0.
/// Throws Infeasible.
OrchestratorState initial_deployment(const Scenario& scenario, const Topology& topology);

struct RunOptions {
  std::uint64_t seed = 1;
  Mode mode = Mode::Adaptive;
  std::string run_id;
  bool record_event_log = false;
};

/// Builds the topology for the seed, deploys, and simulates. The result's
/// log is empty unless requested. Throws Infeasible for an infeasible
/// initial deployment.
SimResult run_scenario(const Scenario& scenario, const RunOptions& options,
                       Topology* topology_out = nullptr);

}  // namespace adaptsplit
