#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swnet/arrivals.hpp"
#include "swnet/net_model.hpp"
#include "swnet/policy.hpp"
#include "swnet/rational.hpp"

namespace swnet {

enum class ExperimentKind { kAnalyze, kSimulate, kFluid, kLift, kCollapse, kIqcheck };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct Tolerances {
  double invariant = 1e-6;
  double drift = 0.1;
  double feasibility = 1e-6;
  double kkt = 1e-8;
  /// Slack on fluid monotonicity, in units of h.
  double monotone_slack = 10.0;
};

struct ExperimentParams {
  ExperimentKind kind = ExperimentKind::kAnalyze;
  // analyze
  double budget = 1e6;
  // simulate / fluid / collapse / lift
  Vec q0;
  std::uint64_t horizon = 0;
  std::uint64_t stride = 1;
  std::optional<std::string> audit_csv;
  std::size_t pair_samples = 2000;
  double h = 1e-3;
  double T = 10.0;
  double epsilon = 0.05;
  std::size_t lift_stride = 10;
  bool use_clvr_plus = false;
  // collapse
  std::vector<double> r_list{10, 20, 40};
  std::size_t reps = 20;
  std::size_t grid = 200;
  Vec gamma;
  double median_threshold = 0.2;
  // iqcheck
  std::vector<double> alphas{1.0, 0.5, 0.2};
  double grid_step = 0.1;
  double w_max = 2.0;
  double wtot_max = 6.0;
  std::vector<std::size_t> m_list{2, 3};
  std::size_t closure_samples = 1000;
  std::size_t coverage_samples = 200;
};

struct ScenarioConfig {
  std::optional<NetworkModel> model;
  std::optional<RatVec> lambda;
  std::optional<ArrivalModel> arrivals;
  Policy policy;
  ExperimentParams experiment;
  std::uint64_t seed = 1;
  std::string out = "out";
  Tolerances tolerances;
  std::optional<std::size_t> threads;
  /// Canonical JSON of the parsed file with overrides applied; `out` and `threads` are
  /// left out since they do not change results.
  std::string canonical;
};

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

/// Parses UTF-8 JSON ("-" reads stdin). Throws SchemaError with a JSON pointer, or
/// PresetUnknown.
ScenarioConfig parse_scenario(const std::string& path, const CliOverrides& overrides = {});
ScenarioConfig parse_scenario_text(const std::string& text, const CliOverrides& overrides = {});

/// Runs the experiment and writes its files plus manifest.json into cfg.out. Returns 0 on
/// success and 2 when a property check fails; errors propagate as exceptions.
int execute(const ScenarioConfig& cfg, std::ostream& log);

std::string sha256_hex(const std::string& bytes);

}  // namespace swnet
