#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "swnet/net_model.hpp"
#include "swnet/rational.hpp"

namespace swnet {

struct PrimalResult {
  /// False when some queue with positive rate is never served: no finite value.
  bool feasible = true;
  Rational value;
  RatVec alpha;
};

struct DualResult {
  bool bounded = true;
  Rational value;
  RatVec xi;
};

/// min sum alpha_pi s.t. lambda <= sum alpha_pi pi, alpha >= 0.
PrimalResult solve_primal(const NetworkModel& model, const RatVec& lambda);
/// max xi.lambda s.t. xi >= 0, xi.pi <= 1 for all pi. Optimum is a vertex.
DualResult solve_dual(const NetworkModel& model, const RatVec& lambda);

enum class LoadKind { kStrictlyAdmissible, kCritical, kInadmissible };
std::string to_string(LoadKind kind);

struct LoadClass {
  Rational primal_value;
  bool finite = true;
  LoadKind kind = LoadKind::kStrictlyAdmissible;
  /// Set when the classification came from floating-point input.
  bool approximate = false;
  double primal_value_double = 0.0;
};

LoadClass classify_load(const NetworkModel& model, const RatVec& lambda);
/// Floating-point input: double simplex, equality to 1 decided within tol, flagged approximate.
LoadClass classify_load(const NetworkModel& model, const Vec& lambda, double tol = 1e-9);

/// sum_k C(N + |S|, N) style count of candidate bases examined by vertex enumeration.
double vertex_candidate_count(std::size_t n_queues, std::size_t n_schedules);

struct VirtualResourceSet {
  /// All vertices E of {xi >= 0, xi.pi <= 1}, lexicographically sorted.
  std::vector<RatVec> vertices;
  /// Indices into `vertices` of the maximal elements S*.
  std::vector<std::size_t> maximal;

  std::vector<RatVec> s_star() const;
};

/// Throws BudgetExceeded when vertex_candidate_count exceeds budget.
VirtualResourceSet enumerate_dual_vertices(const NetworkModel& model, double budget = 1e6);

/// Feasible and at least N linearly independent tight constraints.
bool is_dual_vertex(const NetworkModel& model, const RatVec& xi);

struct CriticalSets {
  /// Indices into vrs.vertices; clvr is a subset of vrs.maximal.
  std::vector<std::size_t> clvr;
  std::vector<std::size_t> clvr_plus;

  std::vector<RatVec> xi(const VirtualResourceSet& vrs) const;
  std::vector<RatVec> xi_plus(const VirtualResourceSet& vrs) const;
};

/// Exact filter xi.rate = 1. Multi-hop callers pass the upstream rate R~ lambda.
CriticalSets critically_loaded(const VirtualResourceSet& vrs, const RatVec& rate);

/// Rate used for the geometry: lambda for single-hop, R~ lambda for multi-hop.
RatVec critical_rate(const NetworkModel& model, const RatVec& lambda);

struct CompleteLoading {
  bool holds = false;
  /// 1 / max_pi (1.pi) in every coordinate.
  RatVec target;
  /// Convex weights over crit.clvr when holds.
  RatVec weights;
};

CompleteLoading complete_loading_check(const NetworkModel& model, const VirtualResourceSet& vrs,
                                       const CriticalSets& crit);

/// Convex weights a with sigma = sum a_pi pi, if any.
std::optional<RatVec> hull_weights(const NetworkModel& model, const RatVec& sigma);
bool hull_membership(const NetworkModel& model, const RatVec& sigma);
/// sigma <= some point of the hull (the admissible-region predicate).
bool dominated_membership(const NetworkModel& model, const RatVec& sigma);

}  // namespace swnet
