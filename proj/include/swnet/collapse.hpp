#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swnet/arrivals.hpp"
#include "swnet/fluid.hpp"
#include "swnet/lift.hpp"
#include "swnet/net_model.hpp"
#include "swnet/policy.hpp"
#include "swnet/static_plan.hpp"

namespace swnet {

// ---------------------------------------------------------------------------
// Multiplicative state space collapse

struct MsscConfig {
  NetworkModel model;
  Policy policy;
  /// Limit rate; must be critically loaded for a nontrivial lift.
  RatVec lambda;
  /// deterministic or bernoulli (unit batches unless batch is given).
  ArrivalKind arrival_kind = ArrivalKind::kBernoulli;
  Vec batch;
  /// Heavy-traffic probe lambda^r = lambda - gamma / r; results are labeled as a probe.
  Vec gamma;
  Vec q0_hat;
  std::vector<double> r_list{10, 20, 40};
  double T = 1.0;
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  /// Points per run at which the lift is evaluated.
  std::size_t grid = 200;
  std::size_t threads = 1;
};

struct MsscRow {
  double r = 0.0;
  std::size_t rep = 0;
  double ratio = 0.0;
  double sup_q = 0.0;
  double sup_dev = 0.0;
};

struct MsscSummary {
  double r = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  bool sub_asymptotic = false;
};

struct CollapseReport {
  std::vector<MsscRow> rows;
  std::vector<MsscSummary> per_r;
  /// Xi(lambda) is empty, so the lift is identically zero.
  bool trivial_lift = false;
  bool probe = false;
  bool q0_invariant = false;
  /// Median ratio strictly decreasing along r_list.
  bool strictly_decreasing() const;
};

/// Ratio sup_t |q(t) - lift(q(t))| / (sup_t |q(t)| v 1) of one diffusion-scaled run; the
/// lift is evaluated on `grid` points of [0, T], so the numerator is a lower bound.
CollapseReport mssc_experiment(const MsscConfig& cfg);

// ---------------------------------------------------------------------------
// Near-optimality bounds along fluid runs

struct NearOptimalityRow {
  /// max_t (1.q(t) - factor 1.q(0)); <= O(h) expected.
  std::optional<double> upper_violation;
  /// max_t (1.q(0) - 1.q(t)) under complete loading; <= O(h) expected.
  std::optional<double> lower_violation;
};

struct NearOptimalityReport {
  std::optional<double> upper_factor;
  bool complete_loading = false;
  std::vector<NearOptimalityRow> rows;
};

/// N^{alpha/(1+alpha)}.
double near_optimality_factor(std::size_t n_queues, double alpha);

/// `alpha` enables the upper bound (MW-alpha runs); complete loading enables the lower one.
NearOptimalityReport near_optimality_audit(std::size_t n_queues, std::optional<double> alpha,
                                           bool complete_loading,
                                           const std::vector<const FluidTrajectory*>& runs);

// ---------------------------------------------------------------------------
// 2x2 input-queued switch

/// Row-1, column-1 and total workloads.
struct Iq2x2Workload {
  double w1r = 0.0;
  double w1c = 0.0;
  double wtot = 0.0;
};

/// Queue order (11, 12, 21, 22).
Iq2x2Workload iq2x2_workload(std::span<const double> q);
/// (a^alpha + b^alpha)^{1/alpha}, safe at zero.
double power_sum(double a, double b, double alpha);
bool iq2x2_membership(const Iq2x2Workload& w, double alpha);
double iq2x2_theta(const Iq2x2Workload& w, double alpha, double x);
/// Bounds [lo, hi] of the free entry x = q11.
std::pair<double, double> iq2x2_bounds(const Iq2x2Workload& w);
/// Invariant state with workload w. Throws NoRoot when w is not a member.
Vec iq2x2_invariant_solve(const Iq2x2Workload& w, double alpha);
/// Lift of q for uniform doubly stochastic positive rates when W(q) is a member; nullopt
/// otherwise (the generic solver is needed there).
std::optional<Vec> lift_iq2x2_fast(std::span<const double> q, double alpha);

struct MonotonicityPair {
  double alpha_hi = 0.0;
  double alpha_lo = 0.0;
  /// Points in W(alpha_hi) missing from W(alpha_lo).
  std::size_t nesting_violations = 0;
  std::size_t strict_witnesses = 0;
  std::optional<Iq2x2Workload> first_witness;
};

struct MonotonicityReport {
  std::size_t grid_points = 0;
  std::vector<MonotonicityPair> pairs;
  bool pass() const;
};

/// Grid w1r, w1c in [0, w_max], wtot in [0, wtot_max] with spacing `step`.
MonotonicityReport alpha_monotonicity_probe(const std::vector<double>& alphas_desc, double step = 0.1,
                                            double w_max = 2.0, double wtot_max = 6.0);

/// Largest alpha on a descending scan at which w becomes a member, if any.
std::optional<double> membership_threshold(const Iq2x2Workload& w, double alpha_start = 1.0,
                                           double factor = 0.9, std::size_t max_steps = 200);

// ---------------------------------------------------------------------------
// Matching structure (M x M switch)

/// All permutations of 0..M-1 in lexicographic order (sigma[i] = column of row i).
std::vector<std::vector<std::size_t>> permutations(std::size_t m);

struct MatchingReport {
  std::size_t m = 0;
  std::size_t closure_samples = 0;
  std::size_t closure_violations = 0;
  std::size_t coverage_samples = 0;
  std::size_t coverage_violations = 0;
  /// Sampled states that failed the invariance test (should be zero).
  std::size_t non_invariant_samples = 0;
  bool pass() const {
    return closure_violations == 0 && coverage_violations == 0 && non_invariant_samples == 0;
  }
};

/// Closure: for random small-integer weight matrices, every matching inside the support of
/// the maximum matchings is itself maximum. Coverage: for invariant states of random
/// doubly stochastic positive rates, every entry lies in some maximum-weight matching of
/// q^alpha.
MatchingReport matching_structure_checks(std::size_t m, std::size_t closure_samples,
                                         std::size_t coverage_samples, std::uint64_t seed,
                                         const std::vector<double>& alphas = {0.5, 1.0, 2.0});

}  // namespace swnet
