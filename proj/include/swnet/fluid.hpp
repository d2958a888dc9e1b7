#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "swnet/lift.hpp"
#include "swnet/net_model.hpp"
#include "swnet/policy.hpp"
#include "swnet/sim.hpp"
#include "swnet/vec.hpp"

namespace swnet {

/// Fluid trajectory realized as the discrete recursion with dA = lambda h and service
/// h pi, read at scale 1/h. Point k sits at t = k h.
struct FluidTrajectory {
  NetworkModel model;
  Vec lambda;
  double h = 1e-3;
  Vec t;
  std::vector<Vec> q, a, y;
  /// Cumulative time allocated to each schedule.
  std::vector<Vec> s;
  /// Argmax set of the policy at point k (the schedule used on [t_k, t_k+1] is chosen
  /// from it); empty on the final point.
  std::vector<std::vector<std::size_t>> argmax;
  std::vector<std::size_t> chosen;

  std::size_t points() const { return t.size(); }
};

FluidTrajectory integrate_fluid(const NetworkModel& model, const Policy& policy, const Vec& lambda,
                                const Vec& q0, double h, double T, std::uint64_t tie_seed = 0);

/// Post-hoc check of a = lambda t, sum s = t, monotone y and s, y <= sum s pi and the
/// queue identity.
AuditReport fluid_audit(const FluidTrajectory& traj);

struct DriftCheck {
  double max_residual = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  /// Per point: formula value and central difference (NaN where not evaluated).
  Vec formula;
  Vec finite_difference;
};

/// Compares (L(q_{k+1}) - L(q_{k-1})) / 2h with lambda.f(q_k) - max_pi w_pi(q_k), skipping
/// points whose stencil sees more than one argmax set.
DriftCheck lyapunov_drift_check(const NetworkModel& model, const Vec& lambda,
                                const WeightFunction& f, const FluidTrajectory& traj);

struct FeasibilityCheck {
  bool ok = true;
  double max_violation = 0.0;
};

/// xi.q~(t) >= xi.q~(0) - tol (1 + |xi.q~(0)|) for xi in `xis`, and q~_n(t) <= q~_n(0) + tol
/// where the (upstream) rate is zero.
FeasibilityCheck feasibility_preservation_check(const NetworkModel& model, const RatVec& lambda,
                                                const std::vector<RatVec>& xis,
                                                const FluidTrajectory& traj, double tol = 1e-6);

struct ConvergenceResult {
  std::optional<double> hitting_time;
  /// |q(t) - lift(q(t))| at every evaluated point (NaN elsewhere).
  Vec distance;
  double final_distance = 0.0;
};

/// Smallest evaluated time with |q(t) - lift(q(t))| < eps that holds through T. `stride`
/// evaluates the lift every stride-th point (the last point is always evaluated).
ConvergenceResult convergence_to_invariant(const LiftMap& lift, const FluidTrajectory& traj,
                                           double eps, std::size_t stride = 1);

/// Queue component of a path on its own time grid.
struct SampledPath {
  Vec t;
  std::vector<Vec> v;
};

SampledPath sampled(const FluidTrajectory& traj);
SampledPath sampled(const ScaledPath& path);

/// sup_t max_n |x - y| with both paths linearly interpolated on the union grid. Throws
/// GridMismatch if the horizons differ.
double trajectory_distance(const SampledPath& x, const SampledPath& y);

}  // namespace swnet
