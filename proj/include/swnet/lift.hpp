#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "swnet/net_model.hpp"
#include "swnet/rational.hpp"
#include "swnet/static_plan.hpp"
#include "swnet/vec.hpp"

namespace swnet {

/// L(q) = sum_n F(q_n).
double lyapunov(const WeightFunction& f, std::span<const double> q);

/// w_v = xi^v . q, or xi^v . (R~ q) on multi-hop models.
Vec workload(const NetworkModel& model, const std::vector<RatVec>& xis, std::span<const double> q);

struct LiftOptions {
  double kkt_tol = 1e-8;
  int max_iterations = 500;
  bool throw_on_divergence = true;
};

struct LiftResult {
  Vec r_star;
  /// One multiplier per workload constraint followed by one per cap constraint.
  Vec multipliers;
  /// max of normalized primal violation and normalized complementarity gap; stationarity
  /// holds by construction since r is recovered from the multipliers.
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Lifting map for fixed (model, lambda, f) and a fixed critical set (Xi or Xi+). The
/// constraint rows are built once; each call solves the convex program for one q by
/// projected Newton ascent on the dual.
class LiftMap {
 public:
  LiftMap(const NetworkModel& model, const RatVec& lambda, WeightFunction f,
          std::vector<RatVec> xis, LiftOptions opts = {});

  LiftResult operator()(std::span<const double> q) const;

  const WeightFunction& weight() const { return f_; }
  const std::vector<RatVec>& xis() const { return xis_; }
  /// Queues with zero (upstream) arrival rate, which carry the cap constraints.
  const std::vector<std::size_t>& capped() const { return capped_; }
  std::size_t n_queues() const { return n_; }

  /// Constraint data at q: rows G r >= g (workloads) and H r <= h (caps).
  void constraints(std::span<const double> q, std::vector<Vec>& G, Vec& g, std::vector<Vec>& H,
                   Vec& h) const;
  /// max normalized constraint violation of r for the program at q.
  double feasibility_violation(std::span<const double> q, std::span<const double> r) const;

 private:
  std::size_t n_ = 0;
  bool multi_ = false;
  NetworkModel model_;
  WeightFunction f_;
  std::vector<RatVec> xis_;
  std::vector<std::size_t> capped_;
  /// Rows in r-space: xi R~ for workloads, e_n R~ for caps.
  std::vector<Vec> g_rows_;
  std::vector<Vec> h_rows_;
  LiftOptions opts_;
};

/// Builds the map from the vertex set: Xi(lambda) by default, Xi+(lambda) on request.
LiftMap make_lift_map(const NetworkModel& model, const RatVec& lambda, const WeightFunction& f,
                      const VirtualResourceSet& vrs, bool use_clvr_plus = false,
                      LiftOptions opts = {});

LiftResult lift(const NetworkModel& model, const RatVec& lambda, const WeightFunction& f,
                const std::vector<RatVec>& xis, std::span<const double> q, LiftOptions opts = {});

/// |lambda . f(q) - max_pi w_pi(q)| <= tol (1 + |max w|) with MW or backpressure weights.
bool invariant_state_test(const NetworkModel& model, const Vec& lambda, const WeightFunction& f,
                          std::span<const double> q, double tol = 1e-6);
/// lambda . f(q) - max_pi w_pi(q), the fluid drift of L at q.
double lyapunov_drift(const NetworkModel& model, const Vec& lambda, const WeightFunction& f,
                      std::span<const double> q);

struct RepresentationCheck {
  bool ok = false;
  double residual = 0.0;
  double t = 0.0;
  /// sigma in the convex hull of S.
  Vec sigma;
};

/// Finds t >= 0 and sigma in conv(S) with r = [q + t(lambda - sigma)]^+ (single hop) or
/// r = q + t(lambda - (I - R^T) sigma) (multi hop), minimizing the sup-norm residual.
RepresentationCheck representation_check(const NetworkModel& model, const Vec& lambda,
                                         std::span<const double> q, std::span<const double> r,
                                         double tol = 1e-6);

}  // namespace swnet
