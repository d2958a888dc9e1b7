#include "swnet/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swnet/error.hpp"

namespace swnet {

FluidTrajectory integrate_fluid(const NetworkModel& model, const Policy& policy, const Vec& lambda,
                                const Vec& q0, double h, double T, std::uint64_t tie_seed) {
  const std::size_t n = model.n_queues;
  if (lambda.size() != n || q0.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "lambda / q0 do not match the model");
  }
  if (!(h > 0.0 && h <= 0.1)) throw Error(ErrorCode::kInvalidArgument, "h must lie in (0, 0.1]");
  if (!(T >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "T must be >= 0");
  check_policy_model(model, policy);

  const auto steps = static_cast<std::size_t>(std::llround(T / h));
  FluidTrajectory tr;
  tr.model = model;
  tr.lambda = lambda;
  tr.h = h;
  tr.t.reserve(steps + 1);
  tr.q.reserve(steps + 1);

  TieState ties(tie_seed);
  Vec q = q0;
  Vec da = scaled(lambda, h);
  std::vector<CompensatedSum> y(n), s(model.schedules.size());
  Vec service(n);
  auto record = [&](std::size_t k) {
    const double t = static_cast<double>(k) * h;
    tr.t.push_back(t);
    tr.q.push_back(q);
    tr.a.push_back(scaled(lambda, t));
    Vec yv(n), sv(model.schedules.size());
    for (std::size_t i = 0; i < n; ++i) yv[i] = y[i].value();
    for (std::size_t i = 0; i < sv.size(); ++i) sv[i] = s[i].value();
    tr.y.push_back(std::move(yv));
    tr.s.push_back(std::move(sv));
  };
  record(0);
  for (std::size_t k = 0; k < steps; ++k) {
    SelectionTrace sel = select_schedule(model, policy, q, ties);
    const Vec& pi = model.schedules[sel.chosen];
    for (std::size_t i = 0; i < n; ++i) service[i] = h * pi[i];
    StepResult r = apply_service(model, q, service, da);
    for (std::size_t i = 0; i < n; ++i) y[i].add(r.dY[i]);
    s[sel.chosen].add(h);
    tr.argmax.push_back(std::move(sel.argmax_set));
    tr.chosen.push_back(sel.chosen);
    q = std::move(r.q_next);
    record(k + 1);
  }
  tr.argmax.emplace_back();
  return tr;
}

AuditReport fluid_audit(const FluidTrajectory& tr) {
  constexpr double kTol = 1e-9;
  AuditReport rep;
  const NetworkModel& model = tr.model;
  const std::size_t n = model.n_queues;
  auto flag = [&](std::size_t k, std::string what, double mag) {
    rep.violations.push_back({static_cast<std::uint64_t>(k), std::move(what), mag});
  };
  for (std::size_t k = 0; k < tr.points(); ++k) {
    const double t = tr.t[k];
    double a_gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) a_gap = std::max(a_gap, std::abs(tr.a[k][i] - tr.lambda[i] * t));
    if (a_gap > kTol * (1.0 + t)) flag(k, "a = lambda t", a_gap);
    const double st = total(tr.s[k]);
    if (std::abs(st - t) > kTol * (1.0 + t)) flag(k, "sum s = t", std::abs(st - t));

    Vec served(n, 0.0);
    for (std::size_t p = 0; p < model.schedules.size(); ++p) {
      for (std::size_t i = 0; i < n; ++i) served[i] += tr.s[k][p] * model.schedules[p][i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (tr.y[k][i] > served[i] + kTol * (1.0 + served[i])) {
        flag(k, "y <= sum s pi", tr.y[k][i] - served[i]);
        break;
      }
    }
    Vec net(n);
    for (std::size_t i = 0; i < n; ++i) net[i] = served[i] - tr.y[k][i];
    const Vec out = net_outflow(model, net);
    double gap = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      gap = std::max(gap, std::abs(tr.q[k][i] - (tr.q[0][i] + tr.a[k][i] - out[i])));
      scale = std::max({scale, tr.q[0][i], tr.a[k][i], served[i]});
    }
    if (gap > kTol * scale) flag(k, "queue identity", gap);
    if (k > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (tr.y[k][i] < tr.y[k - 1][i]) {
          flag(k, "y nondecreasing", tr.y[k - 1][i] - tr.y[k][i]);
          break;
        }
      }
      for (std::size_t p = 0; p < model.schedules.size(); ++p) {
        if (tr.s[k][p] < tr.s[k - 1][p]) {
          flag(k, "s nondecreasing", tr.s[k - 1][p] - tr.s[k][p]);
          break;
        }
      }
    }
    ++rep.rows_checked;
  }
  return rep;
}

DriftCheck lyapunov_drift_check(const NetworkModel& model, const Vec& lambda,
                                const WeightFunction& f, const FluidTrajectory& tr) {
  DriftCheck dc;
  const std::size_t K = tr.points();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  dc.formula.assign(K, nan);
  dc.finite_difference.assign(K, nan);
  for (std::size_t k = 0; k < K; ++k) dc.formula[k] = lyapunov_drift(model, lambda, f, tr.q[k]);
  for (std::size_t k = 1; k + 1 < K; ++k) {
    dc.finite_difference[k] =
        (lyapunov(f, tr.q[k + 1]) - lyapunov(f, tr.q[k - 1])) / (tr.t[k + 1] - tr.t[k - 1]);
    if (tr.argmax[k - 1] != tr.argmax[k] || tr.argmax[k] != tr.argmax[k + 1] ||
        (k + 2 < K && tr.argmax[k + 1] != tr.argmax[k + 2])) {
      ++dc.skipped;
      continue;
    }
    ++dc.checked;
    dc.max_residual = std::max(dc.max_residual, std::abs(dc.finite_difference[k] - dc.formula[k]));
  }
  return dc;
}

FeasibilityCheck feasibility_preservation_check(const NetworkModel& model, const RatVec& lambda,
                                                const std::vector<RatVec>& xis,
                                                const FluidTrajectory& tr, double tol) {
  FeasibilityCheck fc;
  if (tr.points() == 0) return fc;
  const RatVec rate = critical_rate(model, lambda);
  const bool multi = model.hop_kind == HopKind::kMulti;
  auto tilde = [&](const Vec& q) { return multi ? upstream_transform(model, q) : q; };
  const Vec q0 = tilde(tr.q.front());
  const Vec w0 = workload(model, xis, tr.q.front());
  for (std::size_t k = 0; k < tr.points(); ++k) {
    const Vec w = workload(model, xis, tr.q[k]);
    for (std::size_t v = 0; v < w.size(); ++v) {
      const double viol = (w0[v] - w[v]) / (1.0 + std::abs(w0[v]));
      fc.max_violation = std::max(fc.max_violation, viol);
    }
    const Vec qt = tilde(tr.q[k]);
    for (std::size_t i = 0; i < qt.size(); ++i) {
      if (sgn(rate[i]) != 0) continue;
      const double viol = (qt[i] - q0[i]) / (1.0 + std::abs(q0[i]));
      fc.max_violation = std::max(fc.max_violation, viol);
    }
  }
  fc.ok = fc.max_violation <= tol;
  return fc;
}

ConvergenceResult convergence_to_invariant(const LiftMap& lift, const FluidTrajectory& tr,
                                           double eps, std::size_t stride) {
  ConvergenceResult cr;
  const std::size_t K = tr.points();
  cr.distance.assign(K, std::numeric_limits<double>::quiet_NaN());
  if (K == 0) return cr;
  stride = std::max<std::size_t>(stride, 1);
  std::optional<std::size_t> first_ok;
  for (std::size_t k = 0; k < K; ++k) {
    if (k % stride != 0 && k + 1 != K) continue;
    const LiftResult r = lift(tr.q[k]);
    const double d = sup_distance(tr.q[k], r.r_star);
    cr.distance[k] = d;
    if (d < eps) {
      if (!first_ok) first_ok = k;
    } else {
      first_ok.reset();
    }
  }
  cr.final_distance = cr.distance[K - 1];
  if (first_ok) cr.hitting_time = tr.t[*first_ok];
  return cr;
}

SampledPath sampled(const FluidTrajectory& traj) { return {traj.t, traj.q}; }

SampledPath sampled(const ScaledPath& path) { return {path.t, path.q}; }

namespace {

Vec value_at(const SampledPath& p, double t) {
  auto it = std::upper_bound(p.t.begin(), p.t.end(), t);
  if (it == p.t.begin()) return p.v.front();
  if (it == p.t.end()) return p.v.back();
  const std::size_t hi = static_cast<std::size_t>(it - p.t.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - p.t[lo]) / (p.t[hi] - p.t[lo]);
  Vec out(p.v[lo].size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p.v[lo][i] + w * (p.v[hi][i] - p.v[lo][i]);
  return out;
}

}  // namespace

double trajectory_distance(const SampledPath& x, const SampledPath& y) {
  if (x.t.empty() || y.t.empty()) throw Error(ErrorCode::kGridMismatch, "empty path");
  const double tx = x.t.back() - x.t.front();
  const double ty = y.t.back() - y.t.front();
  if (std::abs(x.t.front() - y.t.front()) > 1e-9 * (1.0 + std::abs(tx)) ||
      std::abs(tx - ty) > 1e-9 * (1.0 + std::abs(tx))) {
    throw Error(ErrorCode::kGridMismatch, "paths cover different horizons");
  }
  // Both paths are piecewise linear, so the sup of the difference sits on the union grid.
  Vec grid = x.t;
  grid.insert(grid.end(), y.t.begin(), y.t.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double d = 0.0;
  for (double t : grid) d = std::max(d, sup_distance(value_at(x, t), value_at(y, t)));
  return d;
}

}  // namespace swnet
