#include "swnet/lift.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "swnet/error.hpp"
#include "swnet/lp.hpp"
#include "swnet/policy.hpp"

namespace swnet {

double lyapunov(const WeightFunction& f, std::span<const double> q) {
  double s = 0.0;
  for (double x : q) s += f.F(x);
  return s;
}

Vec workload(const NetworkModel& model, const std::vector<RatVec>& xis, std::span<const double> q) {
  const Vec qt = model.hop_kind == HopKind::kMulti ? upstream_transform(model, q)
                                                   : Vec(q.begin(), q.end());
  Vec w;
  w.reserve(xis.size());
  for (const RatVec& xi : xis) w.push_back(dot(xi, qt));
  return w;
}

LiftMap::LiftMap(const NetworkModel& model, const RatVec& lambda, WeightFunction f,
                 std::vector<RatVec> xis, LiftOptions opts)
    : n_(model.n_queues),
      multi_(model.hop_kind == HopKind::kMulti),
      model_(model),
      f_(std::move(f)),
      xis_(std::move(xis)),
      opts_(opts) {
  if (lambda.size() != n_) throw Error(ErrorCode::kDimensionMismatch, "rate vector has wrong length");
  const RatVec rate = critical_rate(model, lambda);
  for (std::size_t k = 0; k < n_; ++k) {
    if (sgn(rate[k]) == 0) capped_.push_back(k);
  }
  // Row v of the workload block is xi^v R~ (the map r -> xi . R~ r).
  for (const RatVec& xi : xis_) {
    if (xi.size() != n_) throw Error(ErrorCode::kDimensionMismatch, "virtual resource has wrong length");
    Vec row(n_, 0.0);
    for (std::size_t m = 0; m < n_; ++m) {
      Rational acc(0);
      for (std::size_t k = 0; k < n_; ++k) {
        if (model.upstream(k, m)) acc += xi[k];
      }
      row[m] = to_double(acc);
    }
    g_rows_.push_back(std::move(row));
  }
  for (std::size_t k : capped_) {
    Vec row(n_, 0.0);
    for (std::size_t m = 0; m < n_; ++m) row[m] = model.upstream(k, m);
    h_rows_.push_back(std::move(row));
  }
}

void LiftMap::constraints(std::span<const double> q, std::vector<Vec>& G, Vec& g,
                          std::vector<Vec>& H, Vec& h) const {
  G = g_rows_;
  H = h_rows_;
  g.clear();
  h.clear();
  for (const Vec& row : g_rows_) g.push_back(dot(row, q));
  for (const Vec& row : h_rows_) h.push_back(dot(row, q));
}

double LiftMap::feasibility_violation(std::span<const double> q, std::span<const double> r) const {
  double scale = 1.0;
  double worst = 0.0;
  for (const Vec& row : g_rows_) {
    const double need = dot(row, q);
    scale = std::max(scale, std::abs(need));
    worst = std::max(worst, need - dot(row, r));
  }
  for (const Vec& row : h_rows_) {
    const double cap = dot(row, q);
    scale = std::max(scale, std::abs(cap));
    worst = std::max(worst, dot(row, r) - cap);
  }
  for (double x : r) worst = std::max(worst, -x);
  return worst / scale;
}

namespace {

/// Dual of min sum F(r) s.t. J r <= c, r >= 0 with J = [-G; H], c = [-g; h].
struct Dual {
  const WeightFunction& f;
  const Eigen::MatrixXd& J;
  const Eigen::VectorXd& c;

  Eigen::VectorXd y(const Eigen::VectorXd& u) const { return -(J.transpose() * u); }

  Eigen::VectorXd primal(const Eigen::VectorXd& u) const {
    Eigen::VectorXd yy = y(u);
    Eigen::VectorXd r(yy.size());
    for (Eigen::Index i = 0; i < yy.size(); ++i) r(i) = f.inverse(std::max(0.0, yy(i)));
    return r;
  }

  double value(const Eigen::VectorXd& u, const Eigen::VectorXd& r) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) s += f.F(r(i));
    return s + u.dot(J * r - c);
  }
};

}  // namespace

LiftResult LiftMap::operator()(std::span<const double> q) const {
  if (q.size() != n_) throw Error(ErrorCode::kDimensionMismatch, "queue vector has wrong length");
  for (double x : q) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument, "lift needs a finite q >= 0");
    }
  }
  const std::size_t mg = g_rows_.size();
  const std::size_t m = mg + h_rows_.size();
  LiftResult res;
  if (m == 0) {
    res.r_star.assign(n_, 0.0);
    res.converged = true;
    return res;
  }

  Eigen::MatrixXd J(m, n_);
  Eigen::VectorXd c(m);
  for (std::size_t i = 0; i < mg; ++i) {
    for (std::size_t k = 0; k < n_; ++k) J(i, k) = -g_rows_[i][k];
    c(i) = -dot(g_rows_[i], q);
  }
  for (std::size_t i = 0; i < h_rows_.size(); ++i) {
    for (std::size_t k = 0; k < n_; ++k) J(mg + i, k) = h_rows_[i][k];
    c(mg + i) = dot(h_rows_[i], q);
  }
  const double cscale = 1.0 + c.lpNorm<Eigen::Infinity>();
  const Dual dual{f_, J, c};

  // Start: each workload multiplier set as if its constraint were alone and tight.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < mg; ++i) {
    const double nn = g_rows_[i].empty() ? 0.0 : dot(g_rows_[i], g_rows_[i]);
    const double need = -c(i);
    if (nn > 0.0 && need > 0.0) u(i) = f_.f(need / nn);
  }

  auto residual = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& r) {
    const Eigen::VectorXd g = J * r - c;
    const double us = 1.0 + uu.lpNorm<Eigen::Infinity>();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::max(0.0, g(i)) / cscale);
      worst = std::max(worst, uu(i) * std::abs(g(i)) / (us * cscale));
    }
    for (Eigen::Index i = 0; i < r.size(); ++i) worst = std::max(worst, -r(i) / cscale);
    return worst;
  };

  Eigen::VectorXd r = dual.primal(u);
  double val = dual.value(u, r);
  double kkt = residual(u, r);
  int it = 0;
  // Besides the KKT tolerance, iterate until r settles: near degenerate constraints
  // (tight with zero multiplier) the residual is small long before r is accurate.
  double dr = HUGE_VAL;
  auto settled = [&] { return dr <= 1e-13 * (1.0 + r.lpNorm<Eigen::Infinity>()); };
  for (; it < opts_.max_iterations && (kkt > opts_.kkt_tol || !settled()); ++it) {
    const Eigen::VectorXd r_prev = r;
    const Eigen::VectorXd grad = J * r - c;
    const Eigen::VectorXd yy = dual.y(u);
    // Bound-active set: at zero and the gradient pushes outward.
    const double eps_act = std::min(1e-12 * (1.0 + u.lpNorm<Eigen::Infinity>()), grad.lpNorm<Eigen::Infinity>());
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (!(u(i) <= eps_act && grad(i) <= 0.0)) free.push_back(i);
    }
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(m);
    if (!free.empty()) {
      const Eigen::Index k = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Hs = Eigen::MatrixXd::Zero(k, k);
      Eigen::VectorXd gs(k);
      Eigen::VectorXd dinv(n_);
      for (std::size_t j = 0; j < n_; ++j) {
        const double yj = yy(static_cast<Eigen::Index>(j));
        double d = yj > 0.0 ? f_.inverse_derivative(yj) : 0.0;
        if (!std::isfinite(d)) d = 1e300;
        dinv(static_cast<Eigen::Index>(j)) = d;
      }
      for (Eigen::Index a = 0; a < k; ++a) {
        gs(a) = grad(free[a]);
        for (Eigen::Index b = 0; b < k; ++b) {
          double s = 0.0;
          for (std::size_t j = 0; j < n_; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            s += J(free[a], jj) * dinv(jj) * J(free[b], jj);
          }
          Hs(a, b) = s;
        }
      }
      const double diag = Hs.diagonal().cwiseAbs().maxCoeff();
      const double damp = 1e-10 * (1.0 + diag) + 1e-3 * std::min(1.0, kkt) * (1.0 + diag);
      Hs.diagonal().array() += damp;
      const Eigen::VectorXd ds = Hs.ldlt().solve(gs);
      for (Eigen::Index a = 0; a < k; ++a) dir(free[a]) = ds(a);
      if (!dir.allFinite()) dir = Eigen::VectorXd::Zero(m);
    }

    // Armijo along the projected Newton path; fall back to projected gradient.
    auto try_path = [&](const Eigen::VectorXd& d, double s0) {
      double s = s0;
      for (int bt = 0; bt < 60; ++bt, s *= 0.5) {
        Eigen::VectorXd un = (u + s * d).cwiseMax(0.0);
        Eigen::VectorXd rn = dual.primal(un);
        const double vn = dual.value(un, rn);
        const bool armijo = vn >= val + 1e-4 * grad.dot(un - u);
        // A full step that only loses rounding noise is kept so Newton can finish.
        const bool flat = bt == 0 && vn >= val - 1e-14 * (1.0 + std::abs(val));
        if (armijo || flat) {
          if ((un - u).lpNorm<Eigen::Infinity>() == 0.0) return false;
          u = std::move(un);
          r = std::move(rn);
          val = vn;
          return true;
        }
      }
      return false;
    };
    bool moved = dir.lpNorm<Eigen::Infinity>() > 0.0 && try_path(dir, 1.0);
    if (!moved) {
      // Gradient step scaled by the curvature along the gradient.
      double curv = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double yj = yy(jj);
        const double d = yj > 0.0 ? f_.inverse_derivative(yj) : 0.0;
        curv = std::max(curv, std::isfinite(d) ? d : 1e300);
      }
      const double jn = J.squaredNorm();
      const double s0 = 1.0 / std::max(1e-300, (1.0 + curv) * (1.0 + jn));
      moved = try_path(grad, s0 * 1e6);
    }
    kkt = residual(u, r);
    dr = (r - r_prev).lpNorm<Eigen::Infinity>();
    if (!moved) break;
  }

  res.r_star.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) res.r_star[k] = r(static_cast<Eigen::Index>(k));
  res.multipliers.assign(u.data(), u.data() + u.size());
  res.kkt_residual = kkt;
  res.iterations = it;
  res.converged = kkt <= opts_.kkt_tol;
  if (!res.converged && opts_.throw_on_divergence) {
    throw Error(ErrorCode::kSolverDivergence,
                "lift did not reach KKT tolerance (residual " + std::to_string(kkt) + ")");
  }
  return res;
}

LiftMap make_lift_map(const NetworkModel& model, const RatVec& lambda, const WeightFunction& f,
                      const VirtualResourceSet& vrs, bool use_clvr_plus, LiftOptions opts) {
  const CriticalSets crit = critically_loaded(vrs, critical_rate(model, lambda));
  return LiftMap(model, lambda, f, use_clvr_plus ? crit.xi_plus(vrs) : crit.xi(vrs), opts);
}

LiftResult lift(const NetworkModel& model, const RatVec& lambda, const WeightFunction& f,
                const std::vector<RatVec>& xis, std::span<const double> q, LiftOptions opts) {
  return LiftMap(model, lambda, f, xis, opts)(q);
}

double lyapunov_drift(const NetworkModel& model, const Vec& lambda, const WeightFunction& f,
                      std::span<const double> q) {
  double lf = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) lf += lambda[k] * f.f(q[k]);
  return lf - max_schedule_weight(model, f, q);
}

bool invariant_state_test(const NetworkModel& model, const Vec& lambda, const WeightFunction& f,
                          std::span<const double> q, double tol) {
  const double best = max_schedule_weight(model, f, q);
  double lf = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) lf += lambda[k] * f.f(q[k]);
  return std::abs(lf - best) <= tol * (1.0 + std::abs(best));
}

RepresentationCheck representation_check(const NetworkModel& model, const Vec& lambda,
                                         std::span<const double> q, std::span<const double> r,
                                         double tol) {
  const std::size_t n = model.n_queues;
  const std::size_t ns = model.schedules.size();
  const bool multi = model.hop_kind == HopKind::kMulti;
  // Variables beta_pi = t a_pi >= 0 (so t = sum beta) and the residual e >= 0.
  std::vector<Vec> dirs(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const Vec served = multi ? net_outflow(model, model.schedules[i]) : model.schedules[i];
    dirs[i].resize(n);
    for (std::size_t k = 0; k < n; ++k) dirs[i][k] = lambda[k] - served[k];
  }
  double scale = 1.0;
  for (std::size_t k = 0; k < n; ++k) scale = std::max({scale, std::abs(q[k]), std::abs(r[k])});
  const double zero_tol = 1e-9 * scale;

  lp::Problem<double> p;
  p.cost.assign(ns + 1, 0.0);
  p.cost[ns] = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    Vec row(ns + 1);
    for (std::size_t i = 0; i < ns; ++i) row[i] = dirs[i][k];
    const double target = r[k] - q[k];
    if (multi || r[k] > zero_tol) {
      // |q + sum beta d - r| <= e
      row[ns] = -1.0;
      p.add(row, lp::Relation::kLe, target);
      row[ns] = 1.0;
      p.add(row, lp::Relation::kGe, target);
    } else {
      // q + sum beta d <= e
      row[ns] = -1.0;
      p.add(row, lp::Relation::kLe, -q[k]);
    }
  }
  const auto res = lp::solve(p);
  RepresentationCheck out;
  if (res.status != lp::Status::kOptimal) return out;
  double t = 0.0;
  for (std::size_t i = 0; i < ns; ++i) t += res.x[i];
  out.t = t;
  out.sigma.assign(n, 0.0);
  if (t > 0.0) {
    for (std::size_t i = 0; i < ns; ++i) {
      for (std::size_t k = 0; k < n; ++k) out.sigma[k] += res.x[i] / t * model.schedules[i][k];
    }
  }
  // Recompute the residual directly rather than trusting the LP's e.
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double v = q[k];
    for (std::size_t i = 0; i < ns; ++i) v += res.x[i] * dirs[i][k];
    const double rep = multi ? v : std::max(v, 0.0);
    worst = std::max(worst, std::abs(rep - r[k]));
  }
  out.residual = worst / scale;
  out.ok = out.residual <= tol;
  return out;
}

}  // namespace swnet
