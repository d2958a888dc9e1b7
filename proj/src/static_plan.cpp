#include "swnet/static_plan.hpp"

#include <algorithm>
#include <cmath>

#include "swnet/error.hpp"
#include "swnet/lp.hpp"

namespace swnet {

namespace {

RatVec schedule_rat(const Vec& pi) { return exact_rational(pi); }

std::vector<RatVec> schedules_rat(const NetworkModel& model) {
  std::vector<RatVec> out;
  for (const Vec& pi : model.schedules) out.push_back(schedule_rat(pi));
  return out;
}

void check_rate(const NetworkModel& model, const RatVec& lambda) {
  if (lambda.size() != model.n_queues) {
    throw Error(ErrorCode::kDimensionMismatch, "rate vector has wrong length");
  }
  for (const auto& x : lambda) {
    if (sgn(x) < 0) throw Error(ErrorCode::kInvalidArgument, "rate vector must be >= 0");
  }
}

lp::Problem<Rational> primal_problem(const std::vector<RatVec>& s, const RatVec& lambda) {
  lp::Problem<Rational> p;
  p.cost.assign(s.size(), Rational(1));
  for (std::size_t n = 0; n < lambda.size(); ++n) {
    RatVec row(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) row[i] = s[i][n];
    p.add(std::move(row), lp::Relation::kGe, lambda[n]);
  }
  return p;
}

}  // namespace

PrimalResult solve_primal(const NetworkModel& model, const RatVec& lambda) {
  check_rate(model, lambda);
  const auto s = schedules_rat(model);
  const auto res = lp::solve(primal_problem(s, lambda));
  PrimalResult out;
  if (res.status != lp::Status::kOptimal) {
    out.feasible = false;
    return out;
  }
  out.value = res.value;
  out.alpha = res.x;
  return out;
}

DualResult solve_dual(const NetworkModel& model, const RatVec& lambda) {
  check_rate(model, lambda);
  const auto s = schedules_rat(model);
  lp::Problem<Rational> p;
  for (const auto& x : lambda) p.cost.push_back(-x);
  for (const RatVec& pi : s) p.add(pi, lp::Relation::kLe, Rational(1));
  const auto res = lp::solve(p);
  DualResult out;
  if (res.status != lp::Status::kOptimal) {
    out.bounded = false;
    return out;
  }
  out.value = -res.value;
  out.xi = res.x;
  return out;
}

std::string to_string(LoadKind kind) {
  switch (kind) {
    case LoadKind::kStrictlyAdmissible: return "strictly_admissible";
    case LoadKind::kCritical: return "critical";
    case LoadKind::kInadmissible: return "inadmissible";
  }
  return "?";
}

LoadClass classify_load(const NetworkModel& model, const RatVec& lambda) {
  const PrimalResult pr = solve_primal(model, lambda);
  LoadClass c;
  c.finite = pr.feasible;
  if (!pr.feasible) {
    c.kind = LoadKind::kInadmissible;
    c.primal_value_double = HUGE_VAL;
    return c;
  }
  c.primal_value = pr.value;
  c.primal_value_double = to_double(pr.value);
  const int c1 = cmp(pr.value, Rational(1));
  c.kind = c1 < 0 ? LoadKind::kStrictlyAdmissible
                   : (c1 == 0 ? LoadKind::kCritical : LoadKind::kInadmissible);
  return c;
}

LoadClass classify_load(const NetworkModel& model, const Vec& lambda, double tol) {
  if (lambda.size() != model.n_queues) {
    throw Error(ErrorCode::kDimensionMismatch, "rate vector has wrong length");
  }
  lp::Problem<double> p;
  p.cost.assign(model.schedules.size(), 1.0);
  for (std::size_t n = 0; n < lambda.size(); ++n) {
    std::vector<double> row;
    for (const Vec& pi : model.schedules) row.push_back(pi[n]);
    p.add(std::move(row), lp::Relation::kGe, lambda[n]);
  }
  const auto res = lp::solve(p);
  LoadClass c;
  c.approximate = true;
  if (res.status != lp::Status::kOptimal) {
    c.finite = false;
    c.kind = LoadKind::kInadmissible;
    c.primal_value_double = HUGE_VAL;
    return c;
  }
  c.primal_value_double = res.value;
  c.primal_value = exact_rational(res.value);
  c.kind = std::abs(res.value - 1.0) <= tol
               ? LoadKind::kCritical
               : (res.value < 1.0 ? LoadKind::kStrictlyAdmissible : LoadKind::kInadmissible);
  return c;
}

double vertex_candidate_count(std::size_t n_queues, std::size_t n_schedules) {
  // C(N + |S|, N) computed in floating point; only compared against a budget.
  double c = 1.0;
  for (std::size_t k = 1; k <= n_queues; ++k) {
    c = c * static_cast<double>(n_schedules + k) / static_cast<double>(k);
  }
  return c;
}

namespace {

/// Solves the square system a x = b exactly; nullopt when singular.
std::optional<RatVec> solve_square(std::vector<RatVec> a, RatVec b) {
  const std::size_t k = b.size();
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = k;
    for (std::size_t r = col; r < k; ++r) {
      if (sgn(a[r][col]) != 0) {
        piv = r;
        break;
      }
    }
    if (piv == k) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col || sgn(a[r][col]) == 0) continue;
      const Rational f = a[r][col] / a[col][col];
      for (std::size_t j = col; j < k; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  RatVec x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = b[i] / a[i][i];
  return x;
}

std::size_t rank_of(std::vector<RatVec> rows, std::size_t ncols) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < ncols && rank < rows.size(); ++col) {
    std::size_t piv = rows.size();
    for (std::size_t r = rank; r < rows.size(); ++r) {
      if (sgn(rows[r][col]) != 0) {
        piv = r;
        break;
      }
    }
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (sgn(rows[r][col]) == 0) continue;
      const Rational f = rows[r][col] / rows[rank][col];
      for (std::size_t j = col; j < ncols; ++j) rows[r][j] -= f * rows[rank][j];
    }
    ++rank;
  }
  return rank;
}

bool dominated_by(const RatVec& a, const RatVec& b) {
  // a <= b componentwise and a != b
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int c = cmp(a[i], b[i]);
    if (c > 0) return false;
    if (c < 0) strict = true;
  }
  return strict;
}

/// Visits every k-subset of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

bool is_dual_vertex(const NetworkModel& model, const RatVec& xi) {
  const std::size_t n = model.n_queues;
  if (xi.size() != n) return false;
  std::vector<RatVec> tight;
  for (std::size_t k = 0; k < n; ++k) {
    if (sgn(xi[k]) < 0) return false;
    if (sgn(xi[k]) == 0) {
      RatVec e(n, Rational(0));
      e[k] = 1;
      tight.push_back(std::move(e));
    }
  }
  for (const RatVec& pi : schedules_rat(model)) {
    const Rational v = dot(pi, xi);
    if (v > 1) return false;
    if (v == 1) tight.push_back(pi);
  }
  return rank_of(std::move(tight), n) == n;
}

std::vector<RatVec> VirtualResourceSet::s_star() const {
  std::vector<RatVec> out;
  for (std::size_t i : maximal) out.push_back(vertices[i]);
  return out;
}

VirtualResourceSet enumerate_dual_vertices(const NetworkModel& model, double budget) {
  const std::size_t n = model.n_queues;
  const std::size_t ns = model.schedules.size();
  const double count = vertex_candidate_count(n, ns);
  if (count > budget) {
    throw Error(ErrorCode::kBudgetExceeded,
                "vertex enumeration needs " + std::to_string(static_cast<long long>(count)) +
                    " candidate bases, budget is " + std::to_string(static_cast<long long>(budget)));
  }
  const auto s = schedules_rat(model);
  std::vector<RatVec> found;

  // A vertex has k tight schedule constraints and N - k tight coordinates xi_z = 0; the
  // remaining k coordinates solve a k x k system.
  for (std::size_t k = 0; k <= std::min(n, ns); ++k) {
    for_each_subset(ns, k, [&](const std::vector<std::size_t>& tight) {
      for_each_subset(n, k, [&](const std::vector<std::size_t>& free) {
        RatVec xi(n, Rational(0));
        if (k > 0) {
          std::vector<RatVec> a(k, RatVec(k));
          RatVec b(k, Rational(1));
          for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c < k; ++c) a[r][c] = s[tight[r]][free[c]];
          }
          auto sol = solve_square(std::move(a), std::move(b));
          if (!sol) return;
          for (std::size_t c = 0; c < k; ++c) {
            if (sgn((*sol)[c]) < 0) return;
            xi[free[c]] = (*sol)[c];
          }
        }
        for (const RatVec& pi : s) {
          if (dot(pi, xi) > 1) return;
        }
        found.push_back(std::move(xi));
      });
    });
  }
  std::sort(found.begin(), found.end(), lex_less);
  found.erase(std::unique(found.begin(), found.end()), found.end());

  VirtualResourceSet vrs;
  vrs.vertices = std::move(found);
  for (std::size_t i = 0; i < vrs.vertices.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < vrs.vertices.size() && maximal; ++j) {
      if (j != i && dominated_by(vrs.vertices[i], vrs.vertices[j])) maximal = false;
    }
    if (maximal) vrs.maximal.push_back(i);
  }
  return vrs;
}

std::vector<RatVec> CriticalSets::xi(const VirtualResourceSet& vrs) const {
  std::vector<RatVec> out;
  for (std::size_t i : clvr) out.push_back(vrs.vertices[i]);
  return out;
}

std::vector<RatVec> CriticalSets::xi_plus(const VirtualResourceSet& vrs) const {
  std::vector<RatVec> out;
  for (std::size_t i : clvr_plus) out.push_back(vrs.vertices[i]);
  return out;
}

CriticalSets critically_loaded(const VirtualResourceSet& vrs, const RatVec& rate) {
  CriticalSets c;
  for (std::size_t i = 0; i < vrs.vertices.size(); ++i) {
    if (vrs.vertices[i].size() != rate.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "rate vector has wrong length");
    }
    if (dot(vrs.vertices[i], rate) == 1) c.clvr_plus.push_back(i);
  }
  for (std::size_t i : vrs.maximal) {
    if (std::binary_search(c.clvr_plus.begin(), c.clvr_plus.end(), i)) c.clvr.push_back(i);
  }
  return c;
}

RatVec critical_rate(const NetworkModel& model, const RatVec& lambda) {
  return model.hop_kind == HopKind::kSingle ? lambda : upstream_transform(model, lambda);
}

CompleteLoading complete_loading_check(const NetworkModel& model, const VirtualResourceSet& vrs,
                                       const CriticalSets& crit) {
  const std::size_t n = model.n_queues;
  CompleteLoading out;
  Rational smax(0);
  for (const RatVec& pi : schedules_rat(model)) {
    Rational t(0);
    for (const auto& x : pi) t += x;
    if (t > smax) smax = t;
  }
  out.target.assign(n, sgn(smax) > 0 ? Rational(1) / smax : Rational(0));
  if (crit.clvr.empty()) return out;

  // Variables (a, t): among all convex weights reaching the target, maximize the
  // smallest weight t, which picks the balanced combination when several exist.
  const std::size_t k_res = crit.clvr.size();
  lp::Problem<Rational> p;
  p.cost.assign(k_res + 1, Rational(0));
  p.cost[k_res] = -1;
  for (std::size_t k = 0; k < n; ++k) {
    RatVec row;
    for (std::size_t i : crit.clvr) row.push_back(vrs.vertices[i][k]);
    row.push_back(Rational(0));
    p.add(std::move(row), lp::Relation::kEq, out.target[k]);
  }
  RatVec ones(k_res, Rational(1));
  ones.push_back(Rational(0));
  p.add(std::move(ones), lp::Relation::kEq, Rational(1));
  for (std::size_t v = 0; v < k_res; ++v) {
    RatVec row(k_res + 1, Rational(0));
    row[v] = 1;
    row[k_res] = -1;
    p.add(std::move(row), lp::Relation::kGe, Rational(0));
  }
  const auto res = lp::solve(p);
  if (res.status == lp::Status::kOptimal) {
    out.holds = true;
    out.weights.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(k_res));
  }
  return out;
}

std::optional<RatVec> hull_weights(const NetworkModel& model, const RatVec& sigma) {
  if (sigma.size() != model.n_queues) {
    throw Error(ErrorCode::kDimensionMismatch, "sigma has wrong length");
  }
  const auto s = schedules_rat(model);
  lp::Problem<Rational> p;
  p.cost.assign(s.size(), Rational(0));
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    RatVec row;
    for (const RatVec& pi : s) row.push_back(pi[k]);
    p.add(std::move(row), lp::Relation::kEq, sigma[k]);
  }
  p.add(RatVec(s.size(), Rational(1)), lp::Relation::kEq, Rational(1));
  auto res = lp::solve(p);
  if (res.status != lp::Status::kOptimal) return std::nullopt;
  return res.x;
}

bool hull_membership(const NetworkModel& model, const RatVec& sigma) {
  return hull_weights(model, sigma).has_value();
}

bool dominated_membership(const NetworkModel& model, const RatVec& sigma) {
  if (sigma.size() != model.n_queues) {
    throw Error(ErrorCode::kDimensionMismatch, "sigma has wrong length");
  }
  const auto s = schedules_rat(model);
  lp::Problem<Rational> p;
  p.cost.assign(s.size(), Rational(0));
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    RatVec row;
    for (const RatVec& pi : s) row.push_back(pi[k]);
    p.add(std::move(row), lp::Relation::kGe, sigma[k]);
  }
  p.add(RatVec(s.size(), Rational(1)), lp::Relation::kEq, Rational(1));
  return lp::solve(p).status == lp::Status::kOptimal;
}

}  // namespace swnet
