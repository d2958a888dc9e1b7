#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "swnet/rational.hpp"

namespace swnet::lp {

enum class Relation { kLe, kGe, kEq };
enum class Status { kOptimal, kInfeasible, kUnbounded };

template <class T>
struct Problem {
  /// minimize c.x subject to rows[i].x (rel[i]) rhs[i], x >= 0
  std::vector<std::vector<T>> rows;
  std::vector<Relation> rel;
  std::vector<T> rhs;
  std::vector<T> cost;

  void add(std::vector<T> row, Relation r, T b) {
    rows.push_back(std::move(row));
    rel.push_back(r);
    rhs.push_back(std::move(b));
  }
};

template <class T>
struct Result {
  Status status = Status::kInfeasible;
  T value{};
  std::vector<T> x;
};

template <class T>
struct Arith;

template <>
struct Arith<Rational> {
  static bool zero(const Rational& x) { return sgn(x) == 0; }
  static bool neg(const Rational& x) { return sgn(x) < 0; }
  static bool pos(const Rational& x) { return sgn(x) > 0; }
};

template <>
struct Arith<double> {
  static constexpr double kEps = 1e-11;
  static bool zero(double x) { return std::abs(x) <= kEps; }
  static bool neg(double x) { return x < -kEps; }
  static bool pos(double x) { return x > kEps; }
};

/// Dense two-phase tableau simplex with Bland's rule. Exact over Rational; over double
/// pivots are thresholded at Arith<double>::kEps.
template <class T>
Result<T> solve(const Problem<T>& p) {
  using A = Arith<T>;
  const std::size_t m = p.rows.size();
  const std::size_t nv = p.cost.size();
  std::size_t n_slack = 0;
  for (Relation r : p.rel) n_slack += r != Relation::kEq;
  const std::size_t art0 = nv + n_slack;
  const std::size_t ncol = art0 + m;

  std::vector<std::vector<T>> tab(m, std::vector<T>(ncol + 1, T(0)));
  std::vector<std::size_t> basis(m);
  std::size_t slack = nv;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nv && j < p.rows[i].size(); ++j) tab[i][j] = p.rows[i][j];
    if (p.rel[i] == Relation::kLe) tab[i][slack++] = T(1);
    if (p.rel[i] == Relation::kGe) tab[i][slack++] = T(-1);
    tab[i][ncol] = p.rhs[i];
    if (A::neg(tab[i][ncol])) {
      for (auto& v : tab[i]) v = -v;
    }
    tab[i][art0 + i] = T(1);
    basis[i] = art0 + i;
  }

  std::vector<T> obj(ncol + 1, T(0));
  auto pivot = [&](std::size_t r, std::size_t c) {
    const T piv = tab[r][c];
    for (auto& v : tab[r]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || A::zero(tab[i][c])) continue;
      const T f = tab[i][c];
      for (std::size_t j = 0; j <= ncol; ++j) tab[i][j] -= f * tab[r][j];
    }
    if (!A::zero(obj[c])) {
      const T f = obj[c];
      for (std::size_t j = 0; j <= ncol; ++j) obj[j] -= f * tab[r][j];
    }
    basis[r] = c;
  };
  // Returns false if unbounded.
  auto iterate = [&](std::size_t limit_col) {
    for (;;) {
      std::size_t enter = limit_col;
      for (std::size_t j = 0; j < limit_col; ++j) {
        if (A::neg(obj[j])) {
          enter = j;
          break;
        }
      }
      if (enter == limit_col) return true;
      std::size_t leave = m;
      T best{};
      for (std::size_t i = 0; i < m; ++i) {
        if (!A::pos(tab[i][enter])) continue;
        const T ratio = tab[i][ncol] / tab[i][enter];
        if (leave == m || ratio < best || (!(best < ratio) && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  };

  // Phase 1: minimize the sum of artificials.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= ncol; ++j) {
      if (j < art0 || j == ncol) obj[j] -= tab[i][j];
    }
  }
  iterate(ncol);
  Result<T> res;
  if (A::neg(obj[ncol])) {
    res.status = Status::kInfeasible;
    return res;
  }
  // Drive remaining artificials out of the basis; rows with no usable pivot are redundant.
  std::vector<bool> dead(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < art0) continue;
    std::size_t c = art0;
    for (std::size_t j = 0; j < art0; ++j) {
      if (!A::zero(tab[i][j])) {
        c = j;
        break;
      }
    }
    if (c == art0) {
      dead[i] = true;
    } else {
      pivot(i, c);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!dead[i]) continue;
    for (auto& v : tab[i]) v = T(0);
  }

  // Phase 2 with the real costs over non-artificial columns.
  std::fill(obj.begin(), obj.end(), T(0));
  for (std::size_t j = 0; j < nv; ++j) obj[j] = p.cost[j];
  for (std::size_t i = 0; i < m; ++i) {
    if (dead[i] || basis[i] >= nv) continue;
    const T cb = obj[basis[i]];
    if (A::zero(cb)) continue;
    for (std::size_t j = 0; j <= ncol; ++j) obj[j] -= cb * tab[i][j];
  }
  if (!iterate(art0)) {
    res.status = Status::kUnbounded;
    return res;
  }
  res.status = Status::kOptimal;
  res.x.assign(nv, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (!dead[i] && basis[i] < nv) res.x[basis[i]] = tab[i][ncol];
  }
  res.value = T(0);
  for (std::size_t j = 0; j < nv; ++j) res.value += p.cost[j] * res.x[j];
  return res;
}

}  // namespace swnet::lp
