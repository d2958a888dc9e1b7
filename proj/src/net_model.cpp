#include "swnet/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "swnet/error.hpp"

namespace swnet {

ScheduleSet::ScheduleSet(std::vector<Vec> schedules) : schedules_(std::move(schedules)) {
  if (schedules_.empty()) throw Error(ErrorCode::kEmptyScheduleSet, "schedule set is empty");
  const std::size_t n = schedules_.front().size();
  for (const Vec& pi : schedules_) {
    if (pi.size() != n) throw Error(ErrorCode::kDimensionMismatch, "schedules differ in length");
    for (double x : pi) {
      if (!std::isfinite(x) || x < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "schedule entries must be finite and >= 0");
      }
    }
  }
}

std::optional<std::size_t> ScheduleSet::find(const Vec& pi) const {
  for (std::size_t i = 0; i < schedules_.size(); ++i) {
    if (schedules_[i] == pi) return i;
  }
  return std::nullopt;
}

BinaryMatrix BinaryMatrix::identity(std::size_t n) {
  BinaryMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

bool BinaryMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](int v) { return v == 0; });
}

// ---------------------------------------------------------------------------
// WeightFunction

WeightFunction WeightFunction::power(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "power weight needs alpha > 0");
  }
  WeightFunction w;
  w.is_power_ = true;
  w.alpha_ = alpha;
  w.name_ = "power";
  return w;
}

WeightFunction WeightFunction::log1p() {
  return custom(
      "log1p", [](double x) { return std::log1p(x); },
      [](double x) { return (1.0 + x) * std::log1p(x) - x; },
      [](double x) { return 1.0 / (1.0 + x); }, [](double y) { return std::expm1(y); });
}

WeightFunction WeightFunction::custom(std::string name, std::function<double(double)> f,
                                      std::function<double(double)> integral,
                                      std::function<double(double)> derivative,
                                      std::function<double(double)> inverse) {
  WeightFunction w;
  w.is_power_ = false;
  w.alpha_ = 0.0;
  w.name_ = std::move(name);
  w.f_ = std::move(f);
  w.integral_ = std::move(integral);
  w.derivative_ = std::move(derivative);
  w.inverse_ = std::move(inverse);
  return w;
}

double WeightFunction::f(double x) const {
  if (is_power_) {
    if (x <= 0.0) return 0.0;
    return alpha_ == 1.0 ? x : std::pow(x, alpha_);
  }
  return f_(x);
}

double WeightFunction::F(double x) const {
  if (is_power_) {
    if (x <= 0.0) return 0.0;
    return alpha_ == 1.0 ? 0.5 * x * x : std::pow(x, 1.0 + alpha_) / (1.0 + alpha_);
  }
  return integral_(x);
}

double WeightFunction::derivative(double x) const {
  if (is_power_) {
    if (alpha_ == 1.0) return 1.0;
    if (x <= 0.0) return alpha_ < 1.0 ? HUGE_VAL : (alpha_ == 1.0 ? 1.0 : 0.0);
    return alpha_ * std::pow(x, alpha_ - 1.0);
  }
  return derivative_(x);
}

double WeightFunction::inverse(double y) const {
  if (y <= 0.0) return 0.0;
  if (is_power_) return alpha_ == 1.0 ? y : std::pow(y, 1.0 / alpha_);
  if (inverse_) return inverse_(y);
  // Safeguarded Newton on the monotone f, bracketed by doubling.
  double lo = 0.0;
  double hi = 1.0;
  while (f_(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f_(x) - y;
    if (fx > 0.0) hi = x; else lo = x;
    const double d = derivative_(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

double WeightFunction::inverse_derivative(double y) const {
  if (y <= 0.0) {
    if (is_power_) return alpha_ == 1.0 ? 1.0 : (alpha_ < 1.0 ? 0.0 : HUGE_VAL);
    return 1.0 / derivative(0.0);
  }
  if (is_power_) {
    if (alpha_ == 1.0) return 1.0;
    return std::pow(y, 1.0 / alpha_ - 1.0) / alpha_;
  }
  return 1.0 / derivative(inverse(y));
}

std::string WeightFunction::describe() const {
  if (!is_power_) return name_;
  char buf[64];
  std::snprintf(buf, sizeof buf, "x^%.17g", alpha_);
  return buf;
}

// ---------------------------------------------------------------------------
// NetworkModel

std::optional<std::size_t> NetworkModel::downstream(std::size_t n) const {
  for (std::size_t m = 0; m < n_queues; ++m) {
    if (routing(n, m) == 1) return m;
  }
  return std::nullopt;
}

double NetworkModel::max_total_service() const {
  double best = 0.0;
  for (const Vec& pi : schedules) best = std::max(best, total(pi));
  return best;
}

namespace {

UpstreamMatrix compute_upstream(const RoutingMatrix& routing) {
  const std::size_t n = routing.size();
  // Term (R^T)^k, accumulated for k = 0..n-1; acyclicity makes (R^T)^n = 0.
  UpstreamMatrix sum = BinaryMatrix::identity(n);
  BinaryMatrix term = BinaryMatrix::identity(n);
  for (std::size_t k = 1; k < n; ++k) {
    BinaryMatrix next(n);
    bool nonzero = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (term(i, j) == 0) continue;
        // (term * R^T)(i, l) = sum_j term(i, j) R(l, j)
        for (std::size_t l = 0; l < n; ++l) {
          if (routing(l, j) == 1) {
            next(i, l) += term(i, j);
            nonzero = true;
          }
        }
      }
    }
    if (!nonzero) break;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) sum(i, j) += next(i, j);
    }
    term = next;
  }
  return sum;
}

bool has_cycle(const RoutingMatrix& routing) {
  const std::size_t n = routing.size();
  for (std::size_t start = 0; start < n; ++start) {
    std::size_t at = start;
    for (std::size_t hops = 0; hops <= n; ++hops) {
      std::optional<std::size_t> next;
      for (std::size_t j = 0; j < n; ++j) {
        if (routing(at, j) == 1) next = j;
      }
      if (!next) break;
      if (*next == start) return true;
      at = *next;
    }
  }
  return false;
}

}  // namespace

NetworkModel validate_network(ScheduleSet schedules, RoutingMatrix routing, std::string name) {
  if (schedules.size() == 0) throw Error(ErrorCode::kEmptyScheduleSet, "schedule set is empty");
  const std::size_t n = schedules.dim();
  if (routing.size() == 0 && n > 0) routing = RoutingMatrix(n);
  if (routing.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "routing matrix is not N x N");
  }
  for (std::size_t m = 0; m < n; ++m) {
    int ones = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const int v = routing(m, j);
      if (v != 0 && v != 1) throw Error(ErrorCode::kInvalidArgument, "routing entries must be 0/1");
      ones += v;
    }
    if (ones > 1) {
      throw Error(ErrorCode::kMultipleDownstream,
                  "queue " + std::to_string(m + 1) + " has more than one downstream queue");
    }
  }
  if (has_cycle(routing)) throw Error(ErrorCode::kCyclicRouting, "routing graph has a cycle");

  NetworkModel model;
  model.name = std::move(name);
  model.n_queues = n;
  model.hop_kind = routing.is_zero() ? HopKind::kSingle : HopKind::kMulti;
  model.upstream = compute_upstream(routing);
  model.routing = std::move(routing);
  model.monotone_closed = is_monotone_closed(schedules);
  model.schedules = std::move(schedules);
  return model;
}

ScheduleSet monotone_closure(const ScheduleSet& schedules) {
  std::vector<Vec> out = schedules.schedules();
  std::set<Vec> seen(out.begin(), out.end());
  // Each schedule generates all zeroings of its support; process in order so the
  // appended part is deterministic.
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const Vec pi = out[idx];
    for (std::size_t n = 0; n < pi.size(); ++n) {
      if (pi[n] == 0.0) continue;
      Vec rho = pi;
      rho[n] = 0.0;
      if (seen.insert(rho).second) out.push_back(std::move(rho));
    }
  }
  return ScheduleSet(std::move(out));
}

bool is_monotone_closed(const ScheduleSet& schedules) {
  std::set<Vec> seen(schedules.begin(), schedules.end());
  // Closure under single-component zeroing implies closure under all zeroings.
  for (const Vec& pi : schedules) {
    for (std::size_t n = 0; n < pi.size(); ++n) {
      if (pi[n] == 0.0) continue;
      Vec rho = pi;
      rho[n] = 0.0;
      if (!seen.count(rho)) return false;
    }
  }
  return true;
}

Vec upstream_transform(const NetworkModel& model, std::span<const double> x) {
  const std::size_t n = model.n_queues;
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (model.upstream(i, j)) out[i] += x[j];
    }
  }
  return out;
}

RatVec upstream_transform(const NetworkModel& model, const RatVec& x) {
  const std::size_t n = model.n_queues;
  RatVec out(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (model.upstream(i, j)) out[i] += x[j];
    }
  }
  return out;
}

Vec routing_apply(const NetworkModel& model, std::span<const double> x) {
  const std::size_t n = model.n_queues;
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (model.routing(i, j)) out[i] += x[j];
    }
  }
  return out;
}

Vec net_outflow(const NetworkModel& model, std::span<const double> x) {
  const std::size_t n = model.n_queues;
  Vec out(x.begin(), x.end());
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t j = 0; j < n; ++j) {
      if (model.routing(m, j)) out[j] -= x[m];
    }
  }
  return out;
}

RoutingMatrix routing_from_pairs(std::size_t n_queues,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  RoutingMatrix r(n_queues);
  for (const auto& [m, n] : pairs) {
    if (m < 1 || n < 1 || m > n_queues || n > n_queues) {
      throw Error(ErrorCode::kDimensionMismatch, "routing pair out of range");
    }
    r(m - 1, n - 1) = 1;
  }
  return r;
}

namespace presets {

NetworkModel ex2() {
  return validate_network(ScheduleSet({{3.0, 0.0}, {1.0, 1.0}}), RoutingMatrix(2), "ex2");
}

NetworkModel iq_switch(std::size_t m) {
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "switch size must be positive");
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Vec> schedules;
  do {
    Vec pi(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) pi[i * m + perm[i]] = 1.0;
    schedules.push_back(std::move(pi));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return validate_network(ScheduleSet(std::move(schedules)), RoutingMatrix(m * m),
                          "iq_switch(" + std::to_string(m) + ")");
}

NetworkModel tandem(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "tandem length must be positive");
  std::vector<Vec> schedules;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    if (mask & (mask >> 1)) continue;
    Vec pi(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) pi[k] = 1.0;
    }
    schedules.push_back(std::move(pi));
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 1; k < n; ++k) pairs.emplace_back(k, k + 1);
  return validate_network(ScheduleSet(std::move(schedules)), routing_from_pairs(n, pairs),
                          "tandem(" + std::to_string(n) + ")");
}

}  // namespace presets

}  // namespace swnet
