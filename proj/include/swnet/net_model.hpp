#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swnet/rational.hpp"
#include "swnet/vec.hpp"

namespace swnet {

/// Finite, ordered set of service vectors. Indices are positions and never change,
/// since tie-breaking is defined in terms of them.
class ScheduleSet {
 public:
  ScheduleSet() = default;
  explicit ScheduleSet(std::vector<Vec> schedules);

  std::size_t size() const { return schedules_.size(); }
  std::size_t dim() const { return schedules_.empty() ? 0 : schedules_.front().size(); }
  const Vec& operator[](std::size_t i) const { return schedules_[i]; }
  const std::vector<Vec>& schedules() const { return schedules_; }
  auto begin() const { return schedules_.begin(); }
  auto end() const { return schedules_.end(); }

  /// Index of an exactly equal schedule, if present.
  std::optional<std::size_t> find(const Vec& pi) const;

 private:
  std::vector<Vec> schedules_;
};

/// N x N 0/1 matrix stored densely; row m marks the queue fed by m.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  explicit BinaryMatrix(std::size_t n) : n_(n), data_(n * n, 0) {}
  static BinaryMatrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  int operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  int& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  bool is_zero() const;
  bool operator==(const BinaryMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<int> data_;
};

using RoutingMatrix = BinaryMatrix;
/// (I - R^T)^{-1} = I + R^T + (R^T)^2 + ...; entry (m, n) is 1 iff work entering at n
/// passes through m.
using UpstreamMatrix = BinaryMatrix;

/// Scheduling weight f with F = integral of f. Power functions carry closed forms; custom
/// functions supply their own f, F and f'. Only the inverse may be computed numerically.
class WeightFunction {
 public:
  static WeightFunction power(double alpha);
  /// f(x) = log(1 + x). Violates scale invariance on switches; used for probes.
  static WeightFunction log1p();
  static WeightFunction custom(std::string name, std::function<double(double)> f,
                               std::function<double(double)> integral,
                               std::function<double(double)> derivative,
                               std::function<double(double)> inverse = {});

  double f(double x) const;
  double F(double x) const;
  double derivative(double x) const;
  /// f^{-1}(y) for y >= 0.
  double inverse(double y) const;
  /// d/dy f^{-1}(y) for y > 0.
  double inverse_derivative(double y) const;

  bool is_power() const { return is_power_; }
  double alpha() const { return alpha_; }
  const std::string& name() const { return name_; }
  /// Human/JSON readable description, e.g. "x^1" or "log1p".
  std::string describe() const;

 private:
  bool is_power_ = true;
  double alpha_ = 1.0;
  std::string name_ = "power";
  std::function<double(double)> f_, integral_, derivative_, inverse_;
};

enum class HopKind { kSingle, kMulti };

struct NetworkModel {
  std::string name;
  std::size_t n_queues = 0;
  ScheduleSet schedules;
  RoutingMatrix routing;
  UpstreamMatrix upstream;
  HopKind hop_kind = HopKind::kSingle;
  /// Closed under zeroing components (required for backpressure on multi-hop models).
  bool monotone_closed = false;

  /// Index of the queue directly downstream of n, if any.
  std::optional<std::size_t> downstream(std::size_t n) const;
  /// max over schedules of 1 . pi
  double max_total_service() const;
};

/// Throws CyclicRouting, MultipleDownstream, EmptyScheduleSet, DimensionMismatch.
NetworkModel validate_network(ScheduleSet schedules, RoutingMatrix routing, std::string name = "");

/// Smallest superset closed under zeroing any subset of components. The input order is
/// kept as a prefix; new schedules are appended in discovery order.
ScheduleSet monotone_closure(const ScheduleSet& schedules);
bool is_monotone_closed(const ScheduleSet& schedules);

/// R~ x.
Vec upstream_transform(const NetworkModel& model, std::span<const double> x);
RatVec upstream_transform(const NetworkModel& model, const RatVec& x);
/// [R x]_n = x_{downstream(n)} (0 if none).
Vec routing_apply(const NetworkModel& model, std::span<const double> x);
/// (I - R^T) x, the net outflow map applied to served amounts.
Vec net_outflow(const NetworkModel& model, std::span<const double> x);

/// Routing from 1-based (m, n) pairs: work served at m moves to n.
RoutingMatrix routing_from_pairs(std::size_t n_queues,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

namespace presets {

/// Two queues A, B with schedules (3,0) and (1,1).
NetworkModel ex2();
/// M x M input-queued switch; queue (i, j) has index i*M + j, schedules are the M!
/// permutation matrices in lexicographic permutation order (identity first).
NetworkModel iq_switch(std::size_t m);
/// Chain 1 -> 2 -> ... -> N. Adjacent queues interfere, so a schedule serves one unit at
/// each queue of an independent set of the path graph (monotone closed by construction).
NetworkModel tandem(std::size_t n);

}  // namespace presets

}  // namespace swnet
