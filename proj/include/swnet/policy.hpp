#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swnet/net_model.hpp"
#include "swnet/rng.hpp"
#include "swnet/vec.hpp"

namespace swnet {

enum class PolicyKind { kMw, kBackpressure, kMsmwLog };
enum class TieBreak { kHighestIndex, kRandom, kRoundRobin };

std::string to_string(PolicyKind kind);
std::string to_string(TieBreak tb);

struct Policy {
  PolicyKind kind = PolicyKind::kMw;
  WeightFunction weight = WeightFunction::power(1.0);
  TieBreak tie_break = TieBreak::kHighestIndex;
  /// Weights within rel_tol * |max| of the maximum count as tied. Zero means exact.
  double rel_tol = 0.0;

  static Policy mw(WeightFunction f, TieBreak tb = TieBreak::kHighestIndex);
  static Policy backpressure(WeightFunction f, TieBreak tb = TieBreak::kHighestIndex);
  /// Ties among maximum-size, maximum-log-weight schedules are broken uniformly at random.
  static Policy msmw_log(TieBreak tb = TieBreak::kRandom);

  std::string describe() const;
};

/// For MSMW-log the weight is the lexicographic pair (size, log-weight); for the
/// max-weight family only `primary` is used.
struct ScheduleWeight {
  double primary = 0.0;
  double secondary = 0.0;
};

struct SelectionTrace {
  std::vector<ScheduleWeight> weights;
  std::vector<std::size_t> argmax_set;
  std::size_t chosen = 0;
};

/// Per-simulation tie state: RNG stream for random ties, cursor for round robin.
class TieState {
 public:
  TieState() : rng_(0) {}
  explicit TieState(std::uint64_t seed) : rng_(seed) {}

  std::size_t pick(TieBreak tb, const std::vector<std::size_t>& argmax_set);

 private:
  Rng rng_;
  std::optional<std::size_t> last_;
};

/// Throws PolicyModelMismatch: backpressure on a multi-hop model needs a monotone-closed
/// schedule set; MW and MSMW-log need a single-hop model.
void check_policy_model(const NetworkModel& model, const Policy& policy);

/// [(I - R) f(q)]_n = f(q_n) - f(q_{downstream(n)}).
Vec backpressure_terms(const NetworkModel& model, const WeightFunction& f,
                       std::span<const double> q);

std::vector<ScheduleWeight> schedule_weights(const NetworkModel& model, const Policy& policy,
                                             std::span<const double> q);

/// Maximal-weight schedule indices, ascending.
std::vector<std::size_t> argmax_set(const Policy& policy, const std::vector<ScheduleWeight>& w);

SelectionTrace select_schedule(const NetworkModel& model, const Policy& policy,
                               std::span<const double> q, TieState& ties);

/// max_pi pi . f(q) (single hop) or max_pi pi . (I - R) f(q) (multi hop).
double max_schedule_weight(const NetworkModel& model, const WeightFunction& f,
                           std::span<const double> q);

struct ScaleCounterexample {
  Vec q;
  double kappa = 1.0;
  std::vector<std::size_t> at_q;
  std::vector<std::size_t> at_kappa_q;
};

struct ScaleInvarianceReport {
  std::size_t checked = 0;
  std::vector<ScaleCounterexample> counterexamples;
  bool pass() const { return counterexamples.empty(); }
};

/// Samples q uniformly from [0, q_max]^N and compares argmax sets at q and kappa q.
ScaleInvarianceReport check_scale_invariance(const NetworkModel& model, const Policy& policy,
                                             std::size_t samples, const Vec& kappas,
                                             std::uint64_t seed, double q_max = 10.0);

}  // namespace swnet
