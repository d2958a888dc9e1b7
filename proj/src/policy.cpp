#include "swnet/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swnet/error.hpp"

namespace swnet {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kMw: return "mw";
    case PolicyKind::kBackpressure: return "backpressure";
    case PolicyKind::kMsmwLog: return "msmw_log";
  }
  return "?";
}

std::string to_string(TieBreak tb) {
  switch (tb) {
    case TieBreak::kHighestIndex: return "highest_index";
    case TieBreak::kRandom: return "random";
    case TieBreak::kRoundRobin: return "round_robin";
  }
  return "?";
}

Policy Policy::mw(WeightFunction f, TieBreak tb) {
  Policy p;
  p.kind = PolicyKind::kMw;
  p.weight = std::move(f);
  p.tie_break = tb;
  return p;
}

Policy Policy::backpressure(WeightFunction f, TieBreak tb) {
  Policy p = mw(std::move(f), tb);
  p.kind = PolicyKind::kBackpressure;
  return p;
}

Policy Policy::msmw_log(TieBreak tb) {
  Policy p;
  p.kind = PolicyKind::kMsmwLog;
  p.tie_break = tb;
  return p;
}

std::string Policy::describe() const {
  std::string s = to_string(kind);
  if (kind != PolicyKind::kMsmwLog) s += "[f=" + weight.describe() + "]";
  return s + "/" + to_string(tie_break);
}

std::size_t TieState::pick(TieBreak tb, const std::vector<std::size_t>& set) {
  std::size_t chosen = set.back();
  switch (tb) {
    case TieBreak::kHighestIndex:
      break;
    case TieBreak::kRandom:
      chosen = set.size() == 1 ? set.front() : set[rng_.index(set.size())];
      break;
    case TieBreak::kRoundRobin: {
      chosen = set.front();
      if (last_) {
        for (std::size_t i : set) {
          if (i > *last_) {
            chosen = i;
            break;
          }
        }
      }
      break;
    }
  }
  last_ = chosen;
  return chosen;
}

void check_policy_model(const NetworkModel& model, const Policy& policy) {
  switch (policy.kind) {
    case PolicyKind::kMw:
      if (model.hop_kind == HopKind::kMulti) {
        throw Error(ErrorCode::kPolicyModelMismatch,
                    "mw is defined for single-hop models; use backpressure");
      }
      break;
    case PolicyKind::kBackpressure:
      if (model.hop_kind == HopKind::kMulti && !model.monotone_closed) {
        throw Error(ErrorCode::kPolicyModelMismatch,
                    "backpressure needs a monotone-closed schedule set");
      }
      break;
    case PolicyKind::kMsmwLog:
      if (model.hop_kind == HopKind::kMulti) {
        throw Error(ErrorCode::kPolicyModelMismatch, "msmw_log is defined for single-hop models");
      }
      break;
  }
}

Vec backpressure_terms(const NetworkModel& model, const WeightFunction& f,
                       std::span<const double> q) {
  const std::size_t n = model.n_queues;
  Vec fq(n);
  for (std::size_t k = 0; k < n; ++k) fq[k] = f.f(q[k]);
  if (model.hop_kind == HopKind::kSingle) return fq;
  Vec out = fq;
  for (std::size_t k = 0; k < n; ++k) {
    if (auto d = model.downstream(k)) out[k] -= fq[*d];
  }
  return out;
}

std::vector<ScheduleWeight> schedule_weights(const NetworkModel& model, const Policy& policy,
                                             std::span<const double> q) {
  if (q.size() != model.n_queues) {
    throw Error(ErrorCode::kDimensionMismatch, "queue vector has wrong length");
  }
  check_policy_model(model, policy);
  std::vector<ScheduleWeight> w(model.schedules.size());
  if (policy.kind == PolicyKind::kMsmwLog) {
    for (std::size_t i = 0; i < model.schedules.size(); ++i) {
      const Vec& pi = model.schedules[i];
      for (std::size_t n = 0; n < pi.size(); ++n) {
        if (q[n] > 0.0 && pi[n] > 0.0) {
          w[i].primary += pi[n];
          w[i].secondary += pi[n] * std::log(q[n]);
        }
      }
    }
    return w;
  }
  const Vec terms = backpressure_terms(model, policy.weight, q);
  for (std::size_t i = 0; i < model.schedules.size(); ++i) {
    w[i].primary = dot(model.schedules[i], terms);
  }
  return w;
}

namespace {

bool within(double x, double best, double rel_tol) {
  if (rel_tol == 0.0) return x == best;
  return x >= best - rel_tol * std::abs(best);
}

}  // namespace

std::vector<std::size_t> argmax_set(const Policy& policy, const std::vector<ScheduleWeight>& w) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& x : w) best = std::max(best, x.primary);
  std::vector<std::size_t> set;
  if (policy.kind == PolicyKind::kMsmwLog) {
    // Schedule sizes are sums of service amounts: compared exactly.
    double best2 = -std::numeric_limits<double>::infinity();
    for (const auto& x : w) {
      if (x.primary == best) best2 = std::max(best2, x.secondary);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i].primary == best && within(w[i].secondary, best2, policy.rel_tol)) set.push_back(i);
    }
    return set;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (within(w[i].primary, best, policy.rel_tol)) set.push_back(i);
  }
  return set;
}

SelectionTrace select_schedule(const NetworkModel& model, const Policy& policy,
                               std::span<const double> q, TieState& ties) {
  for (double x : q) {
    if (x < 0.0) throw Error(ErrorCode::kNegativeQueue, "queue vector has a negative entry");
  }
  SelectionTrace t;
  t.weights = schedule_weights(model, policy, q);
  t.argmax_set = argmax_set(policy, t.weights);
  t.chosen = ties.pick(policy.tie_break, t.argmax_set);
  return t;
}

double max_schedule_weight(const NetworkModel& model, const WeightFunction& f,
                           std::span<const double> q) {
  const Vec terms = backpressure_terms(model, f, q);
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& pi : model.schedules) best = std::max(best, dot(pi, terms));
  return best;
}

ScaleInvarianceReport check_scale_invariance(const NetworkModel& model, const Policy& policy,
                                             std::size_t samples, const Vec& kappas,
                                             std::uint64_t seed, double q_max) {
  if (policy.kind == PolicyKind::kMsmwLog) {
    throw Error(ErrorCode::kInvalidArgument, "scale invariance applies to mw and backpressure");
  }
  ScaleInvarianceReport rep;
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    Vec q(model.n_queues);
    for (double& x : q) x = rng.uniform(0.0, q_max);
    const auto base = argmax_set(policy, schedule_weights(model, policy, q));
    for (double kappa : kappas) {
      const Vec kq = scaled(q, kappa);
      auto other = argmax_set(policy, schedule_weights(model, policy, kq));
      ++rep.checked;
      if (other != base) rep.counterexamples.push_back({q, kappa, base, std::move(other)});
    }
  }
  return rep;
}

}  // namespace swnet
