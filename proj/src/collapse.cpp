#include "swnet/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swnet/error.hpp"
#include "swnet/parallel.hpp"
#include "swnet/sim.hpp"

namespace swnet {

namespace {

double quantile(Vec v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  if (p == 0.5) {
    const std::size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
  }
  // Nearest rank.
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, rank == 0 ? 0 : rank - 1)];
}

}  // namespace

bool CollapseReport::strictly_decreasing() const {
  for (std::size_t i = 1; i < per_r.size(); ++i) {
    if (!(per_r[i].median < per_r[i - 1].median)) return false;
  }
  return true;
}

CollapseReport mssc_experiment(const MsscConfig& cfg) {
  const NetworkModel& model = cfg.model;
  const std::size_t n = model.n_queues;
  if (cfg.lambda.size() != n || cfg.q0_hat.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "lambda / q0 do not match the model");
  }
  if (!cfg.gamma.empty() && cfg.gamma.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "gamma does not match the model");
  }
  if (cfg.r_list.empty() || cfg.reps == 0) {
    throw Error(ErrorCode::kInvalidArgument, "r list and reps must be nonempty");
  }
  check_policy_model(model, cfg.policy);

  const Vec lambda = to_double(cfg.lambda);
  const VirtualResourceSet vrs = enumerate_dual_vertices(model);
  const CriticalSets crit = critically_loaded(vrs, critical_rate(model, cfg.lambda));
  const LiftMap lift(model, cfg.lambda, cfg.policy.weight, crit.xi(vrs));

  CollapseReport rep;
  rep.trivial_lift = crit.clvr.empty();
  rep.probe = !cfg.gamma.empty();
  rep.q0_invariant = invariant_state_test(model, lambda, cfg.policy.weight, cfg.q0_hat);

  const std::size_t cells = cfg.r_list.size() * cfg.reps;
  rep.rows.resize(cells);
  parallel_for(cells, cfg.threads, [&](std::size_t idx) {
    const std::size_t ri = idx / cfg.reps;
    const std::size_t k = idx % cfg.reps;
    const double r = cfg.r_list[ri];
    if (!(r >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "scales must be >= 1");

    Vec rate = lambda;
    for (std::size_t i = 0; i < cfg.gamma.size(); ++i) rate[i] = std::max(0.0, rate[i] - cfg.gamma[i] / r);
    ArrivalModel arrivals;
    if (cfg.arrival_kind == ArrivalKind::kDeterministic) {
      arrivals = ArrivalModel::deterministic(rate);
    } else if (cfg.arrival_kind == ArrivalKind::kBernoulli) {
      Vec batch = cfg.batch.empty() ? Vec(n, 1.0) : cfg.batch;
      Vec prob(n);
      for (std::size_t i = 0; i < n; ++i) prob[i] = batch[i] > 0.0 ? rate[i] / batch[i] : 0.0;
      arrivals = ArrivalModel::bernoulli(prob, batch);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "collapse supports deterministic or bernoulli arrivals");
    }

    const auto horizon = static_cast<std::uint64_t>(std::ceil(r * r * cfg.T - 1e-9));
    RunOptions opts;
    opts.stride = std::max<std::uint64_t>(1, horizon / 100000);
    const auto seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(std::llround(r * 1000.0)), k});
    const SystemPath path = run(model, cfg.policy, arrivals, scaled(cfg.q0_hat, r), horizon, seed, opts);
    const ScaledPath sp = rescale(path, ScaleKind::kDiffusion, r, cfg.T, cfg.grid);

    double dev = 0.0;
    for (const Vec& q : sp.q) dev = std::max(dev, sup_distance(q, lift(q).r_star));
    const double sup_q = path.sup_q / r;
    rep.rows[idx] = {r, k, dev / std::max(sup_q, 1.0), sup_q, dev};
  });

  for (std::size_t ri = 0; ri < cfg.r_list.size(); ++ri) {
    Vec ratios;
    for (std::size_t k = 0; k < cfg.reps; ++k) ratios.push_back(rep.rows[ri * cfg.reps + k].ratio);
    const double r = cfg.r_list[ri];
    rep.per_r.push_back({r, quantile(ratios, 0.5), quantile(ratios, 0.9), r <= 1.0});
  }
  return rep;
}

double near_optimality_factor(std::size_t n_queues, double alpha) {
  return std::pow(static_cast<double>(n_queues), alpha / (1.0 + alpha));
}

NearOptimalityReport near_optimality_audit(std::size_t n_queues, std::optional<double> alpha,
                                           bool complete_loading,
                                           const std::vector<const FluidTrajectory*>& runs) {
  NearOptimalityReport rep;
  rep.complete_loading = complete_loading;
  if (alpha) rep.upper_factor = near_optimality_factor(n_queues, *alpha);
  for (const FluidTrajectory* tr : runs) {
    NearOptimalityRow row;
    if (tr->points() == 0) {
      rep.rows.push_back(row);
      continue;
    }
    const double total0 = total(tr->q.front());
    double up = -HUGE_VAL;
    double low = -HUGE_VAL;
    for (const Vec& q : tr->q) {
      const double tq = total(q);
      if (rep.upper_factor) up = std::max(up, tq - *rep.upper_factor * total0);
      low = std::max(low, total0 - tq);
    }
    if (rep.upper_factor) row.upper_violation = up;
    if (complete_loading) row.lower_violation = low;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------

Iq2x2Workload iq2x2_workload(std::span<const double> q) {
  if (q.size() != 4) throw Error(ErrorCode::kDimensionMismatch, "2x2 switch has four queues");
  return {q[0] + q[1], q[0] + q[2], q[0] + q[1] + q[2] + q[3]};
}

double power_sum(double a, double b, double alpha) {
  const double m = std::max(a, b);
  if (m <= 0.0) return 0.0;
  const double s = std::min(a, b) / m;
  return m * std::pow(1.0 + std::pow(s, alpha), 1.0 / alpha);
}

namespace {

void check_workload(const Iq2x2Workload& w) {
  if (!(w.w1r >= 0.0 && w.w1c >= 0.0 && w.w1r <= w.wtot && w.w1c <= w.wtot)) {
    throw Error(ErrorCode::kInvalidArgument, "2x2 workload needs 0 <= w1r, w1c <= wtot");
  }
}

double pw(double x, double alpha) { return x <= 0.0 ? 0.0 : std::pow(x, alpha); }

}  // namespace

bool iq2x2_membership(const Iq2x2Workload& w, double alpha) {
  check_workload(w);
  const double rows[2] = {w.w1r, w.wtot - w.w1r};
  const double cols[2] = {w.w1c, w.wtot - w.w1c};
  for (double a : rows) {
    for (double b : cols) {
      if (a + b + power_sum(a, b, alpha) < w.wtot) return false;
    }
  }
  return true;
}

double iq2x2_theta(const Iq2x2Workload& w, double alpha, double x) {
  return pw(x, alpha) + pw(w.wtot - w.w1r - w.w1c + x, alpha) - pw(w.w1r - x, alpha) -
         pw(w.w1c - x, alpha);
}

std::pair<double, double> iq2x2_bounds(const Iq2x2Workload& w) {
  return {std::max(0.0, w.w1r + w.w1c - w.wtot), std::min(w.w1r, w.w1c)};
}

Vec iq2x2_invariant_solve(const Iq2x2Workload& w, double alpha) {
  check_workload(w);
  auto [lo, hi] = iq2x2_bounds(w);
  const double tlo = iq2x2_theta(w, alpha, lo);
  const double thi = iq2x2_theta(w, alpha, hi);
  if (tlo > 0.0 || thi < 0.0) {
    throw Error(ErrorCode::kNoRoot, "workload is not attained by an invariant state");
  }
  double x = tlo == 0.0 ? lo : (thi == 0.0 ? hi : 0.5 * (lo + hi));
  if (tlo != 0.0 && thi != 0.0) {
    for (int it = 0; it < 2000 && hi - lo > 0.0; ++it) {
      x = 0.5 * (lo + hi);
      if (x <= lo || x >= hi) break;
      const double t = iq2x2_theta(w, alpha, x);
      if (t == 0.0) break;
      if (t < 0.0) lo = x; else hi = x;
    }
  }
  return {x, w.w1r - x, w.w1c - x, w.wtot - w.w1r - w.w1c + x};
}

std::optional<Vec> lift_iq2x2_fast(std::span<const double> q, double alpha) {
  const Iq2x2Workload w = iq2x2_workload(q);
  if (!iq2x2_membership(w, alpha)) return std::nullopt;
  try {
    return iq2x2_invariant_solve(w, alpha);
  } catch (const Error&) {
    // Closed form and sign test can disagree on the boundary by rounding.
    return std::nullopt;
  }
}

bool MonotonicityReport::pass() const {
  for (const auto& p : pairs) {
    if (p.nesting_violations != 0 || p.strict_witnesses == 0) return false;
  }
  return true;
}

MonotonicityReport alpha_monotonicity_probe(const std::vector<double>& alphas, double step,
                                            double w_max, double wtot_max) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0) || (i > 0 && !(alphas[i] < alphas[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "alphas must be positive and strictly decreasing");
    }
  }
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid step must be positive");
  MonotonicityReport rep;
  for (std::size_t i = 0; i + 1 < alphas.size(); ++i) rep.pairs.push_back({alphas[i], alphas[i + 1], 0, 0, {}});
  const auto nw = static_cast<long>(std::floor(w_max / step + 1e-9));
  const auto nt = static_cast<long>(std::floor(wtot_max / step + 1e-9));
  std::vector<char> member(alphas.size());
  for (long i = 0; i <= nw; ++i) {
    for (long j = 0; j <= nw; ++j) {
      for (long k = 0; k <= nt; ++k) {
        const Iq2x2Workload w{static_cast<double>(i) * step, static_cast<double>(j) * step,
                              static_cast<double>(k) * step};
        if (w.w1r > w.wtot || w.w1c > w.wtot) continue;
        ++rep.grid_points;
        for (std::size_t a = 0; a < alphas.size(); ++a) member[a] = iq2x2_membership(w, alphas[a]);
        for (std::size_t a = 0; a + 1 < alphas.size(); ++a) {
          auto& p = rep.pairs[a];
          if (member[a] && !member[a + 1]) ++p.nesting_violations;
          if (!member[a] && member[a + 1]) {
            if (!p.first_witness) p.first_witness = w;
            ++p.strict_witnesses;
          }
        }
      }
    }
  }
  return rep;
}

std::optional<double> membership_threshold(const Iq2x2Workload& w, double alpha_start,
                                           double factor, std::size_t max_steps) {
  double a = alpha_start;
  for (std::size_t s = 0; s < max_steps; ++s, a *= factor) {
    if (iq2x2_membership(w, a)) return a;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> permutations(std::size_t m) {
  std::vector<std::size_t> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

MatchingReport matching_structure_checks(std::size_t m, std::size_t closure_samples,
                                         std::size_t coverage_samples, std::uint64_t seed,
                                         const std::vector<double>& alphas) {
  if (m == 0 || m > 4) throw Error(ErrorCode::kInvalidArgument, "matching checks need 1 <= M <= 4");
  MatchingReport rep;
  rep.m = m;
  const auto perms = permutations(m);
  auto weights = [&](const Vec& x) {
    Vec w(perms.size(), 0.0);
    for (std::size_t p = 0; p < perms.size(); ++p) {
      for (std::size_t i = 0; i < m; ++i) w[p] += x[i * m + perms[p][i]];
    }
    return w;
  };

  Rng rng(derive_seed(seed, {0}));
  for (std::size_t s = 0; s < closure_samples; ++s) {
    Vec x(m * m);
    for (double& v : x) v = static_cast<double>(rng.index(4));
    const Vec w = weights(x);
    const double best = *std::max_element(w.begin(), w.end());
    std::vector<char> support(m * m, 0);
    for (std::size_t p = 0; p < perms.size(); ++p) {
      if (w[p] != best) continue;
      for (std::size_t i = 0; i < m; ++i) support[i * m + perms[p][i]] = 1;
    }
    for (std::size_t p = 0; p < perms.size(); ++p) {
      bool inside = true;
      for (std::size_t i = 0; i < m && inside; ++i) inside = support[i * m + perms[p][i]];
      if (inside && w[p] != best) {
        ++rep.closure_violations;
        break;
      }
    }
    ++rep.closure_samples;
  }

  if (coverage_samples == 0) return rep;
  const NetworkModel model = presets::iq_switch(m);
  const VirtualResourceSet vrs = enumerate_dual_vertices(model);
  Rng rng2(derive_seed(seed, {1}));
  for (std::size_t s = 0; s < coverage_samples; ++s) {
    const double alpha = alphas[s % alphas.size()];
    const WeightFunction f = WeightFunction::power(alpha);
    // Positive weights on every permutation give lambda > 0 entrywise.
    std::vector<long> cw(perms.size());
    long total_w = 0;
    for (auto& c : cw) {
      c = 1 + static_cast<long>(rng2.index(5));
      total_w += c;
    }
    RatVec lambda(m * m, Rational(0));
    for (std::size_t p = 0; p < perms.size(); ++p) {
      for (std::size_t i = 0; i < m; ++i) lambda[i * m + perms[p][i]] += Rational(cw[p]) / Rational(total_w);
    }
    const LiftMap lift = make_lift_map(model, lambda, f, vrs);
    Vec q0(m * m);
    for (double& v : q0) v = rng2.uniform(0.0, 3.0);
    const Vec q = lift(q0).r_star;
    if (!invariant_state_test(model, to_double(lambda), f, q, 1e-6)) ++rep.non_invariant_samples;

    Vec fq(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) fq[i] = f.f(q[i]);
    const Vec w = weights(fq);
    const double best = *std::max_element(w.begin(), w.end());
    std::vector<char> covered(m * m, 0);
    for (std::size_t p = 0; p < perms.size(); ++p) {
      if (w[p] < best - 1e-6 * (1.0 + std::abs(best))) continue;
      for (std::size_t i = 0; i < m; ++i) covered[i * m + perms[p][i]] = 1;
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) ++rep.coverage_violations;
    ++rep.coverage_samples;
  }
  return rep;
}

}  // namespace swnet
