// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swnet/collapse.hpp"
#include "swnet/error.hpp"
#include "swnet/fluid.hpp"
#include "swnet/lift.hpp"
#include "swnet/parallel.hpp"
#include "swnet/rng.hpp"
#include "swnet/scenario.hpp"
#include "swnet/sim.hpp"
#include "swnet/static_plan.hpp"

using namespace swnet;

namespace {

// Pinned tolerances and budgets.
constexpr double kC1Seconds = 1.0;
constexpr double kC2Seconds = 10.0;
constexpr double kC4OracleGap = 5e-3;
constexpr double kC4Kkt = 1e-8;
constexpr double kC4HandTol = 1e-6;
constexpr double kC5Tol = 1e-6;
constexpr double kC6RelTol = 1e-6;
constexpr double kC7H = 1e-3;
constexpr double kC7T = 10.0;
constexpr double kC7Slack = 10.0 * kC7H;
constexpr double kC7Drift = 0.1;
constexpr double kC7Feasibility = 1e-6;
constexpr double kC7Eps = 0.05;
constexpr double kC7Seconds = 60.0;
constexpr double kC9Distance = 0.1;
constexpr double kC9Seconds = 120.0;
constexpr double kC10Median = 0.2;
constexpr double kC10Seconds = 300.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Rational rat(long p, long q) { return Rational(p) / Rational(q); }

bool same_set(std::vector<RatVec> a, std::vector<RatVec> b) {
  auto less = [](const RatVec& x, const RatVec& y) { return lex_less(x, y); };
  std::sort(a.begin(), a.end(), less);
  std::sort(b.begin(), b.end(), less);
  return a == b;
}

// ---------------------------------------------------------------------------

Outcome c1() {
  const auto t0 = Clock::now();
  const NetworkModel m = presets::ex2();
  const VirtualResourceSet v = enumerate_dual_vertices(m);
  const std::vector<RatVec> E{{rat(0, 1), rat(0, 1)}, {rat(1, 3), rat(0, 1)}, {rat(1, 3), rat(2, 3)}, {rat(0, 1), rat(1, 1)}};
  const std::vector<RatVec> S{{rat(1, 3), rat(2, 3)}, {rat(0, 1), rat(1, 1)}};
  const bool verts = same_set(v.vertices, E);
  const bool sstar = same_set(v.s_star(), S);
  std::size_t mismatches = 0;
  for (long i = 0; i < 20; ++i) {
    for (long j = 0; j < 20; ++j) {
      const Rational a = rat(3 * i, 19), b = rat(j, 19);
      if (solve_primal(m, {a, b}).value != oracle::ex2_primal(a, b)) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  return {verts && sstar && mismatches == 0 && secs < kC1Seconds,
          "vertices " + std::string(verts ? "exact" : "WRONG") + ", S* " + (sstar ? "exact" : "WRONG") +
              ", primal mismatches " + std::to_string(mismatches) + "/400, " + fmt(secs) + " s"};
}

Outcome c2() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (std::size_t m : {2u, 3u}) {
    const NetworkModel sw = presets::iq_switch(m);
    const VirtualResourceSet v = enumerate_dual_vertices(sw);
    std::vector<RatVec> expected;
    for (std::size_t k = 0; k < m; ++k) {
      RatVec row(m * m, Rational(0)), col(m * m, Rational(0));
      for (std::size_t j = 0; j < m; ++j) {
        row[k * m + j] = 1;
        col[j * m + k] = 1;
      }
      expected.push_back(row);
      expected.push_back(col);
    }
    const bool hit = same_set(v.s_star(), expected);
    ok = ok && hit;
    detail += "M=" + std::to_string(m) + " |S*|=" + std::to_string(v.maximal.size()) + (hit ? " exact; " : " WRONG; ");
  }
  const double secs = seconds_since(t0);
  return {ok && secs < kC2Seconds, detail + fmt(secs) + " s"};
}

Outcome c3() {
  Rng rng(derive_seed(2024, {3}));
  std::size_t agree = 0, vertex_agree = 0;
  const std::size_t instances = 100;
  for (std::size_t k = 0; k < instances; ++k) {
    const std::size_t n = 1 + rng.index(4);
    const std::size_t s = 1 + rng.index(8);
    std::vector<Vec> sched(s, Vec(n, 0.0));
    for (auto& pi : sched) {
      for (double& x : pi) x = rng.bernoulli(0.6) ? static_cast<double>(rng.index(4)) : 0.0;
    }
    // Every queue gets served by something, so both programs are finite.
    for (std::size_t i = 0; i < n; ++i) {
      bool served = false;
      for (const auto& pi : sched) served = served || pi[i] > 0;
      if (!served) sched[rng.index(s)][i] = 1.0 + static_cast<double>(rng.index(3));
    }
    const NetworkModel model = validate_network(ScheduleSet(sched), RoutingMatrix(n));
    RatVec lambda(n);
    for (auto& x : lambda) x = rat(static_cast<long>(rng.index(7)), 1 + static_cast<long>(rng.index(5)));
    const PrimalResult p = solve_primal(model, lambda);
    const DualResult d = solve_dual(model, lambda);
    if (p.feasible && d.bounded && p.value == d.value) ++agree;
    if (d.bounded && oracle::max_dot(enumerate_dual_vertices(model).vertices, lambda) == d.value) ++vertex_agree;
  }
  return {agree == instances && vertex_agree == instances,
          "primal == dual on " + std::to_string(agree) + "/" + std::to_string(instances) +
              ", dual == max over enumerated vertices on " + std::to_string(vertex_agree) + "/" +
              std::to_string(instances)};
}

Outcome c4() {
  const NetworkModel m = presets::ex2();
  const RatVec lam{rat(1, 1), rat(1, 1)};
  const VirtualResourceSet v = enumerate_dual_vertices(m);
  const auto xis = critically_loaded(v, lam).xi(v);
  std::vector<Vec> dx;
  for (const RatVec& x : xis) dx.push_back(to_double(x));
  double worst_gap = 0.0, worst_kkt = 0.0;
  Rng rng(derive_seed(2024, {4}));
  for (double alpha : {0.5, 1.0, 2.0}) {
    const WeightFunction f = WeightFunction::power(alpha);
    const LiftMap lift(m, lam, f, xis);
    for (int k = 0; k < 200; ++k) {
      const Vec q{rng.uniform(0, 5), rng.uniform(0, 5)};
      const LiftResult r = lift(q);
      worst_kkt = std::max(worst_kkt, r.kkt_residual);
      worst_gap = std::max(worst_gap, sup_distance(r.r_star, oracle::lift_grid(dx, q, [&](double x) { return f.F(x); })));
    }
  }
  const LiftMap l1(m, lam, WeightFunction::power(1.0), xis);
  const double hand = std::max(sup_distance(l1(Vec{3, 0}).r_star, Vec{0.6, 1.2}),
                               sup_distance(l1(Vec{0, 3}).r_star, Vec{0, 3}));
  return {worst_gap <= kC4OracleGap && worst_kkt <= kC4Kkt && hand <= kC4HandTol,
          "max oracle gap " + fmt(worst_gap) + ", max KKT " + fmt(worst_kkt) + ", hand cases " + fmt(hand)};
}

Outcome c5() {
  struct Net {
    NetworkModel model;
    RatVec lambda;
    double alpha;
  };
  const std::vector<Net> nets{{presets::ex2(), {rat(1, 1), rat(1, 1)}, 1.0},
                              {presets::iq_switch(2), RatVec(4, rat(1, 2)), 1.0}};
  std::size_t disagreements = 0, fixed = 0, total_samples = 0;
  Rng rng(derive_seed(2024, {5}));
  for (const Net& net : nets) {
    const std::size_t n = net.model.n_queues;
    const Vec lam = to_double(net.lambda);
    const WeightFunction f = WeightFunction::power(net.alpha);
    const LiftMap lift = make_lift_map(net.model, net.lambda, f, enumerate_dual_vertices(net.model));
    for (int k = 0; k < 500; ++k) {
      Vec q(n);
      for (double& x : q) x = rng.uniform(0, 4);
      if (k % 3 >= 1) q = lift(q).r_star;
      if (k % 3 == 2) {
        for (double& x : q) x = std::max(0.0, x + rng.uniform(-1e-2, 1e-2));
      }
      const bool is_fixed = sup_distance(lift(q).r_star, q) <= kC5Tol * (1.0 + sup_norm(q));
      const bool inv = invariant_state_test(net.model, lam, f, q, kC5Tol);
      if (is_fixed != inv) ++disagreements;
      if (is_fixed) ++fixed;
      ++total_samples;
    }
  }
  return {disagreements == 0, std::to_string(disagreements) + " disagreements over " + std::to_string(total_samples) +
                                  " states (" + std::to_string(fixed) + " fixed points)"};
}

Outcome c6() {
  Rng rng(derive_seed(2024, {6}));
  double worst = 0.0;
  std::size_t checks = 0;
  struct Net {
    NetworkModel model;
    RatVec lambda;
  };
  for (const Net& net : std::vector<Net>{{presets::ex2(), {rat(1, 1), rat(1, 1)}},
                                         {presets::iq_switch(2), RatVec(4, rat(1, 2))}}) {
    const VirtualResourceSet v = enumerate_dual_vertices(net.model);
    for (double alpha : {0.5, 1.0, 2.0}) {
      const LiftMap lift = make_lift_map(net.model, net.lambda, WeightFunction::power(alpha), v);
      for (int k = 0; k < 30; ++k) {
        Vec q(net.model.n_queues);
        for (double& x : q) x = rng.uniform(0, 5);
        const Vec base = lift(q).r_star;
        for (double kappa : {0.5, 2.0, 10.0}) {
          const Vec r = lift(scaled(q, kappa)).r_star;
          const double gap = sup_distance(r, scaled(base, kappa)) / (kappa * std::max(sup_norm(base), 1e-300));
          worst = std::max(worst, gap);
          ++checks;
        }
      }
    }
  }
  double worst_multi = 0.0;
  struct Multi {
    NetworkModel model;
    RatVec lambda;
  };
  for (const Multi& mh : std::vector<Multi>{{presets::tandem(2), {rat(1, 2), rat(0, 1)}},
                                            {presets::tandem(3), {rat(1, 2), rat(0, 1), rat(0, 1)}}}) {
    const LiftMap lift = make_lift_map(mh.model, mh.lambda, WeightFunction::power(1.0), enumerate_dual_vertices(mh.model));
    for (int k = 0; k < 30; ++k) {
      Vec q(mh.model.n_queues);
      for (double& x : q) x = rng.uniform(0, 5);
      const Vec fp = lift(q).r_star;
      for (double kappa : {0.5, 2.0, 10.0}) {
        const Vec r = lift(scaled(fp, kappa)).r_star;
        worst_multi = std::max(worst_multi, sup_distance(r, scaled(fp, kappa)) / (kappa * std::max(sup_norm(fp), 1e-300)));
        ++checks;
      }
    }
  }
  return {worst <= kC6RelTol && worst_multi <= kC6RelTol,
          "single-hop rel gap " + fmt(worst) + ", multi-hop fixed-point rel gap " + fmt(worst_multi) + " over " +
              std::to_string(checks) + " checks"};
}

struct FluidCase {
  NetworkModel model;
  RatVec lambda;
  Vec q0;
};

std::vector<FluidCase> fluid_cases() {
  return {{presets::ex2(), {rat(1, 1), rat(1, 1)}, {3, 0}},
          {presets::ex2(), {rat(1, 1), rat(1, 1)}, {1, 0}},
          {presets::iq_switch(2), RatVec(4, rat(1, 2)), {1, 0, 0, 0}},
          {presets::iq_switch(2), RatVec(4, rat(1, 2)), {2, 1, 0, 0.5}}};
}

Outcome c7() {
  const auto t0 = Clock::now();
  double mono = 0.0, drift = 0.0, feas = 0.0;
  std::size_t converged = 0, runs = 0, drift_points = 0;
  for (const FluidCase& fc : fluid_cases()) {
    const VirtualResourceSet v = enumerate_dual_vertices(fc.model);
    const Vec lam = to_double(fc.lambda);
    for (double alpha : {0.5, 1.0, 2.0}) {
      const WeightFunction f = WeightFunction::power(alpha);
      const FluidTrajectory tr = integrate_fluid(fc.model, Policy::mw(f), lam, fc.q0, kC7H, kC7T);
      double running = HUGE_VAL;
      for (const Vec& q : tr.q) {
        const double L = lyapunov(f, q);
        running = std::min(running, L);
        mono = std::max(mono, L - running);
      }
      const DriftCheck dc = lyapunov_drift_check(fc.model, lam, f, tr);
      drift = std::max(drift, dc.max_residual);
      drift_points += dc.checked;
      const LiftMap lift = make_lift_map(fc.model, fc.lambda, f, v);
      feas = std::max(feas, feasibility_preservation_check(fc.model, fc.lambda, lift.xis(), tr, kC7Feasibility).max_violation);
      if (convergence_to_invariant(lift, tr, kC7Eps, 10).hitting_time) ++converged;
      ++runs;
    }
  }
  const double secs = seconds_since(t0);
  return {mono <= kC7Slack && drift <= kC7Drift && feas <= kC7Feasibility && converged == runs && secs < kC7Seconds,
          "(a) max L increase " + fmt(mono) + " (b) drift residual " + fmt(drift) + " on " + std::to_string(drift_points) +
              " points (c) feasibility " + fmt(feas) + " (d) converged " + std::to_string(converged) + "/" +
              std::to_string(runs) + "; " + fmt(secs) + " s"};
}

Outcome c8() {
  double upper = -HUGE_VAL, lower = -HUGE_VAL;
  for (const FluidCase& fc : fluid_cases()) {
    for (double alpha : {0.5, 1.0, 2.0}) {
      const FluidTrajectory tr =
          integrate_fluid(fc.model, Policy::mw(WeightFunction::power(alpha)), to_double(fc.lambda), fc.q0, kC7H, kC7T);
      const auto rep = near_optimality_audit(fc.model.n_queues, alpha, false, {&tr});
      upper = std::max(upper, *rep.rows.front().upper_violation);
    }
  }
  // Complete loading: 2x2 switch, uniform rate 1/2.
  const NetworkModel sw = presets::iq_switch(2);
  const VirtualResourceSet v = enumerate_dual_vertices(sw);
  const RatVec lam(4, rat(1, 2));
  const bool complete = complete_loading_check(sw, v, critically_loaded(v, lam)).holds;
  std::vector<Policy> policies{Policy::mw(WeightFunction::power(0.5)), Policy::mw(WeightFunction::power(1.0)),
                               Policy::mw(WeightFunction::power(2.0)), Policy::msmw_log()};
  for (const Vec& q0 : std::vector<Vec>{{1, 0, 0, 0}, {2, 1, 0, 0.5}, {0.3, 1.7, 0.9, 0}}) {
    for (const Policy& p : policies) {
      const FluidTrajectory tr = integrate_fluid(sw, p, to_double(lam), q0, kC7H, kC7T, 17);
      const auto rep = near_optimality_audit(4, std::nullopt, complete, {&tr});
      if (rep.rows.front().lower_violation) lower = std::max(lower, *rep.rows.front().lower_violation);
    }
  }
  return {upper <= kC7Slack && complete && lower <= kC7Slack,
          "upper bound excess " + fmt(upper) + ", complete loading " + (complete ? "holds" : "FAILS") +
              ", lower bound excess " + fmt(lower)};
}

Outcome c9() {
  const auto t0 = Clock::now();
  const NetworkModel m = presets::ex2();
  const Vec lam{1.5, 0.75};
  const Policy p = Policy::mw(WeightFunction::power(1.0));
  const ArrivalModel arrivals = ArrivalModel::bernoulli({0.75, 0.75}, {2.0, 1.0});
  const Vec qbar{1, 0};
  const double T = 2.0;
  const FluidTrajectory fl = integrate_fluid(m, p, lam, qbar, kC7H, T);
  std::vector<double> medians;
  for (std::uint64_t z : {200u, 1000u}) {
    Vec d;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      const auto horizon = static_cast<std::uint64_t>(z * T);
      const SystemPath path = run(m, p, arrivals, scaled(qbar, static_cast<double>(z)), horizon, derive_seed(9, {z, rep}));
      const ScaledPath sp = rescale(path, ScaleKind::kFluid, static_cast<double>(z), T, horizon + 1);
      d.push_back(trajectory_distance(sampled(sp), sampled(fl)));
    }
    std::sort(d.begin(), d.end());
    medians.push_back(0.5 * (d[9] + d[10]));
  }
  const double secs = seconds_since(t0);
  return {medians[1] < medians[0] && medians[1] <= kC9Distance && secs < kC9Seconds,
          "median distance z=200: " + fmt(medians[0]) + ", z=1000: " + fmt(medians[1]) + "; " + fmt(secs) + " s"};
}

Outcome c10() {
  const auto t0 = Clock::now();
  MsscConfig cfg;
  cfg.model = presets::iq_switch(2);
  cfg.policy = Policy::mw(WeightFunction::power(1.0));
  cfg.lambda = RatVec(4, rat(1, 2));
  cfg.q0_hat = {1, 0.5, 0.5, 0};
  cfg.r_list = {10, 20, 40};
  cfg.reps = 20;
  cfg.grid = 200;
  cfg.T = 1.0;
  cfg.seed = 1;
  cfg.threads = resolve_threads(std::nullopt);
  const CollapseReport rep = mssc_experiment(cfg);
  const double secs = seconds_since(t0);
  std::string detail = "q0 invariant " + std::string(rep.q0_invariant ? "yes" : "NO") + "; medians";
  for (const auto& s : rep.per_r) detail += " r=" + fmt(s.r) + ":" + fmt(s.median);
  return {rep.q0_invariant && rep.strictly_decreasing() && rep.per_r.back().median <= kC10Median && secs < kC10Seconds,
          detail + "; " + fmt(secs) + " s"};
}

Outcome c11() {
  std::size_t disagreements = 0, points = 0;
  for (double alpha : {0.2, 0.5, 1.0, 2.0}) {
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        for (int k = 0; k < 10; ++k) {
          const double w1r = (i + 0.37) * 0.2, w1c = (j + 0.61) * 0.2, wtot = (k + 0.13) * 0.6;
          if (w1r > wtot || w1c > wtot) continue;
          const bool closed = iq2x2_membership({w1r, w1c, wtot}, alpha);
          if (closed != oracle::iq2x2_root_exists(w1r, w1c, wtot, alpha, 1000)) ++disagreements;
          ++points;
        }
      }
    }
  }
  const MonotonicityReport mono = alpha_monotonicity_probe({1.0, 0.5, 0.2}, 0.1, 2.0, 6.0);
  const Iq2x2Workload w{1, 1, 5};
  const bool witness = !iq2x2_membership(w, 1.0) && iq2x2_membership(w, 0.5) && iq2x2_membership(w, 0.2);
  std::string pairs;
  for (const auto& p : mono.pairs) {
    pairs += " " + fmt(p.alpha_hi) + "->" + fmt(p.alpha_lo) + ": " + std::to_string(p.nesting_violations) +
             " nesting violations, " + std::to_string(p.strict_witnesses) + " witnesses;";
  }
  return {disagreements == 0 && mono.pass() && witness,
          std::to_string(disagreements) + " disagreements over " + std::to_string(points) + " workloads;" + pairs +
              " w=(1,1,5) strict witness " + (witness ? "yes" : "NO")};
}

Outcome c12() {
  bool ok = true;
  std::string detail;
  for (std::size_t m : {2u, 3u}) {
    const MatchingReport r = matching_structure_checks(m, 1000, 200, derive_seed(2024, {12, m}));
    ok = ok && r.pass() && r.closure_samples == 1000 && r.coverage_samples == 200;
    detail += "M=" + std::to_string(m) + ": closure " + std::to_string(r.closure_violations) + "/" +
              std::to_string(r.closure_samples) + ", coverage " + std::to_string(r.coverage_violations) + "/" +
              std::to_string(r.coverage_samples) + ", non-invariant " + std::to_string(r.non_invariant_samples) + "; ";
  }
  return {ok, detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome c13() {
  const std::vector<std::string> scenarios{
      R"({"preset":"ex2","lambda":[1,1],"experiment":{"kind":"analyze"}})",
      R"({"preset":"iq_switch","M":2,"lambda":[0.5,0.5,0.5,0.5],"policy":{"tie_break":"random"},
          "experiment":{"kind":"simulate","horizon":2000,"q0":[3,0,1,2]}})",
      R"({"preset":"tandem","N":3,"lambda":[0.5,0,0],"experiment":{"kind":"simulate","horizon":2000}})",
      R"({"preset":"ex2","lambda":[1,1],"policy":{"alpha":0.5},"experiment":{"kind":"fluid","q0":[3,0],"T":5}})",
      R"({"preset":"iq_switch","M":2,"lambda":[0.5,0.5,0.5,0.5],"policy":{"kind":"msmw_log"},
          "experiment":{"kind":"fluid","q0":[1,0,0,0],"T":2}})",
      R"({"preset":"ex2","lambda":[1,1],"experiment":{"kind":"lift","q":[3,0]}})",
      R"({"preset":"iq_switch","M":2,"lambda":[0.5,0.5,0.5,0.5],"experiment":{"kind":"collapse","q0":[1,0.5,0.5,0],"reps":5}})",
      R"({"experiment":{"kind":"iqcheck","closure_samples":200,"coverage_samples":40}})"};
  const auto root = std::filesystem::temp_directory_path() / "swnet_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::size_t files = 0, differing = 0;
  std::ostringstream log;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    std::vector<std::filesystem::path> dirs;
    for (std::size_t threads : {1u, 1u, 4u}) {
      ScenarioConfig cfg = parse_scenario_text(scenarios[s], CliOverrides{std::nullopt, std::uint64_t{11}, threads});
      const auto dir = root / (std::to_string(s) + "_" + std::to_string(dirs.size()));
      cfg.out = dir.string();
      execute(cfg, log);
      dirs.push_back(dir);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      const std::string ref = slurp(entry.path());
      for (std::size_t d = 1; d < dirs.size(); ++d) {
        ++files;
        if (!std::filesystem::exists(dirs[d] / name) || slurp(dirs[d] / name) != ref) ++differing;
      }
    }
  }
  std::filesystem::remove_all(root);
  return {differing == 0 && files > 0, std::to_string(differing) + " differing out of " + std::to_string(files) +
                                           " file comparisons across reruns and thread counts"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1  two-queue example geometry", c1},
      {"2  switch virtual resources", c2},
      {"3  strong duality", c3},
      {"4  lift vs grid oracle", c4},
      {"5  fixed point <=> invariant state", c5},
      {"6  lift homogeneity", c6},
      {"7  fluid properties", c7},
      {"8  near-optimality bounds", c8},
      {"9  fluid limit of discrete runs", c9},
      {"10 multiplicative state space collapse", c10},
      {"11 2x2 switch workload suite", c11},
      {"12 matching structure suites", c12},
      {"13 determinism", c13},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
