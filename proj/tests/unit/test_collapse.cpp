#include <doctest.h>

#include "oracles.hpp"
#include "swnet/collapse.hpp"
#include "swnet/error.hpp"

using namespace swnet;

TEST_CASE("2x2 membership") {
  CHECK(iq2x2_membership({1, 1, 3}, 1.0));
  CHECK_FALSE(iq2x2_membership({1, 1, 5}, 1.0));
  CHECK(iq2x2_membership({1, 1, 5}, 0.2));
  CHECK(power_sum(1, 1, 0.2) == doctest::Approx(32.0));
  CHECK(power_sum(0, 0, 0.5) == 0.0);
  for (double a : {0.3, 1.0, 2.5}) {
    for (const Iq2x2Workload w : {Iq2x2Workload{1, 1, 3}, Iq2x2Workload{0.7, 1.9, 4.1}, Iq2x2Workload{2, 0.1, 2.2}}) {
      CHECK(iq2x2_membership(w, a) == oracle::iq2x2_root_exists(w.w1r, w.w1c, w.wtot, a));
    }
  }
}

TEST_CASE("2x2 invariant solve") {
  const Vec a = iq2x2_invariant_solve({1, 1, 2}, 1.0);
  for (double x : a) CHECK(x == doctest::Approx(0.5));
  const Vec b = iq2x2_invariant_solve({1, 1, 3}, 1.0);
  CHECK(b[0] == doctest::Approx(0.25));
  CHECK(b[1] == doctest::Approx(0.75));
  CHECK(b[2] == doctest::Approx(0.75));
  CHECK(b[3] == doctest::Approx(1.25));
  CHECK(b[0] + b[3] == doctest::Approx(b[1] + b[2]));
  CHECK_THROWS_AS(iq2x2_invariant_solve({1, 1, 5}, 1.0), Error);

  const Vec c = iq2x2_invariant_solve({1, 1, 5}, 0.2);
  CHECK(std::abs(std::pow(c[0], 0.2) + std::pow(c[3], 0.2) - std::pow(c[1], 0.2) - std::pow(c[2], 0.2)) < 1e-9);
}

TEST_CASE("fast 2x2 lift matches the generic solver") {
  const NetworkModel sw = presets::iq_switch(2);
  const RatVec lam(4, parse_rational("1/2"));
  const VirtualResourceSet v = enumerate_dual_vertices(sw);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const LiftMap lift = make_lift_map(sw, lam, WeightFunction::power(alpha), v);
    for (const Vec& q : std::vector<Vec>{{1, 0, 0, 0}, {2, 1, 0.5, 3}, {0.2, 0.4, 0.9, 0.1}}) {
      const auto fast = lift_iq2x2_fast(q, alpha);
      if (!fast) continue;
      CHECK(sup_distance(*fast, lift(q).r_star) <= 1e-6);
    }
  }
}

TEST_CASE("alpha monotonicity probe") {
  const MonotonicityReport r = alpha_monotonicity_probe({1.0, 0.5, 0.2});
  CHECK(r.pass());
  REQUIRE(r.pairs.size() == 2);
  CHECK(r.pairs[0].nesting_violations == 0);
  CHECK(r.pairs[0].strict_witnesses > 0);
  const MonotonicityReport single = alpha_monotonicity_probe({1.0});
  CHECK(single.pairs.empty());
  CHECK(single.pass());
  CHECK_THROWS_AS(alpha_monotonicity_probe({0.5, 1.0}), Error);
  const auto th = membership_threshold({1, 1, 5});
  REQUIRE(th.has_value());
  CHECK(*th < 1.0);
  CHECK(iq2x2_membership({1, 1, 5}, *th));
}

TEST_CASE("near-optimality factor") {
  CHECK(near_optimality_factor(4, 1.0) == doctest::Approx(2.0));
  CHECK(near_optimality_factor(4, 0.1) == doctest::Approx(1.134).epsilon(1e-3));
  const NearOptimalityReport r = near_optimality_audit(4, std::nullopt, false, {});
  CHECK_FALSE(r.upper_factor.has_value());
}

TEST_CASE("matching structure") {
  CHECK(permutations(3).size() == 6);
  const MatchingReport r = matching_structure_checks(2, 200, 20, 3);
  CHECK(r.pass());
  CHECK(r.closure_samples == 200);
  CHECK(r.coverage_samples == 20);
}

TEST_CASE("collapse experiment regimes") {
  MsscConfig cfg;
  cfg.model = presets::iq_switch(2);
  cfg.policy = Policy::mw(WeightFunction::power(1));
  cfg.lambda = RatVec(4, parse_rational("1/4"));
  cfg.q0_hat = Vec(4, 0.0);
  cfg.r_list = {1, 10};
  cfg.reps = 3;
  const CollapseReport sub = mssc_experiment(cfg);
  CHECK(sub.trivial_lift);
  CHECK(sub.per_r[0].sub_asymptotic);
  CHECK_FALSE(sub.per_r[1].sub_asymptotic);
  // The lift is zero, so the numerator is sup of the sampled path itself.
  for (const MsscRow& row : sub.rows) CHECK(row.ratio <= row.sup_q / std::max(row.sup_q, 1.0) + 1e-12);

  cfg.threads = 3;
  const CollapseReport again = mssc_experiment(cfg);
  for (std::size_t i = 0; i < sub.rows.size(); ++i) CHECK(again.rows[i].ratio == sub.rows[i].ratio);
}
