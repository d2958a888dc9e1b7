#include <doctest.h>

#include "swnet/error.hpp"
#include "swnet/fluid.hpp"

using namespace swnet;

TEST_CASE("single-queue fluid paths") {
  const NetworkModel one = validate_network(ScheduleSet(std::vector<Vec>{{1.0}}), RoutingMatrix(1));
  const Policy p = Policy::mw(WeightFunction::power(1));
  const FluidTrajectory crit = integrate_fluid(one, p, Vec{1}, Vec{2}, 1e-3, 3);
  for (const Vec& q : crit.q) CHECK(q[0] == doctest::Approx(2.0));
  const FluidTrajectory drain = integrate_fluid(one, p, Vec{0}, Vec{1}, 1e-3, 2);
  for (std::size_t k = 0; k < drain.points(); ++k) {
    CHECK(drain.q[k][0] == doctest::Approx(std::max(0.0, 1.0 - drain.t[k])).epsilon(1e-9));
  }
  CHECK(fluid_audit(drain).ok());
  CHECK_THROWS_AS(integrate_fluid(one, p, Vec{0}, Vec{1}, 0.5, 2), Error);
}

TEST_CASE("two-queue example converges to its lift") {
  const NetworkModel m = presets::ex2();
  const RatVec lam{Rational(1), Rational(1)};
  const WeightFunction f = WeightFunction::power(1);
  const FluidTrajectory tr = integrate_fluid(m, Policy::mw(f), Vec{1, 1}, Vec{3, 0}, 1e-3, 5);
  CHECK(fluid_audit(tr).ok());
  const LiftMap lift = make_lift_map(m, lam, f, enumerate_dual_vertices(m));
  CHECK(sup_distance(tr.q.back(), lift(Vec{3, 0}).r_star) <= 0.05);
  for (std::size_t k = 1; k < tr.points(); ++k) {
    CHECK(lyapunov(f, tr.q[k]) <= lyapunov(f, tr.q[k - 1]) + 1e-2);
  }
  const FeasibilityCheck fc = feasibility_preservation_check(m, lam, lift.xis(), tr);
  CHECK(fc.ok);
  const DriftCheck dc = lyapunov_drift_check(m, Vec{1, 1}, f, tr);
  CHECK(dc.checked > 0);
  CHECK(dc.max_residual <= 0.1);

  const FluidTrajectory from10 = integrate_fluid(m, Policy::mw(f), Vec{1, 1}, Vec{1, 0}, 1e-3, 5);
  const ConvergenceResult cr = convergence_to_invariant(lift, from10, 0.05, 5);
  REQUIRE(cr.hitting_time.has_value());
  CHECK(cr.final_distance < 0.05);
}

TEST_CASE("invariant start") {
  const NetworkModel m = presets::ex2();
  const WeightFunction f = WeightFunction::power(1);
  const FluidTrajectory tr = integrate_fluid(m, Policy::mw(f), Vec{1, 1}, Vec{0.6, 1.2}, 1e-3, 1);
  const LiftMap lift = make_lift_map(m, {Rational(1), Rational(1)}, f, enumerate_dual_vertices(m));
  const ConvergenceResult cr = convergence_to_invariant(lift, tr, 0.05);
  REQUIRE(cr.hitting_time.has_value());
  CHECK(*cr.hitting_time == 0.0);
  CHECK(std::abs(lyapunov_drift(m, Vec{1, 1}, f, Vec{0.6, 1.2})) < 1e-12);
}

TEST_CASE("2x2 switch reaches its invariant manifold for several alphas") {
  const NetworkModel sw = presets::iq_switch(2);
  const RatVec lam(4, parse_rational("1/2"));
  const VirtualResourceSet v = enumerate_dual_vertices(sw);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const WeightFunction f = WeightFunction::power(alpha);
    const FluidTrajectory tr = integrate_fluid(sw, Policy::mw(f), Vec(4, 0.5), Vec{1, 0, 0, 0}, 1e-3, 10);
    const LiftMap lift = make_lift_map(sw, lam, f, v);
    const ConvergenceResult cr = convergence_to_invariant(lift, tr, 0.05, 10);
    CHECK(cr.hitting_time.has_value());
  }
}

TEST_CASE("trajectory distance") {
  const SampledPath a{{0, 1, 2}, {{1, 1}, {1, 1}, {1, 1}}};
  const SampledPath b{{0, 0.5, 2}, {{3, 0}, {3, 0}, {3, 0}}};
  CHECK(trajectory_distance(a, a) == 0.0);
  CHECK(trajectory_distance(a, b) == doctest::Approx(2.0));
  const SampledPath c{{0, 1}, {{1, 1}, {1, 1}}};
  CHECK_THROWS_AS(trajectory_distance(a, c), Error);
}
