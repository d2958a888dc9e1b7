#include <doctest.h>

#include <sstream>

#include "swnet/error.hpp"
#include "swnet/sim.hpp"

using namespace swnet;

TEST_CASE("Lindley step, single hop") {
  const NetworkModel m = presets::ex2();
  const StepResult r = apply_service(m, Vec{2, 0}, Vec{3, 0}, Vec{1, 1});
  CHECK(r.q_next == Vec{1, 1});
  CHECK(r.dY == Vec{1, 0});
}

TEST_CASE("Lindley step, tandem routing") {
  const NetworkModel m = presets::tandem(2);
  const StepResult a = apply_service(m, Vec{2, 1}, Vec{1, 1}, Vec{0, 0});
  CHECK(a.dY == Vec{0, 0});
  CHECK(a.q_next == Vec{1, 1});
  const StepResult b = apply_service(m, Vec{0, 1}, Vec{1, 1}, Vec{0, 0});
  CHECK(b.dY == Vec{1, 0});
  CHECK(b.q_next == Vec{0, 0});
}

TEST_CASE("two hand steps on the two-queue example") {
  const NetworkModel m = presets::ex2();
  const SystemPath p = run(m, Policy::mw(WeightFunction::power(1)), ArrivalModel::deterministic({0, 0}),
                           Vec{5, 0}, 2, 1);
  REQUIRE(p.rows() == 3);
  CHECK(p.Q[1] == Vec{2, 0});
  CHECK(p.Q[2] == Vec{0, 0});
  CHECK(p.chosen[0] == 0);
  CHECK(p.chosen[1] == 0);
  // Schedule (3,0) offers nothing to queue B, so only queue A idles (one unit in slot 1).
  CHECK(p.Y[2] == Vec{1, 0});
  CHECK(conservation_audit(p).ok());
}

TEST_CASE("edge runs") {
  const NetworkModel m = presets::ex2();
  const Policy p = Policy::mw(WeightFunction::power(1));
  const SystemPath z = run(m, p, ArrivalModel::deterministic({1, 1}), Vec{1, 2}, 0, 1);
  CHECK(z.rows() == 1);
  CHECK(z.Q[0] == Vec{1, 2});

  const NetworkModel one = validate_network(ScheduleSet(std::vector<Vec>{{1.0}}), RoutingMatrix(1));
  const SystemPath s = run(one, p, ArrivalModel::bernoulli({1.0}), Vec{3}, 50, 1);
  for (const Vec& q : s.Q) CHECK(q == Vec{3});
}

TEST_CASE("audit passes on runs and catches corruption") {
  const NetworkModel m = presets::iq_switch(2);
  const SystemPath p =
      run(m, Policy::mw(WeightFunction::power(1)), ArrivalModel::bernoulli({0.5, 0.5, 0.5, 0.5}), Vec(4, 0.0), 500, 9);
  CHECK(conservation_audit(p).ok());

  std::ostringstream csv;
  write_csv(csv, p);
  std::istringstream in(csv.str());
  const SystemPath back = read_csv(in, m);
  CHECK(back.Q == p.Q);
  CHECK(back.Y == p.Y);
  CHECK(conservation_audit(back).ok());

  SystemPath bad = back;
  bad.Q[137][2] += 1.0;
  const AuditReport rep = conservation_audit(bad);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations.front().tau == 137);
}

TEST_CASE("tandem run satisfies the queue identity every slot") {
  const NetworkModel m = presets::tandem(3);
  const SystemPath p = run(m, Policy::backpressure(WeightFunction::power(1)),
                           ArrivalModel::bernoulli({0.3, 0.0, 0.1}), Vec{2, 0, 1}, 10000, 4);
  const AuditReport rep = conservation_audit(p);
  CHECK(rep.ok());
  CHECK(rep.rows_checked == 10001);
}

TEST_CASE("rescaling") {
  const NetworkModel m = presets::ex2();
  const Policy p = Policy::mw(WeightFunction::power(1));
  const SystemPath d = run(m, p, ArrivalModel::deterministic({0.5, 0.25}), Vec{0, 0}, 400, 1);
  const ScaledPath f = rescale(d, ScaleKind::kFluid, 100, 4, 41);
  for (std::size_t k = 0; k < f.t.size(); ++k) {
    CHECK(f.a[k][0] == doctest::Approx(0.5 * f.t[k]));
    CHECK(f.a[k][1] == doctest::Approx(0.25 * f.t[k]));
  }
  const ScaledPath id = rescale(d, ScaleKind::kFluid, 1, 400, 401);
  for (std::size_t k = 0; k < id.t.size(); ++k) CHECK(id.q[k] == d.Q[k]);
  CHECK_THROWS_AS(rescale(d, ScaleKind::kFluid, 100, 5, 10), Error);

  // Single queue drains r c slots, i.e. scaled time c / r.
  const NetworkModel one = validate_network(ScheduleSet(std::vector<Vec>{{1.0}}), RoutingMatrix(1));
  const double r = 10, c = 2;
  const SystemPath drain = run(one, p, ArrivalModel::deterministic({0}), Vec{r * c}, 100, 1);
  const ScaledPath dq = rescale(drain, ScaleKind::kDiffusion, r, 1.0, 101);
  for (std::size_t k = 0; k < dq.t.size(); ++k) {
    CHECK(dq.q[k][0] == doctest::Approx(std::max(0.0, c - r * dq.t[k])));
  }
}
