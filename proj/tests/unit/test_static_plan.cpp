#include <doctest.h>

#include "oracles.hpp"
#include "swnet/error.hpp"
#include "swnet/static_plan.hpp"

using namespace swnet;

namespace {

Rational R(const char* s) { return parse_rational(s); }

}  // namespace

TEST_CASE("static planning on the two-queue example") {
  const NetworkModel m = presets::ex2();
  CHECK(solve_primal(m, {R("1"), R("1")}).value == 1);
  const PrimalResult p30 = solve_primal(m, {R("3"), R("0")});
  CHECK(p30.value == 1);
  CHECK(p30.alpha == RatVec{R("1"), R("0")});
  CHECK(solve_primal(m, {R("0"), R("0")}).value == 0);

  const DualResult d = solve_dual(m, {R("1"), R("1")});
  CHECK(d.value == 1);
  CHECK(solve_dual(m, {R("3"), R("0")}).value == 1);
  CHECK(solve_dual(m, {R("0"), R("0")}).value == 0);

  const LoadClass a = classify_load(m, RatVec{R("1.5"), R("0.5")});
  CHECK(a.kind == LoadKind::kStrictlyAdmissible);
  CHECK(a.primal_value == R("5/6"));
  CHECK(classify_load(m, RatVec{R("1"), R("1")}).kind == LoadKind::kCritical);
  CHECK(classify_load(m, RatVec{R("0"), R("1.1")}).kind == LoadKind::kInadmissible);
  const LoadClass f = classify_load(m, Vec{1.0, 1.0});
  CHECK(f.approximate);
  CHECK(f.kind == LoadKind::kCritical);
}

TEST_CASE("vertex enumeration") {
  const NetworkModel m = presets::ex2();
  const VirtualResourceSet v = enumerate_dual_vertices(m);
  const std::vector<RatVec> expected{{R("0"), R("0")}, {R("0"), R("1")}, {R("1/3"), R("0")}, {R("1/3"), R("2/3")}};
  CHECK(v.vertices == expected);
  CHECK(v.vertices == oracle::vertices_2d({{R("3"), R("0")}, {R("1"), R("1")}}));
  CHECK(v.s_star() == std::vector<RatVec>{{R("0"), R("1")}, {R("1/3"), R("2/3")}});
  for (const RatVec& x : v.vertices) CHECK(is_dual_vertex(m, x));
  CHECK_FALSE(is_dual_vertex(m, {R("1/6"), R("0")}));

  const NetworkModel one = validate_network(ScheduleSet(std::vector<Vec>{{1.0}}), RoutingMatrix(1));
  const VirtualResourceSet o = enumerate_dual_vertices(one);
  CHECK(o.vertices == std::vector<RatVec>{{R("0")}, {R("1")}});
  CHECK(o.s_star() == std::vector<RatVec>{{R("1")}});

  CHECK_THROWS_AS(enumerate_dual_vertices(presets::iq_switch(4)), Error);
  CHECK_THROWS_AS(enumerate_dual_vertices(m, 3), Error);
}

TEST_CASE("critically loaded resources") {
  const NetworkModel m = presets::ex2();
  const VirtualResourceSet v = enumerate_dual_vertices(m);
  const CriticalSets c11 = critically_loaded(v, {R("1"), R("1")});
  CHECK(c11.xi(v) == std::vector<RatVec>{{R("0"), R("1")}, {R("1/3"), R("2/3")}});
  const CriticalSets c30 = critically_loaded(v, {R("3"), R("0")});
  CHECK(c30.xi(v) == std::vector<RatVec>{{R("1/3"), R("2/3")}});
  const auto plus = c30.xi_plus(v);
  CHECK(std::find(plus.begin(), plus.end(), RatVec{R("1/3"), R("0")}) != plus.end());
  CHECK(critically_loaded(v, {R("1/2"), R("1/2")}).clvr.empty());

  const NetworkModel t = presets::tandem(2);
  CHECK(critical_rate(t, {R("3/10"), R("1/5")}) == RatVec{R("3/10"), R("1/2")});
}

TEST_CASE("complete loading") {
  for (std::size_t m : {2u, 3u}) {
    const NetworkModel sw = presets::iq_switch(m);
    const VirtualResourceSet v = enumerate_dual_vertices(sw);
    RatVec lam(m * m, Rational(1) / Rational(static_cast<long>(m)));
    const CompleteLoading cl = complete_loading_check(sw, v, critically_loaded(v, lam));
    REQUIRE(cl.holds);
    CHECK(cl.weights.size() == 2 * m);
    for (const Rational& w : cl.weights) CHECK(w == Rational(1) / Rational(static_cast<long>(2 * m)));
  }
  const NetworkModel e = presets::ex2();
  const VirtualResourceSet v = enumerate_dual_vertices(e);
  CHECK_FALSE(complete_loading_check(e, v, critically_loaded(v, {R("1"), R("1")})).holds);
  CHECK_FALSE(complete_loading_check(e, v, critically_loaded(v, {R("1/4"), R("1/4")})).holds);
}

TEST_CASE("hull membership") {
  const NetworkModel m = presets::ex2();
  CHECK(hull_membership(m, {R("2"), R("0.5")}));
  CHECK(hull_weights(m, {R("2"), R("0.5")}) == std::optional<RatVec>(RatVec{R("1/2"), R("1/2")}));
  CHECK_FALSE(hull_membership(m, {R("2"), R("1")}));
  CHECK(hull_membership(m, {R("1"), R("1")}));
  CHECK(dominated_membership(m, {R("1"), R("1/2")}));
  CHECK_FALSE(dominated_membership(m, {R("0"), R("11/10")}));
}
