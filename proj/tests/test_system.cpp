#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "guided/orbits.hpp"
#include "support.hpp"

using namespace guided;
using namespace guided::gds;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

// Rotations by the given fractions of a turn; Lambda_1 = {0, pi}, Lambda_2 = {pi/2, 3pi/2}.
GuidedSystem circle(const std::string& turn1, const std::string& turn2) {
  return GuidedSystem::from_maps(StateSpace::circle(2 * kPi),
                                 {ScalarMap::parse("t + 2*pi*(" + turn1 + ")"),
                                  ScalarMap::parse("t + 2*pi*(" + turn2 + ")")},
                                 {IntervalSet::points({0, kPi}), IntervalSet::points({kPi / 2, 3 * kPi / 2})});
}

GuidedSystem standard() {
  return GuidedSystem::from_maps(StateSpace::interval(-1, 1),
                                 {ScalarMap::parse("(t-1)/2"), ScalarMap::parse("(t+1)/2")}, {{}, {}});
}

GuidedSystem quadratic() {
  return GuidedSystem::from_maps(StateSpace::interval(-1, 1),
                                 {ScalarMap::parse("((t+1)/2)^2"), ScalarMap::parse("t - ((t+1)/2)^2")},
                                 {IntervalSet::points({-1}), IntervalSet::points({1})});
}

bool is_quarter_turn(double x) {
  double k = x / (kPi / 2);
  return std::abs(k - std::round(k)) < 1e-9;
}

}  // namespace

TEST_CASE("allowed generators respect the guiding band", "[gds]") {
  auto sys = circle("(sqrt(5)-1)/2", "0.3");
  CHECK(allowed_generators(sys, 0.0) == std::vector<int>{1});
  CHECK(allowed_generators(sys, kPi / 3) == std::vector<int>{0, 1});
  CHECK(allowed_generators(sys, 1e-12) == std::vector<int>{1});
  CHECK(allowed_generators(sys, 2 * kPi - 1e-12) == std::vector<int>{1});
  CHECK(allowed_generators(sys, kPi / 2) == std::vector<int>{0});
}

TEST_CASE("guiding sets must not share a point", "[gds]") {
  CHECK_THROWS(GuidedSystem::from_maps(StateSpace::interval(-1, 1),
                                       {ScalarMap::parse("(t-1)/2"), ScalarMap::parse("(t+1)/2")},
                                       {IntervalSet::points({0}), IntervalSet::points({0})}));
}

TEST_CASE("state space metrics", "[gds]") {
  auto c = StateSpace::circle(2 * kPi);
  CHECK_THAT(c.distance(0.1, 2 * kPi - 0.1), WithinAbs(0.2, 1e-14));
  CHECK_THAT(c.normalize(-0.5), WithinAbs(2 * kPi - 0.5, 1e-14));
  auto i = StateSpace::interval(-1, 1);
  CHECK(i.distance(-1, 1) == 2);
}

TEST_CASE("orbit sets", "[gds]") {
  SECTION("dyadic affine pair fills the interval") {
    auto cloud = guided_orbit_set(standard(), 1.0, 12, std::ldexp(1.0, -9));
    CHECK(cloud.coverage == 1.0);
    CHECK(cloud.points.front() == 1.0);
  }
  SECTION("quarter and half turns stay on the axes") {
    auto cloud = guided_orbit_set(circle("1/4", "1/2"), 0.0, 50, 0.01);
    CHECK(cloud.coverage < 1.0);
    for (double x : cloud.points) CHECK(is_quarter_turn(x));
  }
  SECTION("golden rotation covers the circle") {
    auto cloud = guided_orbit_set(circle("(sqrt(5)-1)/2", "0.3"), 0.0, 10000, 0.01);
    CHECK(cloud.coverage == 1.0);
    CHECK(cloud.depth_reached <= 10000);
  }
}

TEST_CASE("returned orbits re-validate", "[gds][property]") {
  std::mt19937_64 rng(3);
  std::vector<GuidedSystem> corpus = {standard(), quadratic(), circle("1/4", "1/2"),
                                      circle("(sqrt(5)-1)/2", "0.3")};
  for (const auto& sys : corpus) {
    std::uniform_real_distribution<double> xs(sys.space().lower(), sys.space().upper());
    for (int k = 0; k < 40; ++k) {
      Orbit o = random_orbit(sys, sys.space().normalize(xs(rng)), 30, rng);
      REQUIRE(first_invalid_step(sys, o) == -1);
    }
    auto cloud = guided_orbit_set(sys, sys.space().normalize(xs(rng)), 8, 0.05);
    for (std::size_t k = 0; k < cloud.points.size(); k += 7) {
      Orbit o = cloud.path_to(k);
      REQUIRE(first_invalid_step(sys, o) == -1);
      REQUIRE(sys.space().distance(o.points.back(), cloud.points[k]) <= sys.tolerances().step);
    }
  }
  // a step through a forbidden generator is caught
  auto sys = circle("1/4", "1/2");
  Orbit bad{{0.0, kPi / 2}, {0}};
  CHECK(first_invalid_step(sys, bad) == 0);
}

TEST_CASE("minimality probes", "[gds]") {
  SECTION("standard pair") {
    auto v = probe_minimality(standard(), 0.01, 100000);
    CHECK(v.kind == MinimalityKind::MinimalEvidence);
    CHECK(v.worst_coverage == 1.0);
  }
  SECTION("quarter and half turns") {
    auto sys = circle("1/4", "1/2");
    auto v = probe_minimality(sys, 0.01, 100000);
    REQUIRE(v.kind == MinimalityKind::NotMinimal);
    CellGrid grid(sys.space(), 0.01);
    std::vector<std::int64_t> axes;
    for (double a : {0.0, kPi / 2, kPi, 3 * kPi / 2}) axes.push_back(grid.index(a));
    CHECK(v.witness_cells == axes);
    // forward closure of the witness
    for (double x : v.witness_points)
      for (int i : allowed_generators(sys, x)) {
        auto c = grid.index(sys.apply(i, x));
        CHECK(std::find(v.witness_cells.begin(), v.witness_cells.end(), c) != v.witness_cells.end());
      }
  }
  SECTION("golden rotation") {
    auto v = probe_minimality(circle("(sqrt(5)-1)/2", "0.3"), 0.01, 100000);
    CHECK(v.kind == MinimalityKind::MinimalEvidence);
  }
}

TEST_CASE("weak attractor probes", "[gds]") {
  CHECK(probe_weak_attractor(circle("(sqrt(5)-1)/2", "1/2"), 0.0, 0.01, 100000).kind == AttractorKind::Yes);
  CHECK(probe_weak_attractor(standard(), 0.0, 0.01, 100000).kind == AttractorKind::Yes);
  auto sys = circle("1/4", "1/2");
  auto v = probe_weak_attractor(sys, 0.3, 0.01, 100000);
  REQUIRE(v.kind == AttractorKind::No);
  REQUIRE(v.witness_seed.has_value());
  CHECK(sys.space().distance(*v.witness_seed, 0.0) <= 0.01);
  CHECK(v.witness_cell == 0);
}

TEST_CASE("guided cycles", "[gds]") {
  auto rational = find_guided_cycles(circle("1/4", "1/2"), 6);
  REQUIRE(rational.cycles.size() == 1);
  const auto& c = rational.cycles.front();
  CHECK(c.generators == std::vector<int>{1, 1});
  CHECK_THAT(c.points[0], WithinAbs(0.0, 1e-12));
  CHECK_THAT(c.points[1], WithinAbs(kPi, 1e-12));

  CHECK(find_guided_cycles(standard(), 6).cycles.empty());

  // the endpoints of the quadratic pair are fixed by the generator that is still allowed there
  auto quad = find_guided_cycles(quadratic(), 6);
  REQUIRE(quad.cycles.size() == 2);
  CHECK(quad.cycles[0].generators == std::vector<int>{1});
  CHECK_THAT(quad.cycles[0].points[0], WithinAbs(-1.0, 1e-12));
  CHECK(quad.cycles[1].generators == std::vector<int>{0});
  CHECK_THAT(quad.cycles[1].points[0], WithinAbs(1.0, 1e-12));
}

TEST_CASE("contraction certificates", "[gds]") {
  auto r = check_contraction_minimality(standard(), 2000);
  CHECK(r.certified);
  CHECK_THAT(r.lipschitz, WithinAbs(0.5, 1e-12));
  REQUIRE(r.ranges.size() == 2);

  auto id = GuidedSystem::from_maps(StateSpace::interval(0, 1), {ScalarMap::parse("t")}, {{}});
  auto refused = check_contraction_minimality(id, 2000);
  CHECK_FALSE(refused.certified);
  CHECK(refused.failed_hypothesis == "contraction");

  auto gaps = GuidedSystem::from_maps(StateSpace::interval(0, 1),
                                      {ScalarMap::parse("t/3"), ScalarMap::parse("t/3 + 2/3")}, {{}, {}});
  CHECK(check_contraction_minimality(gaps, 2000).failed_hypothesis == "range_cover");

  CHECK(check_contraction_minimality(quadratic(), 2000).failed_hypothesis == "unguided");

  // halving towards the four corners of the unit square, one axis at a time
  auto axis = GuidedSystem::from_maps(StateSpace::interval(0, 1),
                                      {ScalarMap::parse("t/2"), ScalarMap::parse("(t+1)/2"),
                                       ScalarMap::parse("t/2"), ScalarMap::parse("(t+1)/2")},
                                      {{}, {}, {}, {}});
  CHECK(check_contraction_minimality(axis, 2000).certified);
}

TEST_CASE("a certificate rules out a NotMinimal probe", "[gds][property]") {
  std::vector<GuidedSystem> corpus = {
      standard(),
      GuidedSystem::from_maps(StateSpace::interval(0, 3),
                              {ScalarMap::parse("t/3"), ScalarMap::parse("t/3+1"), ScalarMap::parse("t/3+2")},
                              {{}, {}, {}}),
      GuidedSystem::from_maps(StateSpace::interval(0, 1),
                              {ScalarMap::parse("0.6*t"), ScalarMap::parse("0.6*t + 0.4")}, {{}, {}}),
  };
  for (const auto& sys : corpus) {
    REQUIRE(check_contraction_minimality(sys, 2000).certified);
    CHECK(probe_minimality(sys, 0.02, 100000).kind != MinimalityKind::NotMinimal);
  }
}

TEST_CASE("conjugacy verification", "[gds]") {
  auto sys = standard();
  auto id = ScalarMap::parse("t");
  auto same = verify_conjugacy(sys, sys, id, id, 200);
  CHECK(same.pass);
  CHECK(same.max_defect == 0.0);

  auto mirror = ScalarMap::parse("-t");
  auto bad = verify_conjugacy(sys, sys, mirror, mirror, 200);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_defect > 0.1);

  auto moved = GuidedSystem::from_maps(StateSpace::interval(-1, 3),
                                       {ScalarMap::parse("(t-1)/2"), ScalarMap::parse("(t+3)/2")}, {{}, {}});
  auto good = verify_conjugacy(sys, moved, ScalarMap::parse("2*t+1"), ScalarMap::parse("(t-1)/2"), 200);
  CHECK(good.pass);
  CHECK(good.max_defect < 1e-12);
  CHECK(good.properness_violations == 0);

  CHECK_THROWS_AS(verify_conjugacy(sys, moved, ScalarMap::parse("2*t+1"), ScalarMap::parse("t"), 50),
                  NotInvertible);
}

TEST_CASE("conjugate systems get the same verdict", "[gds][property]") {
  auto a = quadratic();
  // phi(t) = 2t + 1 carries [-1, 1] onto [-1, 3] and the guiding points -1, 1 onto -1, 3
  auto b = GuidedSystem::from_maps(
      StateSpace::interval(-1, 3),
      {ScalarMap::parse("2*((t+1)/4)^2 + 1"), ScalarMap::parse("t - 2*((t+1)/4)^2")},
      {IntervalSet::points({-1}), IntervalSet::points({3})});
  auto rep = verify_conjugacy(a, b, ScalarMap::parse("2*t+1"), ScalarMap::parse("(t-1)/2"), 200);
  REQUIRE(rep.pass);
  CHECK(probe_minimality(a, 0.02, 100000).kind == probe_minimality(b, 0.04, 100000).kind);

  auto s = standard();
  auto moved = GuidedSystem::from_maps(StateSpace::interval(-1, 3),
                                       {ScalarMap::parse("(t-1)/2"), ScalarMap::parse("(t+3)/2")}, {{}, {}});
  CHECK(probe_minimality(s, 0.02, 100000).kind == probe_minimality(moved, 0.04, 100000).kind);
}
