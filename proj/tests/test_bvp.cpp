#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "guided/bvp.hpp"
#include "support.hpp"

using namespace guided;
using namespace guided::bvp;
using Catch::Matchers::WithinAbs;

namespace {

BoundaryProblem make(const char* a1, const char* a2, const char* g1 = "0", const char* g2 = "0",
                     const char* gg = "0") {
  BoundaryProblem p;
  p.alpha1 = expr::Expression::parse(a1, "z");
  p.alpha2 = expr::Expression::parse(a2, "z");
  p.g1 = expr::Expression::parse(g1, "x");
  p.g2 = expr::Expression::parse(g2, "y");
  p.g_gamma = expr::Expression::parse(gg, "z");
  return p;
}

BoundaryProblem from_config(const std::string& name) {
  return std::get<guided::config::BvpSpec>(support::load(name).problem).problem;
}

// u* = (x - y)^2 restricted to the three boundary parts of the straight triangle
BoundaryProblem straight_square() { return make("(1+z)/2", "(1-z)/2", "x^2", "y^2", "z^2"); }

double field_error(const BvpSolution& sol, const std::function<double(double, double)>& exact, int lattice) {
  double e = 0;
  for (int i = 0; i <= lattice; ++i)
    for (int j = 0; j <= lattice; ++j) {
      double x = static_cast<double>(i) / lattice;
      double y = static_cast<double>(j) / lattice;
      if (!sol.curve->contains({x, y}, 1e-12)) continue;
      e = std::max(e, std::abs(sol.u(x, y) - exact(x, y)));
    }
  return e;
}

}  // namespace

TEST_CASE("projection along the characteristic direction", "[bvp]") {
  auto straight = make("(1+z)/2", "(1-z)/2");
  auto q = project_pi3({0.2, 0.3}, straight);
  CHECK_THAT(q.x, WithinAbs(0.45, 1e-12));
  CHECK_THAT(q.y, WithinAbs(0.55, 1e-12));
  auto on = project_pi3({0.7, 0.3}, straight);
  CHECK_THAT(on.x, WithinAbs(0.7, 1e-12));
  CHECK_THAT(on.y, WithinAbs(0.3, 1e-12));

  auto curved = make("(1+z)/2", "(1-z)/2 + 0.2*(1-z^2)");
  Curve c(curved);
  auto o = project_pi3({0, 0}, curved);
  CHECK(std::abs(c.omega(o)) < 1e-12);
  CHECK(std::abs(o.x - o.y) < 1e-12);
}

TEST_CASE("omega is constant along projections", "[bvp][property]") {
  for (const auto& p : {make("(1+z)/2", "(1-z)/2"), make("(1+z)/2", "(1-z)/2 + 0.2*(1-z^2)")}) {
    Curve c(p);
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0, 1);
    int tested = 0;
    while (tested < 100) {
      Point q{u(rng), u(rng)};
      if (!c.contains(q, 0)) continue;
      ++tested;
      CHECK(std::abs(c.omega(project_pi3(q, p)) - c.omega(q)) < 1e-12);
    }
  }
}

TEST_CASE("curve validation", "[bvp]") {
  CHECK_THROWS_AS(Curve(make("(1+z)/2", "(1+z)/2")), DegenerateParametrization);
  CHECK_THROWS_AS(Curve(make("(1+z^3)/2", "(1-z^3)/2")), DegenerateParametrization);
  CHECK_THROWS_AS(Curve(make("z/2", "(1-z)/2")), DegenerateParametrization);
}

TEST_CASE("boundary systems", "[bvp]") {
  SECTION("straight edge") {
    auto sys = build_boundary_system(make("(1+z)/2", "(1-z)/2"));
    CHECK(sys.pconf.anchors == std::vector<double>{-1, 0, 1});
    for (double t : {-1.0, -0.3, 0.0, 0.8, 1.0}) {
      CHECK_THAT(sys.pconf.maps[0](t), WithinAbs((1 + t) / 2, 1e-12));
      CHECK_THAT(sys.pconf.maps[1](t), WithinAbs((t - 1) / 2, 1e-12));
    }
    CHECK(sys.omega1.empty());
    CHECK(sys.omega2.empty());
    CHECK(sys.conjugacy.pass);
    CHECK(sys.conjugacy.max_defect < 1e-9);
  }
  SECTION("curved edge") {
    auto sys = build_boundary_system(from_config("curved_bvp.json"));
    CHECK(sys.omega1.empty());
    CHECK(sys.omega2.empty());
    CHECK(sys.conjugacy.pass);
    CHECK(sys.conjugacy.max_defect < 1e-9);
    CHECK(sys.conjugacy.properness_violations == 0);
  }
  SECTION("tangency at the corners") {
    auto sys = build_boundary_system(make("(1+z)/2", "(1-sin(pi*z/2))/2"));
    CHECK(sys.omega1.empty());
    REQUIRE(sys.omega2.parts().size() == 2);
    CHECK_THAT(sys.omega2.parts()[0].lo, WithinAbs(-1, 1e-6));
    CHECK_THAT(sys.omega2.parts()[1].hi, WithinAbs(1, 1e-6));
    CHECK_FALSE(sys.flags.empty());
  }
}

TEST_CASE("induced derivatives sum to one", "[bvp][property]") {
  for (const char* name : {"straight_bvp.json", "curved_bvp.json", "planted_cycle_bvp.json", "escape_bvp.json"}) {
    auto sys = build_boundary_system(from_config(name));
    for (int j = 0; j <= 1000; ++j) {
      double t = -sys.curve.problem().m + (sys.curve.problem().m + sys.curve.problem().n) * j / 1000.0;
      REQUIRE(std::abs(sys.pconf.maps[0].derivative(t) + sys.pconf.maps[1].derivative(t) - 1) < 1e-9);
    }
    CHECK(sys.lambda_defect < 1e-6);
  }
}

TEST_CASE("fixed points", "[bvp]") {
  auto a = fixed_point(ScalarMap::parse("(t+1)/4"), -1, 1);
  CHECK(std::abs(a.t - 1.0 / 3) < 1e-12);
  CHECK_THAT(a.derivative, WithinAbs(0.25, 1e-12));
  auto b = fixed_point(ScalarMap::parse("(t-1)/4"), -1, 1);
  CHECK(std::abs(b.t + 1.0 / 3) < 1e-12);
  CHECK_THROWS_AS(fixed_point(ScalarMap::parse("t"), -1, 1), InconclusiveError);
  CHECK_THROWS_AS(fixed_point(ScalarMap::parse("t/4 + 2"), -1, 1), NoBracket);
}

TEST_CASE("solvability layers", "[bvp]") {
  SECTION("straight edge routes through the fixed point") {
    auto rep = analyze_solvability(build_boundary_system(make("(1+z)/2", "(1-z)/2")), 0.01, 64);
    CHECK(rep.verdict == Solvability::Solvable);
    CHECK(rep.route == "fixed_point");
    REQUIRE(rep.fp12.has_value());
    CHECK(std::abs(rep.fp12->t - 1.0 / 3) < 1e-12);
    CHECK(std::abs(rep.fp12->derivative - 0.25) < 1e-10);
    REQUIRE(rep.fp21.has_value());
    CHECK(std::abs(rep.fp21->t + 1.0 / 3) < 1e-12);
  }
  SECTION("planted guided cycle") {
    auto rep = analyze_solvability(build_boundary_system(from_config("planted_cycle_bvp.json")), 0.01, 64);
    CHECK(rep.verdict == Solvability::NotSolvable);
    CHECK(rep.route == "cycles");
    bool planted = false;
    for (const auto& c : rep.cycles.cycles)
      planted = planted || (c.generators.size() == 2 && std::abs(c.points[0] + 1.0 / 3) < 1e-9 &&
                            std::abs(c.points[1] - 1.0 / 3) < 1e-9);
    CHECK(planted);
  }
  SECTION("escape from the corner") {
    auto rep = analyze_solvability(build_boundary_system(from_config("escape_bvp.json")), 0.01, 64);
    CHECK(rep.verdict == Solvability::Solvable);
    CHECK(rep.route == "escape");
  }
}

TEST_CASE("boundary data reduction", "[bvp]") {
  auto zero = make("(1+z)/2", "(1-z)/2", "x^2", "y^2", "((1+z)/2)^2 + ((1-z)/2)^2");
  auto sys0 = build_boundary_system(zero);
  auto r0 = reduce_boundary_data(zero, sys0);
  for (double t = -1; t <= 1; t += 0.125) CHECK(std::abs(r0.h(t)) < 1e-15);

  auto sq = straight_square();
  auto r = reduce_boundary_data(sq, build_boundary_system(sq));
  for (double t = -1; t <= 1; t += 0.125) CHECK_THAT(r.h(t), WithinAbs((t * t - 1) / 2, 1e-15));
  CHECK(r.h_start == 0);
  CHECK(r.h_end == 0);

  auto bad = make("(1+z)/2", "(1-z)/2", "x^2 + 1", "y^2", "z^2");
  CHECK_THROWS_AS(reduce_boundary_data(bad, build_boundary_system(bad)), CornerMismatch);
}

TEST_CASE("solution reconstruction", "[bvp]") {
  SECTION("straight edge, u = (x - y)^2") {
    auto p = straight_square();
    auto sol = solve_bvp(p, build_boundary_system(p), 512);
    CHECK(sol.boundary_defect < 1e-6);
    CHECK(field_error(sol, [](double x, double y) { return (x - y) * (x - y); }, 64) < 1e-5);
    CHECK(fd_residual(sol, 1.0 / 128, 2) < 1e-3);
    CHECK(std::abs(sol.chi_origin) < 1e-12);
    CHECK(sup_distance(sol.chi, [](double t) { return t * t; }) < 1e-5);
    CHECK(std::abs(sol.phi(0.5)) < 1e-5);
    CHECK(std::abs(sol.psi(0.5)) < 1e-5);
    CHECK_THROWS_AS(sol.u(0.9, 0.9), MapEscape);
  }
  SECTION("straight edge, u = x^2 + y^2") {
    auto p = make("(1+z)/2", "(1-z)/2", "x^2", "y^2", "((1+z)/2)^2 + ((1-z)/2)^2");
    auto sol = solve_bvp(p, build_boundary_system(p), 256);
    CHECK(sol.chi.sup_norm() < 1e-12);
    CHECK(field_error(sol, [](double x, double y) { return x * x + y * y; }, 64) < 1e-6);
  }
  SECTION("the field does not depend on the gauge") {
    auto p = straight_square();
    auto sys = build_boundary_system(p);
    auto a = solve_bvp(p, sys, 256);
    BvpOptions opts;
    opts.mu = 0.7;
    auto b = solve_bvp(p, sys, 256, opts);
    double d = 0;
    for (int i = 0; i <= 32; ++i)
      for (int j = 0; i + j <= 32; ++j) d = std::max(d, std::abs(a.u(i / 32.0, j / 32.0) - b.u(i / 32.0, j / 32.0)));
    CHECK(d < 1e-8);
  }
  SECTION("lattice export") {
    auto p = straight_square();
    auto sol = solve_bvp(p, build_boundary_system(p), 64);
    auto csv = field_csv(sol, 4);
    CHECK(csv.rfind("x,y,u\n", 0) == 0);
  }
}
