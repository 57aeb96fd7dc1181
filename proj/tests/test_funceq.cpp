#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "guided/funceq.hpp"
#include "support.hpp"

using namespace guided;
using namespace guided::funceq;
using Catch::Matchers::WithinAbs;

namespace {

const gds::StateSpace kI = gds::StateSpace::interval(-1, 1);

gds::GuidedSystem weighted(const std::string& a1, const std::string& a2) {
  return gds::GuidedSystem::from_maps(kI, {ScalarMap::parse("(t+1)/2"), ScalarMap::parse("(t-1)/2")}, {{}, {}}, {},
                                      {ScalarMap::parse(a1), ScalarMap::parse(a2)});
}

GridFunction sample(const gds::StateSpace& s, int m, const char* src) {
  auto e = expr::Expression::parse(src);
  return GridFunction::sample(s, m, [&](double x) { return e.eval(x); });
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
  double d = 0;
  for (int j = 0; j <= a.intervals(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

}  // namespace

TEST_CASE("operator application", "[funceq]") {
  auto sys = weighted("1/4", "1/4");
  const int m = 1024;
  CHECK(sup_distance(apply_operator(sys, sample(kI, m, "t")), [](double t) { return t / 4; }) < 1e-15);
  CHECK(sup_distance(apply_operator(sys, sample(kI, m, "1")), [](double) { return 0.5; }) < 1e-15);
  // the nodes (t +- 1)/2 fall between grid nodes, where t^2 is interpolated linearly
  double err = sup_distance(apply_operator(sys, sample(kI, m, "t^2")), [](double t) { return (t * t + 1) / 8; });
  CHECK(err < 1e-5);
  CHECK(err > 0);
}

TEST_CASE("grid functions clamp only within the slack", "[funceq]") {
  auto f = GridFunction::sample(kI, 4, [](double t) { return t; });
  CHECK_THROWS_AS(f(1.5), MapEscape);
  CHECK(f(1 + 1e-12) == 1.0);
  CHECK(f(0.25) == 0.25);
  CHECK(f.to_csv().rfind("t,value\n", 0) == 0);
}

TEST_CASE("g_n for constant and weighted coefficients", "[funceq]") {
  auto quarter = weighted("1/4", "1/4");
  CHECK(sup_distance(compute_g_n(quarter, 1, GnMode::Iterated, 256), [](double) { return 0.5; }) < 1e-15);
  CHECK(sup_distance(compute_g_n(quarter, 2, GnMode::Iterated, 256), [](double) { return 0.25; }) < 1e-15);
  auto half = weighted("1/2", "1/2");
  for (int n : {1, 3, 7})
    CHECK(sup_distance(compute_g_n(half, n, GnMode::Explicit, 256), [](double) { return 1.0; }) < 1e-14);

  // With non-constant coefficients iteration interpolates g_1 between nodes: the modes differ by O(h^2).
  auto w = weighted("t^2/2", "1/2");
  auto it = compute_g_n(w, 2, GnMode::Iterated, 100);
  auto ex = compute_g_n(w, 2, GnMode::Explicit, 100);
  CHECK(sup_diff(it, ex) < std::pow(2.0 / 100, 2));
  CHECK_THAT(ex(1.0), WithinAbs(0.75, 1e-15));
  CHECK_THAT(ex(-1.0), WithinAbs(0.75, 1e-15));

  CHECK_THROWS_AS(compute_g_n(half, 21, GnMode::Explicit, 16), BudgetExceeded);
}

TEST_CASE("iterated and explicit g_n agree on constant coefficients", "[funceq][property]") {
  std::vector<gds::GuidedSystem> corpus = {weighted("1/4", "1/4"), weighted("1/2", "1/2"), weighted("0.3", "0.6")};
  corpus.push_back(support::load("exmplFE.json").system());
  for (const auto& sys : corpus)
    for (int n = 1; n <= 10; ++n) {
      double budget = 1e-10 * std::pow(2.0, n);
      if (std::pow(2.0, n) > 1e4) break;
      auto a = compute_g_n(sys, n, GnMode::Iterated, 128);
      auto b = compute_g_n(sys, n, GnMode::Explicit, 128);
      if (sys.space().kind() == gds::StateSpace::Kind::Circle) budget = 1e-2;  // trig coefficients, O(h^2)
      CHECK(sup_diff(a, b) < budget);
    }
}

TEST_CASE("contraction certificates", "[funceq]") {
  auto c = certify_contraction(weighted("1/4", "1/4"), 64);
  CHECK(c.certified);
  CHECK(c.m == 1);
  CHECK_THAT(c.norm, WithinAbs(0.5, 1e-15));

  auto half = certify_contraction(weighted("1/2", "1/2"), 64);
  CHECK_FALSE(half.certified);
  CHECK(half.history.size() == 64);
  CHECK_THAT(half.norm, WithinAbs(1.0, 1e-12));

  auto w = certify_contraction(weighted("t^2/2", "1/2"), 64);
  CHECK(w.certified);
  CHECK(w.m == 2);
  CHECK(w.norm < 1);
  CHECK_THAT(w.history[0], WithinAbs(1.0, 1e-15));
  CHECK_THAT(w.history[1], WithinAbs(0.75, 1e-12));
}

TEST_CASE("g_n never increases when the coefficients sum to at most one", "[funceq][property]") {
  std::vector<gds::GuidedSystem> corpus = {weighted("1/4", "1/4"), weighted("1/2", "1/2"),
                                           weighted("t^2/2", "1/2"), weighted("(1+t)/4", "(1-t)/4"),
                                           weighted("cos(t)^2/2", "1/2")};
  corpus.push_back(support::load("exmplFE.json").system());
  for (const auto& sys : corpus) {
    auto c = certify_contraction(sys, 16, 512);
    CHECK(c.monotonicity_violations == 0);
    GridFunction prev = compute_g_n(sys, 1, GnMode::Iterated, 512);
    for (int n = 2; n <= 8; ++n) {
      GridFunction next = compute_g_n(sys, n, GnMode::Iterated, 512);
      for (int j = 0; j <= 512; ++j) REQUIRE(next[j] <= prev[j] + 1e-12);
      prev = next;
    }
  }
}

TEST_CASE("the operator is positive and its norm is sup g_1", "[funceq][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& sys : {weighted("t^2/2", "1/2"), weighted("(1+t)/4", "(1-t)/4")}) {
    double g1 = compute_g_n(sys, 1, GnMode::Iterated, 256).sup_norm();
    for (int k = 0; k < 50; ++k) {
      std::vector<double> v(257), w(257);
      for (int j = 0; j <= 256; ++j) {
        v[j] = u(rng);
        w[j] = std::abs(v[j]);
      }
      GridFunction f(kI, 256, v);
      CHECK(apply_operator(sys, f).sup_norm() <= g1 + 1e-12);
      auto af = apply_operator(sys, GridFunction(kI, 256, w));
      for (double x : af.values()) CHECK(x >= 0);
    }
  }
}

TEST_CASE("Neumann series", "[funceq]") {
  auto sys = weighted("1/4", "1/4");
  const int m = 1024;
  auto s = solve_neumann(sys, sample(kI, m, "t"), 1e-13, 1000);
  CHECK(sup_distance(s.f, [](double t) { return 4.0 * t / 3.0; }) < 1e-8);
  CHECK(s.residual < 1e-10);
  CHECK(solve_neumann(sys, sample(kI, m, "0"), 1e-13, 1000).f.sup_norm() == 0);
  CHECK(sup_distance(solve_neumann(sys, sample(kI, m, "1"), 1e-13, 1000).f, [](double) { return 2.0; }) < 1e-12);

  CHECK_THROWS_AS(solve_neumann(weighted("1/2", "1/2"), sample(kI, m, "t"), 1e-13, 1000), NotCertified);
  CHECK_THROWS_AS(solve_neumann(weighted("t^2/2", "1/2"), sample(kI, m, "t"), 1e-15, 3), NoConvergence);
}

TEST_CASE("Neumann solutions are linear in the data and meet the residual bound", "[funceq][property]") {
  const double tol = 1e-12;
  const int m = 512;
  for (const auto& sys : {weighted("1/4", "1/4"), weighted("t^2/2", "1/2"), weighted("(1+t)/4", "(1-t)/4")}) {
    auto h1 = sample(kI, m, "sin(3*t)");
    auto h2 = sample(kI, m, "exp(t) - t^2");
    auto h12 = sample(kI, m, "sin(3*t) + exp(t) - t^2");
    auto s1 = solve_neumann(sys, h1, tol, 100000);
    auto s2 = solve_neumann(sys, h2, tol, 100000);
    auto s12 = solve_neumann(sys, h12, tol, 100000);
    for (const auto* s : {&s1, &s2, &s12}) CHECK(s->residual <= 10 * tol);
    for (int j = 0; j <= m; ++j) CHECK(std::abs(s1.f[j] + s2.f[j] - s12.f[j]) <= 10 * tol);
  }
}

TEST_CASE("maximum principle", "[funceq]") {
  auto cfg = support::load("exmplFE.json");
  auto sys = cfg.system();
  const auto space = sys.space();
  auto f = GridFunction::sample(space, 1536, [](double t) { return std::cos(3 * t); });
  auto r = check_max_principle(sys, f, 1e-6);
  CHECK(r.pass);
  CHECK(r.residual < 1e-12);
  CHECK_THAT(r.max_value, WithinAbs(1.0, 1e-12));
  CHECK(r.cloud_points > 1);
  CHECK(std::abs(std::cos(3 * r.argmax) - 1) < 1e-9);

  CHECK(check_max_principle(sys, GridFunction::sample(space, 1536, [](double) { return 2.5; }), 1e-6).pass);
  CHECK_THROWS_AS(check_max_principle(sys, GridFunction::sample(space, 1536, [](double t) { return std::sin(t); }),
                                      1e-6),
                  NotASolution);
}

TEST_CASE("triangular families", "[funceq]") {
  // second coordinate of the l1-ball maps; the matrices are transposed differentials
  auto sys = gds::GuidedSystem::from_maps(kI, {ScalarMap::parse("y/3", "y"), ScalarMap::parse("2*y/3", "y")},
                                          {{}, {}});
  TriangularFamily fam;
  fam.matrices = {MatrixFunction::parse({{"1/2", "0"}, {"cos(y)/4", "1/3"}}, "y"),
                  MatrixFunction::parse({{"1/2", "0"}, {"-cos(y)/4", "2/3"}}, "y")};
  std::vector<GridFunction> constant = {GridFunction::sample(kI, 256, [](double) { return 1.5; }),
                                        GridFunction::sample(kI, 256, [](double) { return -2.0; })};
  auto r = verify_triangular_uniqueness(fam, sys, constant, 1e-9);
  CHECK(r.pass);
  CHECK(r.residual < 1e-15);

  std::vector<GridFunction> moving = {GridFunction::sample(kI, 256, [](double) { return 1.0; }),
                                      GridFunction::sample(kI, 256, [](double y) { return y; })};
  auto bad = verify_triangular_uniqueness(fam, sys, moving, 1e-9);
  CHECK_FALSE(bad.pass);
  CHECK(bad.first_nonconstant == 1);

  // P B P^-1 for P = [[1,0],[1,1]] has (2,1) entry b11 + b21 - b22; P^-1 undoes it
  Eigen::MatrixXd p(2, 2);
  p << 1, 0, 1, 1;
  TriangularFamily conj;
  conj.matrices = {MatrixFunction::parse({{"1/2", "0"}, {"1/2 - 1/3 + cos(y)/4", "1/3"}}, "y"),
                   MatrixFunction::parse({{"1/2", "0"}, {"1/2 - 2/3 - cos(y)/4", "2/3"}}, "y")};
  conj.p = p;
  conj.p_inv = p.inverse();
  std::vector<GridFunction> pf = {GridFunction::sample(kI, 256, [](double) { return 1.5; }),
                                  GridFunction::sample(kI, 256, [](double) { return -0.5; })};
  auto cr = verify_triangular_uniqueness(conj, sys, pf, 1e-9);
  CHECK(cr.pass);

  // rotations by pi/3 and -pi/3: neither is triangular and the eigenvalues are not real
  TriangularFamily rot;
  rot.matrices = {MatrixFunction::parse({{"cos(pi/3)", "-sin(pi/3)"}, {"sin(pi/3)", "cos(pi/3)"}}, "y"),
                  MatrixFunction::parse({{"cos(pi/3)", "sin(pi/3)"}, {"-sin(pi/3)", "cos(pi/3)"}}, "y")};
  CHECK_THROWS_AS(verify_triangular_uniqueness(rot, sys, constant, 1e-9), HypothesisFailure);
}
