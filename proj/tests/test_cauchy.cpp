#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "guided/cauchy.hpp"
#include "support.hpp"

using namespace guided;
using namespace guided::cauchy;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

OverdetProblem jensen(double A, double B) {
  return OverdetProblem::from_shape(0, 1, ScalarMap::parse("t/2"), ScalarMap::parse("(t+1)/2"), Shape::Jensen, A, B);
}

OverdetProblem overdet(const std::string& name) {
  return std::get<guided::config::OverdetSpec>(support::load(name).problem).problem;
}

double max_error(const PropagationCloud& cloud, const RealFn& exact) {
  double e = 0;
  for (const auto& c : cloud.entries) e = std::max(e, std::abs(c.value - exact(c.point)));
  return e;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  int i = 0;
  for (auto r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("propagation recovers linear solutions", "[cauchy]") {
  SECTION("Jensen") {
    auto p = jensen(0, 1);
    validate_overdet(p);
    auto cloud = propagate_values(p, 12, std::ldexp(1.0, -12));
    CHECK(cloud.entries.size() >= 4097);
    CHECK(max_error(cloud, [](double z) { return z; }) < 1e-12);
    CHECK(check_consistency(cloud, std::ldexp(1.0, -12), 1e-9).consistent);
  }
  SECTION("Cauchy on the symmetric interval") {
    auto p = overdet("cauchy_gamma.json");
    validate_overdet(p);
    auto cloud = propagate_values(p, 14, std::ldexp(2.0, -12));
    CHECK(cloud.coverage == 1.0);
    CHECK(max_error(cloud, [](double z) { return 0.5 * z; }) < 1e-12);
  }
  SECTION("geometric mean") {
    auto p = overdet("geometric_mean.json");
    validate_overdet(p);
    auto cloud = propagate_values(p, 14, std::ldexp(3.0, -12));
    CHECK(cloud.entries.size() > 4096);
    CHECK(max_error(cloud, [](double z) { return std::log2(z); }) < 1e-9);
  }
}

TEST_CASE("inconsistent data is caught at the fixed point", "[cauchy]") {
  auto p = overdet("inconsistent.json");
  auto cloud = propagate_values(p, 14, std::ldexp(1.0, -12));
  REQUIRE_FALSE(cloud.collisions.empty());
  CHECK(cloud.collisions.front().depth <= 1);
  CHECK_THAT(cloud.collisions.front().point, WithinAbs(1.0, 1e-12));
  auto rep = check_consistency(cloud, std::ldexp(1.0, -12), 1e-9);
  CHECK_FALSE(rep.consistent);
  CHECK(rep.reason == "collision");
}

TEST_CASE("a depth-one cloud is vacuously consistent", "[cauchy]") {
  auto cloud = propagate_values(jensen(0, 1), 1, 1e-3);
  // the seeds are fixed points of alpha and beta, so their images only revisit them
  for (const auto& c : cloud.collisions) CHECK(c.gap == 0);
  auto rep = check_consistency(cloud, 1e-3, 1e-9);
  CHECK(rep.consistent);
  CHECK(rep.worst_gap == 0);
}

TEST_CASE("hypothesis gate for overdetermined problems", "[cauchy]") {
  auto stretch = OverdetProblem::from_shape(0, 1, ScalarMap::parse("t"), ScalarMap::parse("(t+1)/2"), Shape::Jensen, 0, 1);
  CHECK_THROWS_WITH(validate_overdet(stretch), ContainsSubstring("contraction"));
  auto escape = OverdetProblem::from_shape(0, 1, ScalarMap::parse("t/2 - 0.5"), ScalarMap::parse("(t+1)/2"),
                                           Shape::Jensen, 0, 1);
  CHECK_THROWS_WITH(validate_overdet(escape), ContainsSubstring("range"));
  auto stuck = OverdetProblem::from_shape(0, 1, ScalarMap::parse("t/4 + 0.25"), ScalarMap::parse("(t+1)/2"),
                                          Shape::Jensen, 0, 1);
  CHECK_THROWS_WITH(validate_overdet(stuck), ContainsSubstring("fixed_point"));
}

TEST_CASE("propagation properties", "[cauchy][property]") {
  const double eps = std::ldexp(1.0, -10);
  auto base = propagate_values(jensen(0, 1), 12, eps);
  SECTION("values recompute bitwise from their derivation path") {
    for (const auto& p : {jensen(0, 1), overdet("cauchy_gamma.json"), overdet("geometric_mean.json")}) {
      auto cloud = propagate_values(p, 10, eps);
      for (std::size_t k = 0; k < cloud.entries.size(); ++k) REQUIRE(recompute(p, cloud, k) == cloud.entries[k].value);
    }
  }
  SECTION("values are affine in the seed pair") {
    auto doubled = propagate_values(jensen(0, 2), 12, eps);
    auto shifted = propagate_values(jensen(3, 1), 12, eps);
    REQUIRE(doubled.entries.size() == base.entries.size());
    for (std::size_t k = 0; k < base.entries.size(); ++k) {
      REQUIRE(doubled.entries[k].point == base.entries[k].point);
      CHECK(std::abs(doubled.entries[k].value - 2 * base.entries[k].value) <= 1e-12);
      // f = 3 + (1 - 3) z
      CHECK(std::abs(shifted.entries[k].value - (3 - 2 * base.entries[k].point)) <= 1e-12);
    }
  }
  SECTION("uniqueness") {
    auto again = propagate_values(jensen(0, 1), 12, eps);
    REQUIRE(again.entries.size() == base.entries.size());
    for (std::size_t k = 0; k < base.entries.size(); ++k) CHECK(again.entries[k].value == base.entries[k].value);
    auto other = propagate_values(jensen(0, 1.5), 12, eps);
    bool differs = false;
    for (std::size_t k = 0; k < base.entries.size(); ++k) {
      double z = base.entries[k].point;
      differs = differs || (z > 0 && z < 1 && std::abs(other.entries[k].value - base.entries[k].value) > 1e-6);
    }
    CHECK(differs);
  }
}

TEST_CASE("cloud export", "[cauchy]") {
  auto csv = propagate_values(jensen(0, 1), 2, 0.1).to_csv();
  CHECK(csv.rfind("t,value,depth\n0,0,0\n", 0) == 0);
}

TEST_CASE("affine analysis in one dimension", "[cauchy]") {
  auto an = analyze_affine(mat({{1}}), mat({{1}}), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  CHECK(an.b1(0, 0) == 0.5);
  CHECK(an.b2(0, 0) == 0.5);
  CHECK_THAT(an.dt1(0), WithinAbs(-1, 1e-15));
  CHECK_THAT(an.dt2(0), WithinAbs(1, 1e-15));
  CHECK(an.gamma == 0.5);
  CHECK(an.n_bound == 5);
  CHECK(an.balls.min_radius == 5);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int which : {1, 2}) {
    Eigen::VectorXd z(1);
    z << u(rng);
    CHECK(std::abs(orbit_rate(an, which, z, 20) - an.gamma) <= 0.1 * an.gamma);
  }
}

TEST_CASE("affine analysis edge cases", "[cauchy]") {
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  auto an = analyze_affine(id, id, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  CHECK(an.dt1.norm() == 0);
  CHECK(an.dt2.norm() == 0);
  CHECK(an.gamma == 0.5);
  CHECK(an.n_bound == 1);

  CHECK_THROWS_WITH(analyze_affine(mat({{1, 0}, {0, 2}}), mat({{0, 1}, {1, 0}}), Eigen::VectorXd::Zero(2),
                                   Eigen::VectorXd::Zero(2)),
                    ContainsSubstring("commutation"));
  CHECK_THROWS_WITH(analyze_affine(mat({{1, 1}, {0, 1}}), id, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
                    ContainsSubstring("symmetry"));
  CHECK_THROWS_WITH(analyze_affine(mat({{1, 0}, {0, -1}}), id, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
                    ContainsSubstring("positive_definite"));
}

TEST_CASE("affine analysis invariants", "[cauchy][property]") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + trial % 3;
    // commuting SPD pair: shared eigenvectors, positive eigenvalues
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); }))
                            .householderQ();
    Eigen::VectorXd l1(n), l2(n);
    for (int k = 0; k < n; ++k) {
      l1(k) = 0.5 + 2 * std::abs(u(rng));
      l2(k) = 0.5 + 2 * std::abs(u(rng));
    }
    Eigen::MatrixXd a1 = q * l1.asDiagonal() * q.transpose();
    Eigen::MatrixXd a2 = q * l2.asDiagonal() * q.transpose();
    a1 = 0.5 * (a1 + a1.transpose()).eval();
    a2 = 0.5 * (a2 + a2.transpose()).eval();
    Eigen::VectorXd b1 = Eigen::VectorXd::NullaryExpr(n, [&] { return 3 * u(rng); });
    Eigen::VectorXd b2 = Eigen::VectorXd::NullaryExpr(n, [&] { return 3 * u(rng); });
    auto an = analyze_affine(a1, a2, b1, b2);
    CHECK((an.b1 + an.b2 - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((an.b1 * an.dt1 + an.d1 - an.dt1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((an.b2 * an.dt2 + an.d2 - an.dt2).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(an.gamma < 1);
    CHECK(an.n_bound > (an.dt1 - an.dt2).norm() / (1 - an.gamma));
    CHECK(verify_linear_solution(a1, a2, b1, b2, Eigen::VectorXd::Ones(n), 200).residual < 1e-12);
  }
}

TEST_CASE("eigenvalues by rotations and by characteristic roots", "[cauchy][property]") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + trial % 3;
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
    m = (m + m.transpose()).eval();
    auto jac = jacobi_eigenvalues(m);
    auto chr = characteristic_roots(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m);
    REQUIRE(jac.size() == static_cast<std::size_t>(n));
    REQUIRE(chr.size() == static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      CHECK_THAT(jac[k], WithinAbs(ref.eigenvalues()(k), 1e-12));
      CHECK_THAT(chr[k], WithinAbs(ref.eigenvalues()(k), 1e-8));
    }
  }
}

TEST_CASE("linear solutions of vector Cauchy equations", "[cauchy]") {
  auto spec = std::get<guided::config::VectorCauchySpec>(support::load("l1_ball.json").problem);
  Eigen::VectorXd c = spec.c;
  auto r = verify_cauchy_solution([&](const Eigen::VectorXd& x) { return c.dot(x); }, spec.a1, spec.a2, 2, spec.domain,
                                  100);
  CHECK(r.samples == 100);
  CHECK(r.residual < 1e-12);
  // a nonlinear candidate fails
  auto bad = verify_cauchy_solution([](const Eigen::VectorXd& x) { return x(0) * x(0); }, spec.a1, spec.a2, 2,
                                    spec.domain, 100);
  CHECK(bad.residual > 1e-3);

  std::mt19937_64 rng(41);
  for (int k = 0; k < 200; ++k) CHECK(sample_point(spec.domain, 2, rng).lpNorm<1>() <= 1 + 1e-15);
}

TEST_CASE("rotations by a sixth of a turn admit nonlinear solutions", "[cauchy]") {
  const double a = std::numbers::pi / 3;
  Eigen::Matrix2d l;
  l << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  Eigen::Matrix2d r = l.transpose();
  auto f = [](const Eigen::VectorXd& x) {
    double r2 = x.squaredNorm();
    double th = std::atan2(x(1), x(0));
    return r2 * std::cos(6 * th) * x(0) + std::exp(std::sin(6 * th)) * x(1);
  };
  SampleSpec ring{SampleDomain::Annulus, std::sqrt(0.5), 1.0};
  auto rep = verify_cauchy_solution(
      f, [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(l * x); },
      [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(r * x); }, 2, ring, 500);
  CHECK(rep.residual < 1e-9);
  std::mt19937_64 rng(43);
  for (int k = 0; k < 200; ++k) {
    double n = sample_point(ring, 2, rng).norm();
    CHECK(n >= std::sqrt(0.5) - 1e-15);
    CHECK(n <= 1 + 1e-15);
  }
  // and the hypothesis gate of the affine theorem rejects the pair: L is not symmetric
  CHECK_THROWS_AS(analyze_affine(l, r, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)), HypothesisFailure);
}
