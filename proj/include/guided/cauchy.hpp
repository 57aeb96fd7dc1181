#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "guided/scalar_map.hpp"

namespace guided::cauchy {

// v(map(z)) := p(z) v(z) + qa(z) A + qb(z) B + r(z). For an equation f(F(x,y)) = H[f(x), f(y), x, y]
// the two rules come from alpha(z) = F(a, z) and beta(z) = F(z, b).
struct PropagationRule {
  ScalarMap map;
  ScalarMap p;
  ScalarMap qa;
  ScalarMap qb;
  ScalarMap r;
};

enum class Shape { Jensen, Cauchy };

struct OverdetProblem {
  double a = 0.0;
  double b = 1.0;
  double A = 0.0;  // f(a)
  double B = 1.0;  // f(b)
  std::vector<PropagationRule> rules;

  // H = (u+v)/2 (Jensen) or H = u+v (Cauchy) with alpha(z) = F(a,z), beta(z) = F(z,b).
  static OverdetProblem from_shape(double a, double b, const ScalarMap& alpha, const ScalarMap& beta, Shape shape,
                                   double A, double B);
};

struct OverdetValidation {
  double contraction = 0.0;  // largest sampled |map(x) - map(y)| / |x - y|
  double fixed_a = 0.0;      // x0 with some map(x0) = a
  double fixed_b = 0.0;      // y0 with some map(y0) = b
};

// Throws HypothesisFailure naming the failed condition: "range", "contraction", "fixed_point".
OverdetValidation validate_overdet(const OverdetProblem& problem, int samples = 2000, std::uint64_t seed = 1);

struct CloudEntry {
  double point;
  double value;
  int depth;
  int parent;  // -1 for a seed
  int rule;    // -1 for a seed
};

struct Collision {
  double point;
  double existing;
  double incoming;
  double gap;
  int depth;
  int entry;  // index of the stored entry
};

struct PropagationCloud {
  std::vector<CloudEntry> entries;
  std::vector<Collision> collisions;
  double coverage = 0.0;
  int depth_reached = 0;
  bool partial = false;

  std::string to_csv() const;  // "t,value,depth", sorted by t
};

PropagationCloud propagate_values(const OverdetProblem& problem, int depth, double eps,
                                  std::size_t max_points = 5'000'000);

// Value of entry k recomputed along its derivation path.
double recompute(const OverdetProblem& problem, const PropagationCloud& cloud, std::size_t k);

struct ConsistencyReport {
  bool consistent = true;
  double worst_gap = 0.0;
  double modulus = 0.0;  // largest |dv| over neighbouring points closer than eps
  double cap = 0.0;
  double witness = 0.0;
  std::string reason;  // "collision" or "modulus" when inconsistent
};

ConsistencyReport check_consistency(const PropagationCloud& cloud, double eps, double tol);

struct BallFamily {
  Eigen::VectorXd center1;
  Eigen::VectorXd center2;
  int min_radius = 0;  // K_m = B(center1, m) u B(center2, m) for m >= min_radius
};

struct AffineAnalysis {
  Eigen::MatrixXd b1, b2;  // B_i = A_i (A_1 + A_2)^{-1}
  Eigen::VectorXd d1, d2;
  Eigen::VectorXd dt1, dt2;  // fixed points of y -> B_i y + d_i
  std::vector<double> eig1, eig2;
  double gamma = 0.0;
  int n_bound = 0;
  int iterations = 0;
  BallFamily balls;
};

// Throws HypothesisFailure naming "symmetry", "commutation" or "positive_definite".
AffineAnalysis analyze_affine(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2, const Eigen::VectorXd& b1,
                              const Eigen::VectorXd& b2);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> jacobi_eigenvalues(const Eigen::MatrixXd& m, double tol = 1e-14);
// Real roots of the characteristic polynomial for n <= 3 (symmetric input), ascending.
std::vector<double> characteristic_roots(const Eigen::MatrixXd& m);

// (||e_steps|| / ||e_0||)^(1/steps) for the orbit of z under y -> B_i y + d_i.
double orbit_rate(const AffineAnalysis& an, int which, const Eigen::VectorXd& z, int steps);

using VecFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ScalarField = std::function<double(const Eigen::VectorXd&)>;

// out_i = sum_j comp[i][j](x_j): separable vector maps built from single-variable expressions.
struct SeparableMap {
  std::vector<std::vector<expr::Expression>> comp;
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

enum class SampleDomain { Box, L1Ball, Annulus };

struct SampleSpec {
  SampleDomain domain = SampleDomain::Box;
  double r_lo = 0.0;  // box half-width is r_hi; annulus radii r_lo <= |x| <= r_hi
  double r_hi = 1.0;
};

Eigen::VectorXd sample_point(const SampleSpec& spec, int n, std::mt19937_64& rng);

struct LinearCheck {
  double residual = 0.0;
  int samples = 0;
};

// sup |f(x) - f(a1 x) - f(a2 x)| over random samples.
LinearCheck verify_cauchy_solution(const ScalarField& f, const VecFn& a1, const VecFn& a2, int n,
                                   const SampleSpec& spec, int samples, std::uint64_t seed = 1);

// f = c.x against f(T1 x + T2 x) = f(T1 x) + f(T2 x) with T_i x = A_i x + b_i.
LinearCheck verify_linear_solution(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2, const Eigen::VectorXd& b1,
                                   const Eigen::VectorXd& b2, const Eigen::VectorXd& c, int samples,
                                   std::uint64_t seed = 1);

}  // namespace guided::cauchy
