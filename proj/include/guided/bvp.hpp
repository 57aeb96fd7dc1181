#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "guided/expr.hpp"
#include "guided/grid_function.hpp"
#include "guided/orbits.hpp"
#include "guided/pconf.hpp"
#include "guided/system.hpp"

namespace guided::bvp {

// Gamma(z) = (alpha1(z), alpha2(z)), z in [-1, 1], runs from A2 = (0,1) to A1 = (1,0).
// g1 lives on O A1 (variable x), g2 on O A2 (variable y), g_gamma on Gamma (variable z).
struct BoundaryProblem {
  expr::Expression alpha1;
  expr::Expression alpha2;
  double m = 1.0;
  double n = 1.0;
  expr::Expression g1 = expr::Expression::number(0.0, "x");
  expr::Expression g2 = expr::Expression::number(0.0, "y");
  expr::Expression g_gamma = expr::Expression::number(0.0, "z");
  double tol = 1e-9;
  double slope_tol = 1e-8;
};

struct Point {
  double x;
  double y;
};

// Parametrized boundary curve with omega(z) = n alpha1(z) - m alpha2(z) strictly increasing.
// The constructor checks the endpoint and monotonicity conditions and the slope bound.
class Curve {
 public:
  explicit Curve(const BoundaryProblem& problem);

  const BoundaryProblem& problem() const { return p_; }
  Point point(double z) const { return {a1_(z), a2_(z)}; }
  double omega(double z) const { return p_.n * a1_(z) - p_.m * a2_(z); }
  double omega(Point q) const { return p_.n * q.x - p_.m * q.y; }
  double omega_slope(double z) const { return p_.n * da1_(z) - p_.m * da2_(z); }
  // Inverse of omega on [-m, n] by bisection.
  double z_of(double t) const;
  Point project(Point q) const;
  bool contains(Point q, double tol) const;

  const expr::Expression& alpha1() const { return a1_; }
  const expr::Expression& alpha2() const { return a2_; }
  const expr::Expression& dalpha1() const { return da1_; }
  const expr::Expression& dalpha2() const { return da2_; }
  const expr::Expression& d2alpha1() const { return d2a1_; }
  const expr::Expression& d2alpha2() const { return d2a2_; }

 private:
  BoundaryProblem p_;
  expr::Expression a1_, a2_, da1_, da2_, d2a1_, d2a2_;
};

Point project_pi3(Point p, const BoundaryProblem& problem);

struct BoundarySystem {
  Curve curve;
  gds::GuidedSystem gamma;  // zeta_1, zeta_2 on z in [-1, 1] with Omega_1, Omega_2
  pconf::PConfiguration pconf;  // delta_1, delta_2 on [-m, n], anchors (-m, 0, n), Lambda_i = omega(Omega_i)
  ScalarMap omega;      // z -> t
  ScalarMap omega_inv;  // t -> z
  gds::IntervalSet omega1, omega2;
  double lambda_defect = 0.0;  // Hausdorff distance between zeros of delta_i' and omega(Omega_i)
  gds::ConjugacyReport conjugacy;
  std::vector<std::string> flags;
};

BoundarySystem build_boundary_system(const BoundaryProblem& problem, std::uint64_t seed = 1);

struct FixedPoint {
  double t = 0.0;
  double derivative = 0.0;
};

// Bisection on map(t) - t to 1e-13. Throws NoBracket, or InconclusiveError when |map'(t*) - 1| < 1e-6.
FixedPoint fixed_point(const ScalarMap& map, double lo, double hi);

enum class Solvability { Solvable, NotSolvable, Inconclusive };
const char* to_string(Solvability s);

struct LayerReport {
  std::string name;  // fixed_point, contraction, escape, cycles, probe (evaluation order)
  bool applicable = false;
  std::optional<Solvability> outcome;  // set when the layer decides
  std::string detail;
};

struct SolvabilityReport {
  Solvability verdict = Solvability::Inconclusive;
  std::string route;
  std::vector<LayerReport> layers;
  gds::ContractionResult contraction;
  std::optional<FixedPoint> fp12;  // fixed point of delta_1 o delta_2
  std::optional<FixedPoint> fp21;  // fixed point of delta_2 o delta_1
  gds::CycleReport cycles;
  std::optional<gds::MinimalityVerdict> probe;
};

SolvabilityReport analyze_solvability(const BoundarySystem& system, double eps, int depth, int max_cycle_len = 6);

struct ReducedData {
  RealFn h;  // on [-m, n]
  double g_origin = 0.0;
  double h_start = 0.0;
  double h_end = 0.0;
};

// h(t) = g_gamma(z) - g1(x) - g2(y) + g(O) with (x, y) = Gamma(z), z = omega^-1(t). Throws CornerMismatch.
ReducedData reduce_boundary_data(const BoundaryProblem& problem, const BoundarySystem& system);

struct BvpOptions {
  double mu = 0.0;         // gauge: chi'(0); the field u does not depend on it
  double fd_step = 1.0 / 128;
  int fd_margin = 2;
};

struct BvpSolution {
  GridFunction chi;
  double residual = 0.0;
  double chi_origin = 0.0;  // chi(0), zero by the anchor identity
  double boundary_defect = 0.0;
  double pde_residual = 0.0;
  int lattice_points = 0;
  std::vector<std::string> warnings;

  std::shared_ptr<const Curve> curve;
  BoundaryProblem problem;

  double phi(double x) const;
  double psi(double y) const;
  // Throws MapEscape outside the closed domain.
  double u(double x, double y) const;
};

BvpSolution solve_bvp(const BoundaryProblem& problem, const BoundarySystem& system, int intervals,
                      const BvpOptions& opts = {});

// sup |(m dx + n dy) dx dy u| over interior lattice points by central differences.
double fd_residual(const BvpSolution& sol, double step, int margin, int* points = nullptr);

std::string field_csv(const BvpSolution& sol, int lattice);

}  // namespace guided::bvp
