#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "guided/grid_function.hpp"
#include "guided/system.hpp"

namespace guided::funceq {

// f -> sum_i a_i f(delta_i) on a fixed grid; the interpolation stencil is precomputed.
class DiscreteOperator {
 public:
  DiscreteOperator(const gds::GuidedSystem& sys, int intervals);
  GridFunction apply(const GridFunction& f) const;
  int intervals() const { return m_; }

 private:
  struct Term {
    int k;
    double w;
    double coef;
  };
  gds::StateSpace space_;
  int m_;
  std::vector<std::vector<Term>> rows_;
};

GridFunction apply_operator(const gds::GuidedSystem& sys, const GridFunction& f);

enum class GnMode { Iterated, Explicit };

// g_n = A^n 1. Explicit mode sums over all multi-indices and needs N^n <= 1e6.
GridFunction compute_g_n(const gds::GuidedSystem& sys, int n, GnMode mode, int intervals);

struct ContractionCertificate {
  bool certified = false;
  int m = 0;
  double norm = 1.0;  // sup g_m, or the last norm seen on failure
  int grid = 0;
  std::vector<double> history;  // sup g_k for k = 1..
  int monotonicity_violations = 0;
};

ContractionCertificate certify_contraction(const gds::GuidedSystem& sys, int m_max, int intervals = 1024);

struct NeumannSolution {
  GridFunction f;
  double residual = 0.0;
  int iterations = 0;
  ContractionCertificate certificate;
};

NeumannSolution solve_neumann(const gds::GuidedSystem& sys, const GridFunction& h, double tol,
                              int max_iter, int m_max = 64);

struct MaxPrincipleOptions {
  int depth = 64;
  double eps = 0.0;  // 0 selects the grid step
  double level_tol = 1e-6;
  double coef_tol = 1e-9;
};

struct MaxPrincipleReport {
  bool pass = false;
  double residual = 0.0;
  double max_value = 0.0;
  double min_value = 0.0;
  double argmax = 0.0;
  double argmin = 0.0;
  double worst_gap = 0.0;  // largest drop below the extreme level along the orbit clouds
  std::size_t cloud_points = 0;
};

MaxPrincipleReport check_max_principle(const gds::GuidedSystem& sys, const GridFunction& f, double tol,
                                       const MaxPrincipleOptions& opts = {});

struct MatrixFunction {
  int n = 0;
  std::vector<expr::Expression> entries;  // row-major
  Eigen::MatrixXd operator()(double x) const;
  static MatrixFunction parse(const std::vector<std::vector<std::string>>& rows,
                              const std::string& variable = "t");
};

struct TriangularFamily {
  std::vector<MatrixFunction> matrices;
  std::optional<Eigen::MatrixXd> p;
  std::optional<Eigen::MatrixXd> p_inv;
};

struct TriangularReport {
  bool pass = false;
  double residual = 0.0;                 // sup |F - sum A_i F(delta_i)|
  std::vector<double> component_spread;  // max - min of each transformed component
  int first_nonconstant = -1;
};

TriangularReport verify_triangular_uniqueness(const TriangularFamily& family, const gds::GuidedSystem& sys,
                                              const std::vector<GridFunction>& f, double tol);

}  // namespace guided::funceq
