#pragma once

#include <string>
#include <vector>

#include "guided/grid_function.hpp"
#include "guided/orbits.hpp"
#include "guided/system.hpp"

namespace guided::pconf {

struct PConfiguration {
  std::vector<ScalarMap> maps;
  std::vector<double> anchors;  // a_0 < a_1 < ... < a_N
  std::vector<int> segment;     // maps[i] carries [anchors[segment[i]], anchors[segment[i] + 1]]
  std::vector<gds::IntervalSet> guiding;
  gds::Tolerances tol;

  double a0() const { return anchors.front(); }
  double aN() const { return anchors.back(); }
  gds::GuidedSystem system() const;
};

struct PConfigCheck {
  bool ok = true;
  std::string condition;  // derivative_sum, monotonicity, endpoint_end, endpoint_start, range, anchors
  double witness = 0.0;
  std::string detail;
};

// Maps may come in any order; each is matched to the anchor segment it covers.
PConfigCheck check_pconfiguration(const std::vector<ScalarMap>& maps, const std::vector<double>& anchors,
                                  double tol = 1e-9, int grid = 2001);

// Throws PConfigViolation; on success the guiding sets are extracted.
PConfiguration validate_pconfiguration(const std::vector<ScalarMap>& maps, const std::vector<double>& anchors,
                                       double tol = 1e-9, int grid = 2001);

std::vector<gds::IntervalSet> extract_guiding_sets(const std::vector<ScalarMap>& maps, double a0, double aN,
                                                   double tol = 1e-9);

struct IvpProblem {
  PConfiguration pconf;
  RealFn h;
  double c = 0.0;   // point where f'(c) = mu is imposed
  double mu = 0.0;
  double data_tol = 1e-9;
};

struct IvpSolution {
  GridFunction f;
  double residual = 0.0;                // sup over collocation rows
  double derivative_defect = 0.0;
  double anchor_identity_defect = 0.0;  // |sum_{k=1}^{N-1} f(a_k) + h(a_0)|
  double condition_estimate = 0.0;
  bool sparse = false;
};

// Least-squares collocation on M+1 nodes with 4-point Lagrange stencils; the returned f
// interpolates the same way. Dense QR up to M = 2048, sparse normal equations above.
IvpSolution solve_ivp(const IvpProblem& problem, int intervals);

struct PconfMinimality {
  gds::MinimalityKind verdict = gds::MinimalityKind::Inconclusive;
  std::string route;
  bool agree = true;
  gds::ContractionResult contraction;
  gds::MinimalityVerdict probe;
  gds::AttractorVerdict attractor;
  std::string diagnostic;
};

PconfMinimality probe_pconf_minimality(const PConfiguration& pconf, double eps, int depth);

}  // namespace guided::pconf
