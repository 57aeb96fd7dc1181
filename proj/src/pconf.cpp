#include "guided/pconf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "guided/errors.hpp"
#include "guided/roots.hpp"

namespace guided::pconf {

gds::GuidedSystem PConfiguration::system() const {
  return gds::GuidedSystem::from_maps(gds::StateSpace::interval(a0(), aN()), maps, guiding, tol);
}

namespace {

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol * (1.0 + std::fabs(b)); }

PConfigCheck violation(std::string cond, double t, std::string detail) {
  PConfigCheck c;
  c.ok = false;
  c.condition = std::move(cond);
  c.witness = t;
  c.detail = std::move(detail);
  return c;
}

std::vector<int> assign_segments(const std::vector<ScalarMap>& maps, double a0, double aN) {
  double mid = 0.5 * (a0 + aN);
  std::vector<int> order(maps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return maps[x](mid) < maps[y](mid); });
  std::vector<int> segment(maps.size());
  for (std::size_t k = 0; k < order.size(); ++k) segment[order[k]] = static_cast<int>(k);
  return segment;
}

}  // namespace

PConfigCheck check_pconfiguration(const std::vector<ScalarMap>& maps, const std::vector<double>& anchors,
                                  double tol, int grid) {
  if (maps.size() < 2) return violation("anchors", 0.0, "at least two maps are required");
  if (anchors.size() != maps.size() + 1)
    return violation("anchors", 0.0, "need N+1 anchors for N maps");
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k)
    if (!(anchors[k] < anchors[k + 1])) return violation("anchors", anchors[k], "anchors must increase");

  double a0 = anchors.front();
  double aN = anchors.back();
  int n = std::max(grid, 3);
  auto node = [&](int j) { return j == n - 1 ? aN : a0 + (aN - a0) * j / (n - 1); };

  for (int j = 0; j < n; ++j) {
    double t = node(j);
    double s = 0.0;
    for (const auto& m : maps) s += m.derivative(t);
    if (std::fabs(s - 1.0) > tol)
      return violation("derivative_sum", t, "sum of derivatives is " + format_double(s));
  }
  for (std::size_t i = 0; i < maps.size(); ++i)
    for (int j = 0; j < n; ++j) {
      double t = node(j);
      if (maps[i].derivative(t) < -tol)
        return violation("monotonicity", t, "map " + std::to_string(i) + " decreases");
    }

  std::vector<int> segment = assign_segments(maps, a0, aN);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    int k = segment[i];
    double lo = anchors[k];
    double hi = anchors[k + 1];
    if (!close(maps[i](aN), hi, tol))
      return violation("endpoint_end", aN,
                       "map " + std::to_string(i) + " sends a_N to " + format_double(maps[i](aN)) +
                           ", expected " + format_double(hi));
    if (!close(maps[i](a0), lo, tol))
      return violation("endpoint_start", a0,
                       "map " + std::to_string(i) + " sends a_0 to " + format_double(maps[i](a0)) +
                           ", expected " + format_double(lo));
    for (int j = 0; j < n; ++j) {
      double t = node(j);
      double y = maps[i](t);
      if (y < lo - tol * (1 + std::fabs(lo)) || y > hi + tol * (1 + std::fabs(hi)))
        return violation("range", t, "map " + std::to_string(i) + " leaves its segment");
    }
  }
  return PConfigCheck{};
}

std::vector<gds::IntervalSet> extract_guiding_sets(const std::vector<ScalarMap>& maps, double a0, double aN,
                                                   double tol) {
  std::vector<gds::IntervalSet> out;
  ZeroSetOptions opts;
  opts.tol = tol;
  for (const auto& m : maps) {
    RealFn g = [m](double t) { return m.derivative(t); };
    RealFn dg;
    if (m.has_second_derivative()) dg = [m](double t) { return m.second_derivative(t); };
    out.push_back(find_zero_set(g, dg, a0, aN, opts));
  }
  return out;
}

PConfiguration validate_pconfiguration(const std::vector<ScalarMap>& maps, const std::vector<double>& anchors,
                                       double tol, int grid) {
  PConfigCheck c = check_pconfiguration(maps, anchors, tol, grid);
  if (!c.ok) throw PConfigViolation(c.condition, c.witness, c.detail);
  PConfiguration p;
  p.maps = maps;
  p.anchors = anchors;
  p.segment = assign_segments(maps, anchors.front(), anchors.back());
  p.guiding = extract_guiding_sets(maps, anchors.front(), anchors.back(), tol);
  return p;
}

IvpSolution solve_ivp(const IvpProblem& problem, int m) {
  const PConfiguration& pc = problem.pconf;
  double a0 = pc.a0();
  double aN = pc.aN();
  double h0 = problem.h(a0);
  double hN = problem.h(aN);
  if (std::fabs(h0 - hN) > problem.data_tol * (1 + std::fabs(h0)))
    throw DataMismatch("h(a_0) = " + format_double(h0) + " differs from h(a_N) = " + format_double(hN));
  if (m < 3) throw SchemaError("solve_ivp needs at least three intervals");
  if (problem.c < a0 || problem.c > aN) throw SchemaError("c must lie in [a_0, a_N]");

  gds::StateSpace space = gds::StateSpace::interval(a0, aN);
  GridFunction grid(space, m, std::vector<double>(m + 1, 0.0), 1e-9, Interpolation::Cubic);
  double step = grid.step();
  int rows = m + 2;
  int cols = m + 1;

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> entries;
  Eigen::VectorXd rhs(rows);
  StencilPoint st[4];
  auto add = [&](int row, double x, double scale) {
    int n = grid.stencil(x, st);
    for (int i = 0; i < n; ++i) entries.emplace_back(row, st[i].node, scale * st[i].weight);
  };
  for (int j = 0; j <= m; ++j) {
    double t = grid.node(j);
    entries.emplace_back(j, j, 1.0);
    for (const auto& map : pc.maps) add(j, map(t), -1.0);
    rhs(j) = problem.h(t);
  }
  double cl = std::max(a0, problem.c - step);
  double cr = std::min(aN, problem.c + step);
  add(m + 1, cr, 1.0 / (cr - cl));
  add(m + 1, cl, -1.0 / (cr - cl));
  rhs(m + 1) = problem.mu;

  Eigen::SparseMatrix<double> a(rows, cols);
  a.setFromTriplets(entries.begin(), entries.end());

  IvpSolution sol;
  Eigen::VectorXd x;
  if (m <= 2048) {
    Eigen::MatrixXd dense(a);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(dense);
    Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
    sol.condition_estimate = diag.maxCoeff() / std::max(diag.minCoeff(), 1e-300);
    if (!(sol.condition_estimate < 1e12))
      throw IllConditioned("collocation matrix condition estimate " + format_double(sol.condition_estimate));
    x = qr.solve(rhs);
  } else {
    sol.sparse = true;
    Eigen::SparseMatrix<double> at = a.transpose();
    Eigen::SparseMatrix<double> normal = at * a;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw IllConditioned("normal equations could not be factored");
    Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    sol.condition_estimate = std::sqrt(d.maxCoeff() / std::max(d.minCoeff(), 1e-300));
    if (!(sol.condition_estimate < 1e12))
      throw IllConditioned("normal equations condition estimate " + format_double(sol.condition_estimate));
    x = ldlt.solve(at * rhs);
  }

  Eigen::VectorXd r = a * x - rhs;
  sol.residual = r.head(m + 1).cwiseAbs().maxCoeff();
  sol.derivative_defect = std::fabs(r(m + 1));
  std::vector<double> vals(x.data(), x.data() + x.size());
  sol.f = GridFunction(space, m, std::move(vals), 1e-9, Interpolation::Cubic);
  double sum = 0.0;
  for (std::size_t k = 1; k + 1 < pc.anchors.size(); ++k) sum += sol.f(pc.anchors[k]);
  // Row a_0 reads f(a_0) - f(a_0) - sum_{k>=1} f(a_k) = h(a_0).
  sol.anchor_identity_defect = std::fabs(sum + h0);
  return sol;
}

PconfMinimality probe_pconf_minimality(const PConfiguration& pconf, double eps, int depth) {
  PconfMinimality out;
  gds::GuidedSystem sys = pconf.system();
  out.contraction = gds::check_contraction_minimality(sys, 2000);
  out.probe = gds::probe_minimality(sys, eps, depth);

  // A weak attractor off the guiding sets exists iff the system is minimal.
  double x0 = 0.5 * (pconf.a0() + pconf.aN());
  for (int k = 1; sys.in_lambda(x0) && k < 64; ++k)
    x0 = pconf.a0() + (pconf.aN() - pconf.a0()) * (k + 0.5) / 64.0;
  out.attractor = gds::probe_weak_attractor(sys, x0, eps, depth);

  using gds::AttractorKind;
  using gds::MinimalityKind;
  MinimalityKind pk = out.probe.kind;
  AttractorKind ak = out.attractor.kind;
  if (out.contraction.certified) {
    out.route = "contraction";
    out.verdict = MinimalityKind::MinimalEvidence;
    out.agree = pk != MinimalityKind::NotMinimal && ak != AttractorKind::No;
  } else if (pk == MinimalityKind::MinimalEvidence && ak == AttractorKind::Yes) {
    out.route = "probe";
    out.verdict = MinimalityKind::MinimalEvidence;
  } else if (pk == MinimalityKind::NotMinimal && ak != AttractorKind::Yes) {
    out.route = "probe";
    out.verdict = MinimalityKind::NotMinimal;
  } else {
    out.route = "probe";
    out.verdict = MinimalityKind::Inconclusive;
    out.agree = pk == MinimalityKind::Inconclusive || ak == AttractorKind::Inconclusive;
  }
  if (!out.agree) {
    out.verdict = MinimalityKind::Inconclusive;
    out.diagnostic = std::string("minimality probe says ") + gds::to_string(pk) + " but the weak-attractor probe says " +
                     gds::to_string(ak);
  }
  return out;
}

}  // namespace guided::pconf
