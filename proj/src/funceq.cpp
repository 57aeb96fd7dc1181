#include "guided/funceq.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "guided/errors.hpp"
#include "guided/orbits.hpp"

namespace guided::funceq {

namespace {

void require_coefficients(const gds::GuidedSystem& sys) {
  if (!sys.has_coefficients()) throw SchemaError("the system has no coefficients a_i");
  if (sys.space().kind() == gds::StateSpace::Kind::FiniteGraph)
    throw SchemaError("functional equations need an interval or a circle");
}

}  // namespace

DiscreteOperator::DiscreteOperator(const gds::GuidedSystem& sys, int intervals)
    : space_(sys.space()), m_(intervals) {
  require_coefficients(sys);
  GridFunction shape = GridFunction::zero(space_, m_);
  double slack = sys.tolerances().step;
  GridFunction probe(space_, m_, std::vector<double>(m_ + 1, 0.0), slack);
  rows_.resize(m_ + 1);
  for (int j = 0; j <= m_; ++j) {
    double x = shape.node(j);
    for (std::size_t i = 0; i < sys.size(); ++i) {
      double c = sys.coefficient(i)(x);
      if (c == 0.0) continue;
      double y = sys.apply_raw(i, x);
      Term t{0, 0.0, c};
      try {
        probe.locate(y, t.k, t.w);
      } catch (const MapEscape&) {
        throw MapEscape("generator " + std::to_string(i) + " maps node " + format_double(x) + " to " +
                        format_double(y) + ", outside the domain");
      }
      rows_[j].push_back(t);
    }
  }
}

GridFunction DiscreteOperator::apply(const GridFunction& f) const {
  if (f.intervals() != m_) throw SchemaError("grid size mismatch");
  std::vector<double> out(m_ + 1, 0.0);
  const auto& v = f.values();
  for (int j = 0; j <= m_; ++j) {
    double s = 0.0;
    for (const Term& t : rows_[j]) s += t.coef * ((1.0 - t.w) * v[t.k] + t.w * v[t.k + 1]);
    out[j] = s;
  }
  return GridFunction(space_, m_, std::move(out));
}

GridFunction apply_operator(const gds::GuidedSystem& sys, const GridFunction& f) {
  return DiscreteOperator(sys, f.intervals()).apply(f);
}

GridFunction compute_g_n(const gds::GuidedSystem& sys, int n, GnMode mode, int intervals) {
  require_coefficients(sys);
  const gds::StateSpace& space = sys.space();
  if (mode == GnMode::Iterated) {
    DiscreteOperator op(sys, intervals);
    GridFunction g(space, intervals, std::vector<double>(intervals + 1, 1.0));
    for (int k = 0; k < n; ++k) g = op.apply(g);
    return g;
  }
  double terms = std::pow(static_cast<double>(sys.size()), n);
  if (terms > 1e6)
    throw BudgetExceeded("explicit g_n needs " + format_double(terms) + " terms, limit 1e6");
  std::function<double(int, double)> rec = [&](int k, double x) -> double {
    if (k == 0) return 1.0;
    double s = 0.0;
    for (std::size_t i = 0; i < sys.size(); ++i) {
      double c = sys.coefficient(i)(x);
      if (c == 0.0) continue;
      s += c * rec(k - 1, sys.apply(i, x));
    }
    return s;
  };
  return GridFunction::sample(space, intervals, [&](double x) { return rec(n, x); });
}

ContractionCertificate certify_contraction(const gds::GuidedSystem& sys, int m_max, int intervals) {
  DiscreteOperator op(sys, intervals);
  ContractionCertificate cert;
  cert.grid = intervals;
  GridFunction g(sys.space(), intervals, std::vector<double>(intervals + 1, 1.0));
  constexpr double kMargin = 1e-6;
  for (int k = 1; k <= m_max; ++k) {
    GridFunction next = op.apply(g);
    for (int j = 0; j <= intervals; ++j)
      if (next[j] > g[j] + 1e-12) {
        ++cert.monotonicity_violations;
        break;
      }
    g = std::move(next);
    double norm = g.sup_norm();
    cert.history.push_back(norm);
    cert.norm = norm;
    if (norm < 1.0 - kMargin) {
      cert.certified = true;
      cert.m = k;
      return cert;
    }
  }
  cert.m = m_max;
  return cert;
}

NeumannSolution solve_neumann(const gds::GuidedSystem& sys, const GridFunction& h, double tol,
                              int max_iter, int m_max) {
  NeumannSolution sol;
  sol.certificate = certify_contraction(sys, m_max, h.intervals());
  if (!sol.certificate.certified)
    throw NotCertified("no m <= " + std::to_string(m_max) + " with sup g_m < 1 (last norm " +
                       format_double(sol.certificate.norm) + ")");
  DiscreteOperator op(sys, h.intervals());
  GridFunction f = h;
  int it = 0;
  for (;;) {
    if (it >= max_iter)
      throw NoConvergence("Neumann iteration did not reach tol " + format_double(tol) + " in " +
                          std::to_string(max_iter) + " steps");
    GridFunction next = op.apply(f);
    double change = 0.0;
    for (int j = 0; j <= h.intervals(); ++j) {
      next.values()[j] += h[j];
      change = std::max(change, std::fabs(next[j] - f[j]));
    }
    f = std::move(next);
    ++it;
    if (change < tol) break;
  }
  GridFunction af = op.apply(f);
  double res = 0.0;
  for (int j = 0; j <= h.intervals(); ++j) res = std::max(res, std::fabs(f[j] - af[j] - h[j]));
  sol.f = std::move(f);
  sol.residual = res;
  sol.iterations = it;
  return sol;
}

MaxPrincipleReport check_max_principle(const gds::GuidedSystem& sys, const GridFunction& f, double tol,
                                       const MaxPrincipleOptions& opts) {
  require_coefficients(sys);
  const auto& space = sys.space();
  for (int j = 0; j <= f.intervals(); ++j) {
    double x = f.node(j);
    double sum = 0.0;
    for (std::size_t i = 0; i < sys.size(); ++i) {
      double a = sys.coefficient(i)(x);
      sum += a;
      if (sys.allowed(i, x) && !(a > 0.0))
        throw HypothesisFailure("coefficient " + std::to_string(i) + " vanishes off its guiding set at " +
                                format_double(x));
    }
    if (std::fabs(sum - 1.0) > opts.coef_tol)
      throw HypothesisFailure("coefficients do not sum to 1 at " + format_double(x));
  }

  MaxPrincipleReport r;
  GridFunction af = apply_operator(sys, f);
  for (int j = 0; j <= f.intervals(); ++j) r.residual = std::max(r.residual, std::fabs(f[j] - af[j]));
  if (r.residual > tol)
    throw NotASolution("homogeneous residual " + format_double(r.residual) + " exceeds " + format_double(tol));

  int jmax = 0;
  int jmin = 0;
  for (int j = 0; j <= f.intervals(); ++j) {
    if (f[j] > f[jmax]) jmax = j;
    if (f[j] < f[jmin]) jmin = j;
  }
  r.max_value = f[jmax];
  r.min_value = f[jmin];
  r.argmax = f.node(jmax);
  r.argmin = f.node(jmin);
  double eps = opts.eps > 0 ? opts.eps : f.step();
  auto max_cloud = gds::guided_orbit_set(sys, r.argmax, opts.depth, eps);
  auto min_cloud = gds::guided_orbit_set(sys, r.argmin, opts.depth, eps);
  for (double p : max_cloud.points) r.worst_gap = std::max(r.worst_gap, r.max_value - f(p));
  for (double p : min_cloud.points) r.worst_gap = std::max(r.worst_gap, f(p) - r.min_value);
  r.cloud_points = max_cloud.points.size() + min_cloud.points.size();
  r.pass = r.worst_gap <= opts.level_tol;
  (void)space;
  return r;
}

Eigen::MatrixXd MatrixFunction::operator()(double x) const {
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = entries[r * n + c](x);
  return m;
}

MatrixFunction MatrixFunction::parse(const std::vector<std::vector<std::string>>& rows,
                                     const std::string& variable) {
  MatrixFunction m;
  m.n = static_cast<int>(rows.size());
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != m.n) throw SchemaError("matrix rows must be square");
    for (const auto& s : row) m.entries.push_back(expr::Expression::parse(s, variable));
  }
  return m;
}

namespace {

std::string eigen_note(const Eigen::MatrixXd& m) {
  if (m.rows() != 2) return "";
  double tr = m.trace();
  double det = m.determinant();
  double disc = tr * tr - 4 * det;
  return disc < 0 ? " (non-real eigenvalues, no real triangularization)" : "";
}

}  // namespace

TriangularReport verify_triangular_uniqueness(const TriangularFamily& family, const gds::GuidedSystem& sys,
                                              const std::vector<GridFunction>& f, double tol) {
  if (family.matrices.size() != sys.size()) throw SchemaError("one matrix per generator is required");
  if (family.matrices.empty()) throw SchemaError("empty matrix family");
  int n = family.matrices[0].n;
  if (static_cast<int>(f.size()) != n) throw SchemaError("F needs one grid function per component");
  if (family.p.has_value() != family.p_inv.has_value()) throw SchemaError("P and P^-1 come together");

  TriangularReport r;
  const GridFunction& grid = f[0];
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j <= grid.intervals(); ++j) {
    double x = grid.node(j);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < family.matrices.size(); ++i) {
      Eigen::MatrixXd a = family.matrices[i](x);
      sum += a;
      Eigen::MatrixXd t = family.p ? Eigen::MatrixXd(*family.p_inv * a * *family.p) : a;
      for (int row = 0; row < n; ++row)
        for (int col = row + 1; col < n; ++col)
          if (std::fabs(t(row, col)) > tol)
            throw HypothesisFailure("matrix " + std::to_string(i) + " is not lower triangular at " +
                                    format_double(x) + eigen_note(a));
      for (int k = 0; k < n; ++k)
        if (t(k, k) < -tol)
          throw HypothesisFailure("matrix " + std::to_string(i) + " has a negative diagonal entry at " +
                                  format_double(x));
      if (sys.allowed(i, x) && !(a.determinant() > 0))
        throw HypothesisFailure("matrix " + std::to_string(i) + " is singular off its guiding set at " +
                                format_double(x));
    }
    if ((sum - id).cwiseAbs().maxCoeff() > tol)
      throw HypothesisFailure("matrices do not sum to the identity at " + format_double(x));

    Eigen::VectorXd fx(n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) fx(k) = f[k][j];
    for (std::size_t i = 0; i < family.matrices.size(); ++i) {
      Eigen::VectorXd fy(n);
      double y = sys.apply(i, x);
      for (int k = 0; k < n; ++k) fy(k) = f[k](y);
      rhs += family.matrices[i](x) * fy;
    }
    r.residual = std::max(r.residual, (fx - rhs).cwiseAbs().maxCoeff());
  }

  // Components of P^-1 F must be constant, checked in order as in the inductive argument.
  r.component_spread.assign(n, 0.0);
  std::vector<double> lo(n, INFINITY), hi(n, -INFINITY);
  for (int j = 0; j <= grid.intervals(); ++j) {
    Eigen::VectorXd fx(n);
    for (int k = 0; k < n; ++k) fx(k) = f[k][j];
    Eigen::VectorXd g = family.p ? Eigen::VectorXd(*family.p_inv * fx) : fx;
    for (int k = 0; k < n; ++k) {
      lo[k] = std::min(lo[k], g(k));
      hi[k] = std::max(hi[k], g(k));
    }
  }
  for (int k = 0; k < n; ++k) {
    r.component_spread[k] = hi[k] - lo[k];
    if (r.first_nonconstant < 0 && r.component_spread[k] > tol) r.first_nonconstant = k;
  }
  r.pass = r.first_nonconstant < 0;
  return r;
}

}  // namespace guided::funceq
