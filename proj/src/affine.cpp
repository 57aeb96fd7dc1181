#include <algorithm>
#include <cmath>
#include <numbers>

#include "guided/cauchy.hpp"
#include "guided/errors.hpp"
#include "guided/grid_function.hpp"

namespace guided::cauchy {

std::vector<double> jacobi_eigenvalues(const Eigen::MatrixXd& m, double tol) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd a = 0.5 * (m + m.transpose());
  double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a(p, q)));
    if (off <= tol * scale) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p);
          double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k);
          double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int k = 0; k < n; ++k) ev[k] = a(k, k);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<double> characteristic_roots(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<double> ev;
  if (n == 1) {
    ev = {m(0, 0)};
  } else if (n == 2) {
    double tr = m.trace();
    double det = m.determinant();
    double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    ev = {tr / 2 - disc, tr / 2 + disc};
  } else if (n == 3) {
    // Trigonometric roots of the depressed cubic; all real for symmetric input.
    Eigen::Matrix3d a = 0.5 * (m + m.transpose());
    double q = a.trace() / 3;
    double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    double p2 = std::pow(a(0, 0) - q, 2) + std::pow(a(1, 1) - q, 2) + std::pow(a(2, 2) - q, 2) + 2 * p1;
    double p = std::sqrt(p2 / 6);
    if (p == 0.0) {
      ev = {q, q, q};
    } else {
      Eigen::Matrix3d bm = (a - q * Eigen::Matrix3d::Identity()) / p;
      double r = std::clamp(bm.determinant() / 2, -1.0, 1.0);
      double phi = std::acos(r) / 3;
      double e1 = q + 2 * p * std::cos(phi);
      double e3 = q + 2 * p * std::cos(phi + 2 * std::numbers::pi / 3);
      ev = {e1, 3 * q - e1 - e3, e3};
    }
  } else {
    throw SchemaError("closed-form roots need n <= 3");
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

namespace {

std::vector<double> eigenvalues(const Eigen::MatrixXd& m) {
  return m.rows() <= 3 ? characteristic_roots(m) : jacobi_eigenvalues(m);
}

Eigen::VectorXd fixed_point(const Eigen::MatrixXd& b, const Eigen::VectorXd& d, int& iterations) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d.size());
  double last = INFINITY;
  bool settled = false;
  for (int k = 1; k <= 100000; ++k) {
    Eigen::VectorXd next = b * y + d;
    double change = (next - y).norm();
    // Past the 1e-14 tolerance, keep iterating while the change still shrinks.
    if (settled && !(change < last)) return y;
    y = std::move(next);
    iterations = std::max(iterations, k);
    if (change == 0.0) return y;
    settled = settled || change <= 1e-14 * (1.0 + y.norm());
    last = change;
  }
  throw NoConvergence("affine fixed-point iteration did not settle");
}

}  // namespace

AffineAnalysis analyze_affine(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2, const Eigen::VectorXd& b1,
                              const Eigen::VectorXd& b2) {
  const auto n = a1.rows();
  if (a1.cols() != n || a2.rows() != n || a2.cols() != n || b1.size() != n || b2.size() != n)
    throw SchemaError("affine analysis needs square matrices and vectors of one dimension");
  for (const auto* m : {&a1, &a2})
    if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw HypothesisFailure("symmetry: A_" + std::string(m == &a1 ? "1" : "2") + " is not symmetric");
  if ((a1 * a2 - a2 * a1).norm() >= 1e-10) throw HypothesisFailure("commutation: A_1 A_2 != A_2 A_1");
  for (const auto* m : {&a1, &a2}) {
    auto ev = eigenvalues(*m);
    if (!(ev.front() > 0))
      throw HypothesisFailure("positive_definite: A_" + std::string(m == &a1 ? "1" : "2") +
                              " has eigenvalue " + format_double(ev.front()));
  }

  AffineAnalysis an;
  Eigen::MatrixXd sinv = (a1 + a2).inverse();
  an.b1 = a1 * sinv;
  an.b2 = a2 * sinv;
  Eigen::VectorXd bs = -(b1 + b2);
  an.d1 = an.b1 * bs + b1;
  an.d2 = an.b2 * bs + b2;
  an.dt1 = fixed_point(an.b1, an.d1, an.iterations);
  an.dt2 = fixed_point(an.b2, an.d2, an.iterations);
  an.eig1 = eigenvalues(an.b1);
  an.eig2 = eigenvalues(an.b2);
  an.gamma = std::max(an.eig1.back(), an.eig2.back());
  double ratio = (an.dt1 - an.dt2).norm() / (1.0 - an.gamma);
  // Roundoff in the fixed points must not push an exact integer ratio up by one.
  an.n_bound = static_cast<int>(std::ceil(ratio - 1e-9)) + 1;
  an.balls = {an.dt1, an.dt2, an.n_bound};
  return an;
}

double orbit_rate(const AffineAnalysis& an, int which, const Eigen::VectorXd& z, int steps) {
  const Eigen::MatrixXd& b = which == 1 ? an.b1 : an.b2;
  const Eigen::VectorXd& d = which == 1 ? an.d1 : an.d2;
  const Eigen::VectorXd& dt = which == 1 ? an.dt1 : an.dt2;
  Eigen::VectorXd y = z;
  double e0 = (y - dt).norm();
  for (int k = 0; k < steps; ++k) y = b * y + d;
  return std::pow((y - dt).norm() / e0, 1.0 / steps);
}

Eigen::VectorXd SeparableMap::operator()(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(comp.size()));
  for (std::size_t i = 0; i < comp.size(); ++i)
    for (std::size_t j = 0; j < comp[i].size(); ++j) out(i) += comp[i][j](x(j));
  return out;
}

Eigen::VectorXd sample_point(const SampleSpec& spec, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(n);
  for (;;) {
    for (int k = 0; k < n; ++k) x(k) = u(rng);
    switch (spec.domain) {
      case SampleDomain::Box:
        return spec.r_hi * x;
      case SampleDomain::L1Ball:
        if (x.lpNorm<1>() <= 1.0) return spec.r_hi * x;
        break;
      case SampleDomain::Annulus: {
        double r = x.norm();
        if (r > 0 && r <= 1.0) {
          double lo = spec.r_lo / spec.r_hi;
          if (r >= lo) return spec.r_hi * x;
        }
        break;
      }
    }
  }
}

LinearCheck verify_cauchy_solution(const ScalarField& f, const VecFn& a1, const VecFn& a2, int n,
                                   const SampleSpec& spec, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LinearCheck out;
  out.samples = samples;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x = sample_point(spec, n, rng);
    out.residual = std::max(out.residual, std::fabs(f(x) - f(a1(x)) - f(a2(x))));
  }
  return out;
}

LinearCheck verify_linear_solution(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2, const Eigen::VectorXd& b1,
                                   const Eigen::VectorXd& b2, const Eigen::VectorXd& c, int samples,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampleSpec spec{SampleDomain::Box, 0.0, 10.0};
  LinearCheck out;
  out.samples = samples;
  auto n = static_cast<int>(c.size());
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x = sample_point(spec, n, rng);
    Eigen::VectorXd t1 = a1 * x + b1;
    Eigen::VectorXd t2 = a2 * x + b2;
    out.residual = std::max(out.residual, std::fabs(c.dot(t1 + t2) - c.dot(t1) - c.dot(t2)));
  }
  return out;
}

}  // namespace guided::cauchy
