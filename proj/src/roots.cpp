#include "guided/roots.hpp"

#include <cmath>

#include "guided/errors.hpp"

namespace guided {

double bisect(const RealFn& f, double a, double b, double xtol) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw NoBracket("no sign change on [" + std::to_string(a) + ", " +
                                            std::to_string(b) + "]");
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (a + b);
    if (m <= std::min(a, b) || m >= std::max(a, b) || std::fabs(b - a) <= xtol) break;
    double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

namespace {

// Minimizer of |g| on [lo, hi] around a grid minimum.
double refine_minimum(const RealFn& g, const RealFn& dg, double lo, double mid, double hi) {
  if (dg) {
    double s = g(mid) >= 0 ? 1.0 : -1.0;
    auto slope = [&](double x) { return s * dg(x); };
    double dl = slope(lo);
    double dm = slope(mid);
    double dh = slope(hi);
    try {
      if (dl <= 0 && dm >= 0) return bisect(slope, lo, mid);
      if (dm <= 0 && dh >= 0) return bisect(slope, mid, hi);
    } catch (const NoBracket&) {
    }
  }
  // Golden-section search on |g|.
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = std::fabs(g(c));
  double fd = std::fabs(g(d));
  for (int it = 0; it < 200 && b - a > 1e-15 * (1 + std::fabs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = std::fabs(g(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = std::fabs(g(d));
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

gds::IntervalSet find_zero_set(const RealFn& g, const RealFn& dg, double a, double b,
                               const ZeroSetOptions& opts) {
  int n = std::max(opts.grid, 4);
  std::vector<double> t(n + 1), v(n + 1);
  for (int j = 0; j <= n; ++j) {
    t[j] = j == n ? b : a + (b - a) * j / n;
    v[j] = g(t[j]);
  }
  std::vector<gds::ClosedInterval> parts;

  for (int j = 0; j <= n;) {
    if (std::fabs(v[j]) < opts.tol) {
      int k = j;
      while (k + 1 <= n && std::fabs(v[k + 1]) < opts.tol) ++k;
      if (k > j) parts.push_back({t[j], t[k]});
      j = k + 1;
    } else {
      ++j;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (std::fabs(v[j]) >= opts.tol && std::fabs(v[j + 1]) >= opts.tol && (v[j] > 0) != (v[j + 1] > 0)) {
      double r = bisect(g, t[j], t[j + 1]);
      parts.push_back({r, r});
    }
  }
  for (int j = 0; j <= n; ++j) {
    double left = j > 0 ? std::fabs(v[j - 1]) : INFINITY;
    double right = j < n ? std::fabs(v[j + 1]) : INFINITY;
    double here = std::fabs(v[j]);
    if (here > left || here > right) continue;
    double lo = t[std::max(j - 1, 0)];
    double hi = t[std::min(j + 1, n)];
    double best = t[j];
    double r = refine_minimum(g, dg, lo, t[j], hi);
    if (std::fabs(g(r)) < here) best = r;
    if (std::fabs(g(best)) < opts.tol) parts.push_back({best, best});
  }

  gds::IntervalSet merged(parts);
  // Parts closer than the tolerance describe the same zero.
  std::vector<gds::ClosedInterval> out;
  for (const auto& p : merged.parts()) {
    if (!out.empty() && p.lo - out.back().hi <= opts.tol) {
      out.back().hi = std::max(out.back().hi, p.hi);
    } else {
      out.push_back(p);
    }
  }
  return gds::IntervalSet(out);
}

}  // namespace guided
