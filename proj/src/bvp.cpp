#include "guided/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "guided/errors.hpp"
#include "guided/roots.hpp"

namespace guided::bvp {

namespace {

constexpr int kGeometryGrid = 2001;

std::string at(double z) { return " at z=" + format_double(z); }

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol * (1 + std::fabs(b)); }

}  // namespace

Curve::Curve(const BoundaryProblem& problem)
    : p_(problem),
      a1_(problem.alpha1),
      a2_(problem.alpha2),
      da1_(a1_.derivative()),
      da2_(a2_.derivative()),
      d2a1_(da1_.derivative()),
      d2a2_(da2_.derivative()) {
  if (!(p_.m > 0) || !(p_.n > 0)) throw SchemaError("m and n must be positive");
  double tol = p_.tol;
  if (!near(a1_(-1.0), 0.0, tol) || !near(a2_(-1.0), 1.0, tol))
    throw DegenerateParametrization("Gamma(-1) must be A2 = (0,1)");
  if (!near(a1_(1.0), 1.0, tol) || !near(a2_(1.0), 0.0, tol))
    throw DegenerateParametrization("Gamma(1) must be A1 = (1,0)");
  for (int j = 0; j < kGeometryGrid; ++j) {
    double z = -1.0 + 2.0 * j / (kGeometryGrid - 1);
    if (da1_(z) < -tol) throw DegenerateParametrization("alpha1 decreases" + at(z));
    if (da2_(z) > tol) throw DegenerateParametrization("alpha2 increases" + at(z));
    if (!(omega_slope(z) > p_.slope_tol))
      throw DegenerateParametrization("n alpha1' - m alpha2' = " + format_double(omega_slope(z)) + at(z));
  }
}

double Curve::z_of(double t) const {
  if (t <= omega(-1.0)) return -1.0;
  if (t >= omega(1.0)) return 1.0;
  return bisect([&](double z) { return omega(z) - t; }, -1.0, 1.0);
}

Point Curve::project(Point q) const { return point(z_of(omega(q))); }

bool Curve::contains(Point q, double tol) const {
  if (q.x < -tol || q.y < -tol) return false;
  double t = omega(q);
  if (t < -p_.m - tol || t > p_.n + tol) return false;
  // Moving from q along (m, n) reaches Gamma, so q lies on the origin side of it.
  return q.x <= a1_(z_of(t)) + tol;
}

Point project_pi3(Point p, const BoundaryProblem& problem) { return Curve(problem).project(p); }

BoundarySystem build_boundary_system(const BoundaryProblem& problem, std::uint64_t seed) {
  Curve curve(problem);
  double m = problem.m;
  double n = problem.n;
  double tol = problem.tol;

  ZeroSetOptions zopts;
  zopts.tol = tol;
  auto fn = [](const expr::Expression& e) { return RealFn([e](double x) { return e(x); }); };
  gds::IntervalSet om1 = find_zero_set(fn(curve.dalpha1()), fn(curve.d2alpha1()), -1.0, 1.0, zopts);
  gds::IntervalSet om2 = find_zero_set(fn(curve.dalpha2()), fn(curve.d2alpha2()), -1.0, 1.0, zopts);

  auto w = [curve](double z) { return curve.omega(z); };
  auto dw = [curve](double z) { return curve.omega_slope(z); };
  auto d2w = [curve, m, n](double z) { return n * curve.d2alpha1()(z) - m * curve.d2alpha2()(z); };
  auto zt = [curve](double t) { return curve.z_of(t); };

  ScalarMap omega = ScalarMap::from_functions(w, dw, "omega", d2w);
  ScalarMap omega_inv = ScalarMap::from_functions(
      zt, [=](double t) { return 1.0 / dw(zt(t)); }, "omega_inv");

  // delta_1 = n alpha1 o z, delta_2 = -m alpha2 o z; derivatives by the quotient rule in z.
  ScalarMap delta1 = ScalarMap::from_functions(
      [=](double t) { return n * curve.alpha1()(zt(t)); },
      [=](double t) {
        double z = zt(t);
        return n * curve.dalpha1()(z) / dw(z);
      },
      "delta1",
      [=](double t) {
        double z = zt(t);
        double s = dw(z);
        return n * (curve.d2alpha1()(z) * s - curve.dalpha1()(z) * d2w(z)) / (s * s * s);
      });
  ScalarMap delta2 = ScalarMap::from_functions(
      [=](double t) { return -m * curve.alpha2()(zt(t)); },
      [=](double t) {
        double z = zt(t);
        return -m * curve.dalpha2()(z) / dw(z);
      },
      "delta2",
      [=](double t) {
        double z = zt(t);
        double s = dw(z);
        return -m * (curve.d2alpha2()(z) * s - curve.dalpha2()(z) * d2w(z)) / (s * s * s);
      });

  ScalarMap zeta1 = ScalarMap::from_functions(
      [=](double z) { return zt(n * curve.alpha1()(z)); },
      [=](double z) { return n * curve.dalpha1()(z) / dw(zt(n * curve.alpha1()(z))); }, "zeta1");
  ScalarMap zeta2 = ScalarMap::from_functions(
      [=](double z) { return zt(-m * curve.alpha2()(z)); },
      [=](double z) { return -m * curve.dalpha2()(z) / dw(zt(-m * curve.alpha2()(z))); }, "zeta2");

  auto image = [&](const gds::IntervalSet& s) {
    std::vector<gds::ClosedInterval> parts;
    for (const auto& p : s.parts()) parts.push_back({w(p.lo), w(p.hi)});
    return gds::IntervalSet(parts);
  };

  BoundarySystem sys{curve,
                     gds::GuidedSystem::from_maps(gds::StateSpace::interval(-1.0, 1.0), {zeta1, zeta2}, {om1, om2},
                                                  gds::Tolerances{tol, tol, tol, 1001}),
                     pconf::validate_pconfiguration({delta1, delta2}, {-m, 0.0, n}, tol),
                     omega,
                     omega_inv,
                     om1,
                     om2,
                     0.0,
                     {},
                     {}};
  gds::StateSpace interval = gds::StateSpace::interval(-m, n);
  std::vector<gds::IntervalSet> lambda{image(om1), image(om2)};
  for (int i = 0; i < 2; ++i)
    sys.lambda_defect = std::max(sys.lambda_defect, gds::hausdorff_distance(sys.pconf.guiding[i], lambda[i], interval));
  sys.pconf.guiding = lambda;
  sys.pconf.tol.lambda = tol;
  sys.conjugacy = gds::verify_conjugacy(sys.pconf.system(), sys.gamma, omega_inv, omega, 100, seed, tol);

  const char* corner[2] = {"A2 (z=-1)", "A1 (z=1)"};
  for (int i = 0; i < 2; ++i) {
    const gds::IntervalSet& om = i == 0 ? om1 : om2;
    for (int c = 0; c < 2; ++c)
      if (om.contains(c == 0 ? -1.0 : 1.0, sys.gamma.space(), tol))
        sys.flags.push_back("Omega_" + std::to_string(i + 1) + " contains corner " + corner[c] +
                            ": Gamma is tangent to a characteristic there");
  }
  return sys;
}

FixedPoint fixed_point(const ScalarMap& map, double lo, double hi) {
  auto g = [&](double t) { return map(t) - t; };
  double glo = g(lo);
  double ghi = g(hi);
  FixedPoint fp;
  if (glo == 0.0) {
    fp.t = lo;
  } else if (ghi == 0.0) {
    fp.t = hi;
  } else if ((glo < 0) != (ghi < 0)) {
    fp.t = bisect(g, lo, hi);
  } else {
    throw NoBracket("map(t) - t has the same sign at " + format_double(lo) + " and " + format_double(hi));
  }
  fp.derivative = map.derivative(fp.t);
  if (std::fabs(fp.derivative - 1.0) < 1e-6)
    throw InconclusiveError("derivative at the fixed point " + format_double(fp.t) +
                            " is 1; the fixed-point lemma does not apply");
  return fp;
}

const char* to_string(Solvability s) {
  switch (s) {
    case Solvability::Solvable:
      return "Solvable";
    case Solvability::NotSolvable:
      return "NotSolvable";
    case Solvability::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

namespace {

// Points standing in for Lambda_i: degenerate parts exactly, wide parts by 9 samples.
std::vector<double> representatives(const gds::IntervalSet& s) {
  std::vector<double> out;
  for (const auto& p : s.parts()) {
    if (p.hi - p.lo <= 1e-12) {
      out.push_back(p.lo);
      continue;
    }
    for (int k = 0; k <= 8; ++k) out.push_back(p.lo + (p.hi - p.lo) * k / 8.0);
  }
  return out;
}

// Escape: from p, some Lambda-proper orbit ends at q whose delta_1 iterates climb past
// max Lambda_1 without touching it. delta_1(t) >= t because delta_2' >= 0, so passing is final.
bool escapes(const gds::GuidedSystem& sys, double p, double top, int depth) {
  const auto& lam1 = sys.guiding(0);
  const auto& space = sys.space();
  double band = sys.tolerances().lambda;
  auto climbs = [&](double q) {
    for (int k = 0; k < 10000; ++k) {
      if (q > top + band) return true;
      if (lam1.contains(q, space, band)) return false;
      double next = sys.apply(0, q);
      if (next <= q) return false;
      q = next;
    }
    return false;
  };
  std::deque<std::pair<double, int>> queue{{p, 0}};
  while (!queue.empty()) {
    auto [x, d] = queue.front();
    queue.pop_front();
    if (d > 0 && climbs(x)) return true;
    if (d == depth) continue;
    for (int i : gds::allowed_generators(sys, x)) queue.emplace_back(sys.apply(i, x), d + 1);
  }
  return false;
}

}  // namespace

SolvabilityReport analyze_solvability(const BoundarySystem& system, double eps, int depth, int max_cycle_len) {
  SolvabilityReport rep;
  const pconf::PConfiguration& pc = system.pconf;
  gds::GuidedSystem sys = pc.system();
  double m = -pc.a0();
  double n = pc.aN();
  double tol = pc.tol.lambda;
  const gds::IntervalSet& lam1 = pc.guiding[0];
  const gds::IntervalSet& lam2 = pc.guiding[1];

  {
    LayerReport l;
    l.name = "fixed_point";
    bool h1 = std::all_of(lam1.parts().begin(), lam1.parts().end(), [&](auto& p) { return p.lo > tol && p.hi <= n; });
    bool h2 = std::all_of(lam2.parts().begin(), lam2.parts().end(), [&](auto& p) { return p.hi < -tol && p.lo >= -m; });
    l.applicable = h1 && h2;
    if (!l.applicable) {
      l.detail = "Lambda_1 not inside (0, n] or Lambda_2 not inside [-m, 0)";
    } else {
      std::ostringstream os;
      bool outside = false;
      bool all_inside = true;
      const char* names[2] = {"delta1 o delta2", "delta2 o delta1"};
      for (int k = 0; k < 2; ++k) {
        ScalarMap comp = k == 0 ? compose(pc.maps[0], pc.maps[1]) : compose(pc.maps[1], pc.maps[0]);
        try {
          FixedPoint fp = fixed_point(comp, -m, n);
          (k == 0 ? rep.fp12 : rep.fp21) = fp;
          bool in = sys.in_lambda(fp.t);
          os << names[k] << ": t*=" << format_double(fp.t) << " derivative " << format_double(fp.derivative)
             << (in ? " in Lambda; " : " not in Lambda; ");
          if (!in && fp.derivative < 1.0) outside = true;
          if (!in) all_inside = false;
        } catch (const Error& e) {
          all_inside = false;
          os << names[k] << ": " << e.what() << "; ";
        }
      }
      if (outside)
        l.outcome = Solvability::Solvable;
      else if (all_inside)
        l.outcome = Solvability::NotSolvable;
      l.detail = os.str();
    }
    rep.layers.push_back(l);
  }

  {
    LayerReport l;
    l.name = "contraction";
    l.applicable = lam1.empty() && lam2.empty();
    if (l.applicable) {
      rep.contraction = gds::check_contraction_minimality(sys, 2000);
      if (rep.contraction.certified) {
        l.outcome = Solvability::Solvable;
        l.detail = "unguided contraction, Lipschitz " + format_double(rep.contraction.lipschitz);
      } else {
        l.detail = "certificate failed: " + rep.contraction.failed_hypothesis;
      }
    } else {
      l.detail = "guiding sets are not empty";
    }
    rep.layers.push_back(l);
  }

  {
    LayerReport l;
    l.name = "escape";
    l.applicable = !sys.in_lambda(n);
    if (!l.applicable) {
      l.detail = "A1 lies in Omega";
    } else {
      double top = -m;
      for (const auto& p : lam1.parts()) top = std::max(top, p.hi);
      bool ok = true;
      for (double p : representatives(lam1))
        if (!escapes(sys, p, top, 8)) {
          ok = false;
          l.detail = "no escaping orbit found from " + format_double(p);
          break;
        }
      if (ok) {
        l.outcome = Solvability::Solvable;
        l.detail = "every point of Lambda_1 escapes its delta_1 preimages";
      }
    }
    rep.layers.push_back(l);
  }

  {
    LayerReport l;
    l.name = "cycles";
    l.applicable = !(lam1.empty() && lam2.empty());
    rep.cycles = gds::find_guided_cycles(sys, max_cycle_len);
    if (!rep.cycles.cycles.empty()) {
      l.outcome = Solvability::NotSolvable;
      l.detail = std::to_string(rep.cycles.cycles.size()) + " guided cycle(s)";
    } else {
      l.detail = "no guided cycle up to length " + std::to_string(max_cycle_len);
    }
    rep.layers.push_back(l);
  }

  std::optional<Solvability> decided;
  for (const auto& l : rep.layers) {
    if (!l.outcome) continue;
    if (!decided) {
      decided = l.outcome;
      rep.route = l.name;
    } else if (*decided != *l.outcome) {
      rep.verdict = Solvability::Inconclusive;
      rep.route = "conflict";
      return rep;
    }
  }
  if (decided) {
    rep.verdict = *decided;
    return rep;
  }

  LayerReport l;
  l.name = "probe";
  l.applicable = true;
  rep.probe = gds::probe_minimality(sys, eps, depth);
  switch (rep.probe->kind) {
    case gds::MinimalityKind::MinimalEvidence:
      l.outcome = Solvability::Solvable;
      break;
    case gds::MinimalityKind::NotMinimal:
      l.outcome = Solvability::NotSolvable;
      break;
    case gds::MinimalityKind::Inconclusive:
      break;
  }
  l.detail = std::string("probe verdict ") + gds::to_string(rep.probe->kind) + " at eps " + format_double(eps);
  rep.layers.push_back(l);
  rep.route = "probe";
  rep.verdict = l.outcome.value_or(Solvability::Inconclusive);
  return rep;
}

ReducedData reduce_boundary_data(const BoundaryProblem& problem, const BoundarySystem& system) {
  const Curve& c = system.curve;
  double tol = problem.tol;
  auto check = [&](double a, double b, const std::string& what) {
    if (std::fabs(a - b) > tol * (1 + std::fabs(a) + std::fabs(b)))
      throw CornerMismatch(what + ": " + format_double(a) + " vs " + format_double(b));
  };
  ReducedData out;
  out.g_origin = problem.g1(0.0);
  check(problem.g1(0.0), problem.g2(0.0), "g1(0) != g2(0) at O");
  check(problem.g1(1.0), problem.g_gamma(1.0), "g1(1) != g_Gamma(1) at A1");
  check(problem.g2(1.0), problem.g_gamma(-1.0), "g2(1) != g_Gamma(-1) at A2");
  BoundaryProblem p = problem;
  double go = out.g_origin;
  out.h = [p, c, go](double t) {
    double z = c.z_of(t);
    Point q = c.point(z);
    return p.g_gamma(z) - p.g1(q.x) - p.g2(q.y) + go;
  };
  out.h_start = out.h(-problem.m);
  out.h_end = out.h(problem.n);
  double scale = 1 + std::fabs(go);
  if (std::fabs(out.h_start) > 10 * tol * scale || std::fabs(out.h_end) > 10 * tol * scale)
    throw CornerMismatch("h(-m) = " + format_double(out.h_start) + ", h(n) = " + format_double(out.h_end) +
                         " must vanish");
  return out;
}

double BvpSolution::phi(double x) const { return problem.g1(x) - chi(problem.n * x); }

double BvpSolution::psi(double y) const { return problem.g2(y) - problem.g1(0.0) - chi(-problem.m * y); }

double BvpSolution::u(double x, double y) const {
  if (!curve->contains({x, y}, 1e-9))
    throw MapEscape("(" + format_double(x) + ", " + format_double(y) + ") lies outside the domain");
  return phi(x) + psi(y) + chi(problem.n * x - problem.m * y);
}

BvpSolution solve_bvp(const BoundaryProblem& problem, const BoundarySystem& system, int intervals,
                      const BvpOptions& opts) {
  ReducedData data = reduce_boundary_data(problem, system);
  pconf::IvpProblem ivp{system.pconf, data.h, 0.0, opts.mu, problem.tol};
  pconf::IvpSolution ivs = pconf::solve_ivp(ivp, intervals);

  BvpSolution sol;
  sol.chi = ivs.f;
  sol.residual = ivs.residual;
  sol.problem = problem;
  sol.curve = std::make_shared<const Curve>(system.curve);
  sol.chi_origin = sol.chi(0.0);
  double floor = std::max(ivs.residual, 1e-14);
  if (std::fabs(sol.chi_origin) > 10 * floor)
    sol.warnings.push_back("chi(0) = " + format_double(sol.chi_origin) + " exceeds 10x the collocation residual");

  const Curve& c = system.curve;
  for (int j = 0; j <= intervals; ++j) {
    double t = sol.chi.node(j);
    if (t >= 0) {
      double x = t / problem.n;
      sol.boundary_defect = std::max(sol.boundary_defect, std::fabs(sol.u(x, 0.0) - problem.g1(x)));
    }
    if (t <= 0) {
      double y = -t / problem.m;
      sol.boundary_defect = std::max(sol.boundary_defect, std::fabs(sol.u(0.0, y) - problem.g2(y)));
    }
    double z = c.z_of(t);
    Point q = c.point(z);
    sol.boundary_defect = std::max(sol.boundary_defect, std::fabs(sol.u(q.x, q.y) - problem.g_gamma(z)));
  }
  sol.pde_residual = fd_residual(sol, opts.fd_step, opts.fd_margin, &sol.lattice_points);
  return sol;
}

double fd_residual(const BvpSolution& sol, double step, int margin, int* points) {
  const Curve& c = *sol.curve;
  double m = sol.problem.m;
  double n = sol.problem.n;
  double s = step;
  auto mixed = [&](double x, double y) {
    return (sol.u(x + s, y + s) - sol.u(x + s, y - s) - sol.u(x - s, y + s) + sol.u(x - s, y - s)) / (4 * s * s);
  };
  double worst = 0.0;
  int count = 0;
  int k = static_cast<int>(std::floor(1.0 / s + 1e-9));
  double r = margin * s;
  for (int i = margin; i <= k; ++i)
    for (int j = margin; j <= k; ++j) {
      double x = i * s;
      double y = j * s;
      if (!c.contains({x + r, y + r}, 0.0) || !c.contains({x + r, y - r}, 0.0) ||
          !c.contains({x - r, y + r}, 0.0) || !c.contains({x - r, y - r}, 0.0))
        continue;
      double lu = m * (mixed(x + s, y) - mixed(x - s, y)) / (2 * s) + n * (mixed(x, y + s) - mixed(x, y - s)) / (2 * s);
      worst = std::max(worst, std::fabs(lu));
      ++count;
    }
  if (points) *points = count;
  return worst;
}

std::string field_csv(const BvpSolution& sol, int lattice) {
  std::ostringstream os;
  os << "x,y,u\n";
  for (int i = 0; i <= lattice; ++i)
    for (int j = 0; j <= lattice; ++j) {
      double x = static_cast<double>(i) / lattice;
      double y = static_cast<double>(j) / lattice;
      if (!sol.curve->contains({x, y}, 1e-12)) continue;
      os << format_double(x) << ',' << format_double(y) << ',' << format_double(sol.u(x, y)) << '\n';
    }
  return os.str();
}

}  // namespace guided::bvp
