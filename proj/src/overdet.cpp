#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

#include "guided/cauchy.hpp"
#include "guided/errors.hpp"
#include "guided/grid_function.hpp"
#include "guided/orbits.hpp"
#include "guided/roots.hpp"

namespace guided::cauchy {

namespace {

ScalarMap constant(double c) { return ScalarMap(expr::Expression::number(c)); }

// The single place values are produced, so path recomputation is bitwise identical.
double step_value(const PropagationRule& r, double z, double v, double A, double B) {
  return r.p(z) * v + r.qa(z) * A + r.qb(z) * B + r.r(z);
}

// Finds t in [a, b] with map(t) = target by scanning for a bracket; NaN when none.
double solve_for(const ScalarMap& m, double target, double a, double b) {
  constexpr int kGrid = 1000;
  auto g = [&](double t) { return m(t) - target; };
  double prev_t = a;
  double prev = g(a);
  if (std::fabs(prev) <= 1e-12) return a;
  for (int j = 1; j <= kGrid; ++j) {
    double t = j == kGrid ? b : a + (b - a) * j / kGrid;
    double cur = g(t);
    if (std::fabs(cur) <= 1e-12) return t;
    if ((prev < 0) != (cur < 0)) return bisect(g, prev_t, t);
    prev_t = t;
    prev = cur;
  }
  return NAN;
}

}  // namespace

OverdetProblem OverdetProblem::from_shape(double a, double b, const ScalarMap& alpha, const ScalarMap& beta,
                                          Shape shape, double A, double B) {
  double w = shape == Shape::Jensen ? 0.5 : 1.0;
  OverdetProblem p;
  p.a = a;
  p.b = b;
  p.A = A;
  p.B = B;
  p.rules.push_back({alpha, constant(w), constant(w), constant(0.0), constant(0.0)});
  p.rules.push_back({beta, constant(w), constant(0.0), constant(w), constant(0.0)});
  return p;
}

OverdetValidation validate_overdet(const OverdetProblem& problem, int samples, std::uint64_t seed) {
  if (!(problem.a < problem.b)) throw SchemaError("overdet interval needs a < b");
  if (problem.rules.empty()) throw SchemaError("overdet problem has no rules");
  double a = problem.a;
  double b = problem.b;
  double slack = 1e-9 * (1 + std::fabs(a) + std::fabs(b));
  OverdetValidation out;
  for (std::size_t i = 0; i < problem.rules.size(); ++i) {
    const ScalarMap& m = problem.rules[i].map;
    for (int j = 0; j <= 1000; ++j) {
      double t = a + (b - a) * j / 1000.0;
      double y = m(t);
      if (!(y >= a - slack && y <= b + slack))
        throw HypothesisFailure("range: rule " + std::to_string(i) + " maps " + format_double(t) + " to " +
                                format_double(y));
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(a, b);
  for (int s = 0; s < samples; ++s) {
    double x = u(rng);
    double y = u(rng);
    if (x == y) continue;
    for (std::size_t i = 0; i < problem.rules.size(); ++i) {
      const ScalarMap& m = problem.rules[i].map;
      double q = std::fabs(m(x) - m(y)) / std::fabs(x - y);
      out.contraction = std::max(out.contraction, q);
      if (!(q < 1.0))
        throw HypothesisFailure("contraction: rule " + std::to_string(i) + " is not strictly contractive near " +
                                format_double(x));
    }
  }
  bool hit_a = false;
  bool hit_b = false;
  for (const auto& r : problem.rules) {
    double xa = solve_for(r.map, a, a, b);
    if (!hit_a && !std::isnan(xa)) {
      hit_a = true;
      out.fixed_a = xa;
    }
    double xb = solve_for(r.map, b, a, b);
    if (!hit_b && !std::isnan(xb)) {
      hit_b = true;
      out.fixed_b = xb;
    }
  }
  if (!hit_a) throw HypothesisFailure("fixed_point: no rule reaches a = " + format_double(a));
  if (!hit_b) throw HypothesisFailure("fixed_point: no rule reaches b = " + format_double(b));
  return out;
}

PropagationCloud propagate_values(const OverdetProblem& problem, int depth, double eps, std::size_t max_points) {
  if (!(eps > 0)) throw SchemaError("eps must be positive");
  double a = problem.a;
  double b = problem.b;
  double w = eps / 2;
  double cells = std::ceil((b - a) / w - 1e-9);
  if (cells > 2e8) throw BudgetExceeded("propagation cells too fine");
  auto last = static_cast<std::int64_t>(cells);
  // b gets a cell of its own so the right seed never shares with interior points.
  auto cell_of = [&](double x) -> std::int64_t {
    if (x >= b) return last;
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((x - a) / w)), 0, last - 1);
  };

  PropagationCloud cloud;
  std::unordered_map<std::int64_t, int> occupied;
  std::vector<int> frontier;
  auto add_seed = [&](double x, double v) {
    occupied[cell_of(x)] = static_cast<int>(cloud.entries.size());
    frontier.push_back(static_cast<int>(cloud.entries.size()));
    cloud.entries.push_back({x, v, 0, -1, -1});
  };
  add_seed(a, problem.A);
  add_seed(b, problem.B);

  gds::StateSpace space = gds::StateSpace::interval(a, b);
  auto coverage = [&] {
    std::vector<double> pts;
    pts.reserve(cloud.entries.size());
    for (const auto& e : cloud.entries) pts.push_back(e.point);
    return gds::cell_coverage(space, pts, eps);
  };
  cloud.coverage = coverage();

  for (int d = 1; d <= depth && !frontier.empty() && cloud.coverage < 1.0; ++d) {
    std::vector<int> next;
    for (int idx : frontier) {
      for (std::size_t r = 0; r < problem.rules.size(); ++r) {
        const CloudEntry src = cloud.entries[idx];
        double y = std::clamp(problem.rules[r].map(src.point), a, b);
        double v = step_value(problem.rules[r], src.point, src.value, problem.A, problem.B);
        std::int64_t c = cell_of(y);
        auto it = occupied.find(c);
        if (it != occupied.end()) {
          const CloudEntry& e = cloud.entries[it->second];
          if (std::fabs(e.point - y) <= 1e-12)
            cloud.collisions.push_back({y, e.value, v, std::fabs(e.value - v), d, it->second});
          continue;
        }
        if (cloud.entries.size() >= max_points) {
          cloud.partial = true;
          break;
        }
        occupied[c] = static_cast<int>(cloud.entries.size());
        next.push_back(static_cast<int>(cloud.entries.size()));
        cloud.entries.push_back({y, v, d, idx, static_cast<int>(r)});
      }
      if (cloud.partial) break;
    }
    cloud.depth_reached = d;
    frontier = std::move(next);
    cloud.coverage = coverage();
    if (cloud.partial) break;
  }
  return cloud;
}

double recompute(const OverdetProblem& problem, const PropagationCloud& cloud, std::size_t k) {
  std::vector<int> path;
  for (int i = static_cast<int>(k); i >= 0; i = cloud.entries[i].parent) path.push_back(i);
  std::reverse(path.begin(), path.end());
  const CloudEntry& seed = cloud.entries[path.front()];
  double x = seed.point;
  double v = seed.point == problem.a ? problem.A : problem.B;
  for (std::size_t j = 1; j < path.size(); ++j) {
    const PropagationRule& r = problem.rules[cloud.entries[path[j]].rule];
    v = step_value(r, x, v, problem.A, problem.B);
    x = std::clamp(r.map(x), problem.a, problem.b);
  }
  return v;
}

std::string PropagationCloud::to_csv() const {
  std::vector<const CloudEntry*> sorted;
  for (const auto& e : entries) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) { return x->point < y->point; });
  std::ostringstream os;
  os << "t,value,depth\n";
  for (auto* e : sorted) os << format_double(e->point) << ',' << format_double(e->value) << ',' << e->depth << '\n';
  return os.str();
}

ConsistencyReport check_consistency(const PropagationCloud& cloud, double eps, double tol) {
  ConsistencyReport rep;
  for (const auto& c : cloud.collisions) {
    rep.worst_gap = std::max(rep.worst_gap, c.gap);
    if (rep.consistent && !(c.gap < tol)) {
      rep.consistent = false;
      rep.reason = "collision";
      rep.witness = c.point;
    }
  }
  if (!rep.consistent) return rep;

  std::vector<std::pair<double, double>> pts;
  for (const auto& e : cloud.entries) pts.emplace_back(e.point, e.value);
  std::sort(pts.begin(), pts.end());
  std::vector<double> slopes;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    double dx = pts[k].first - pts[k - 1].first;
    if (dx > 0) slopes.push_back(std::fabs(pts[k].second - pts[k - 1].second) / dx);
  }
  if (slopes.empty()) return rep;
  std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2, slopes.end());
  double lip = slopes[slopes.size() / 2];
  rep.cap = 10.0 * lip * eps;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    double dx = pts[k].first - pts[k - 1].first;
    if (!(dx > 0 && dx < eps)) continue;
    double dv = std::fabs(pts[k].second - pts[k - 1].second);
    rep.modulus = std::max(rep.modulus, dv);
    if (rep.consistent && dv > rep.cap + tol) {
      rep.consistent = false;
      rep.reason = "modulus";
      rep.witness = pts[k].first;
    }
  }
  return rep;
}

}  // namespace guided::cauchy
