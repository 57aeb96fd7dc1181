#include "guided/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "guided/errors.hpp"

namespace guided::gds {

StateSpace StateSpace::interval(double a, double b) {
  if (!(a < b)) throw SchemaError("interval requires a < b");
  StateSpace s;
  s.kind_ = Kind::Interval;
  s.lo_ = a;
  s.hi_ = b;
  return s;
}

StateSpace StateSpace::circle(double period) {
  if (!(period > 0)) throw SchemaError("circle period must be positive");
  StateSpace s;
  s.kind_ = Kind::Circle;
  s.lo_ = 0.0;
  s.hi_ = period;
  return s;
}

StateSpace StateSpace::graph(int nodes) {
  if (nodes <= 0) throw SchemaError("graph needs at least one node");
  StateSpace s;
  s.kind_ = Kind::FiniteGraph;
  s.lo_ = 0.0;
  s.hi_ = nodes - 1;
  s.nodes_ = nodes;
  return s;
}

double StateSpace::normalize(double x) const {
  if (kind_ != Kind::Circle) return x;
  double p = hi_;
  double r = std::fmod(x, p);
  if (r < 0) r += p;
  if (r >= p) r = 0.0;
  return r;
}

double StateSpace::distance(double x, double y) const {
  if (kind_ != Kind::Circle) return std::fabs(x - y);
  double r = normalize(x - y);
  return std::min(r, hi_ - r);
}

bool StateSpace::contains(double x, double tol) const {
  switch (kind_) {
    case Kind::Circle: return std::isfinite(x);
    case Kind::Interval: return x >= lo_ - tol && x <= hi_ + tol;
    case Kind::FiniteGraph: return x >= 0 && x < nodes_ && x == std::floor(x);
  }
  return false;
}

std::string StateSpace::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Interval: os << "interval[" << lo_ << ", " << hi_ << "]"; break;
    case Kind::Circle: os << "circle(period=" << hi_ << ")"; break;
    case Kind::FiniteGraph: os << "graph(" << nodes_ << ")"; break;
  }
  return os.str();
}

IntervalSet::IntervalSet(std::vector<ClosedInterval> parts) {
  for (auto& p : parts) {
    if (p.hi < p.lo) std::swap(p.lo, p.hi);
  }
  std::sort(parts.begin(), parts.end(),
            [](const ClosedInterval& a, const ClosedInterval& b) { return a.lo < b.lo; });
  for (const auto& p : parts) {
    if (!parts_.empty() && p.lo <= parts_.back().hi) {
      parts_.back().hi = std::max(parts_.back().hi, p.hi);
    } else {
      parts_.push_back(p);
    }
  }
}

IntervalSet IntervalSet::points(const std::vector<double>& pts) {
  std::vector<ClosedInterval> parts;
  for (double p : pts) parts.push_back({p, p});
  return IntervalSet(std::move(parts));
}

double IntervalSet::distance(double x, const StateSpace& space) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : parts_) {
    if (space.kind() == StateSpace::Kind::Circle) {
      double period = space.upper();
      double len = p.hi - p.lo;
      if (len >= period) return 0.0;
      double r = space.normalize(x - p.lo);
      if (r <= len) return 0.0;
      best = std::min(best, std::min(period - r, r - len));
    } else {
      if (x >= p.lo && x <= p.hi) return 0.0;
      best = std::min(best, x < p.lo ? p.lo - x : x - p.hi);
    }
  }
  return best;
}

namespace {

double directed_hausdorff(const IntervalSet& a, const IntervalSet& b, const StateSpace& space) {
  std::vector<double> gap_mids;
  const auto& bp = b.parts();
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) gap_mids.push_back(0.5 * (bp[k].hi + bp[k + 1].lo));
  if (space.kind() == StateSpace::Kind::Circle && !bp.empty())
    gap_mids.push_back(space.normalize(0.5 * (bp.back().hi + bp.front().lo + space.upper())));
  double worst = 0.0;
  for (const auto& p : a.parts()) {
    worst = std::max({worst, b.distance(p.lo, space), b.distance(p.hi, space)});
    for (double m : gap_mids) {
      if (IntervalSet({p}).distance(m, space) == 0.0) worst = std::max(worst, b.distance(m, space));
    }
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const IntervalSet& a, const IntervalSet& b, const StateSpace& space) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed_hausdorff(a, b, space), directed_hausdorff(b, a, space));
}

GuidedSystem::GuidedSystem(StateSpace space, std::vector<Generator> generators,
                           std::vector<IntervalSet> guiding, Tolerances tol,
                           std::vector<ScalarMap> coefficients)
    : space_(space),
      generators_(std::move(generators)),
      guiding_(std::move(guiding)),
      tol_(tol),
      coefficients_(std::move(coefficients)) {
  if (guiding_.empty()) guiding_.resize(generators_.size());
  validate();
}

GuidedSystem GuidedSystem::from_maps(StateSpace space, const std::vector<ScalarMap>& maps,
                                     std::vector<IntervalSet> guiding, Tolerances tol,
                                     std::vector<ScalarMap> coefficients) {
  std::vector<Generator> gens;
  int n = std::max(tol.validation_grid, 2);
  for (const auto& m : maps) {
    Generator g;
    g.map = m;
    bool nonneg = true;
    bool nonpos = true;
    for (int k = 0; k < n; ++k) {
      double x = space.lower() + space.length() * k / (n - 1);
      double d = m.derivative(x);
      if (d < -tol.step) nonneg = false;
      if (d > tol.step) nonpos = false;
    }
    g.monotone = nonneg || nonpos;
    gens.push_back(std::move(g));
  }
  return GuidedSystem(space, std::move(gens), std::move(guiding), tol, std::move(coefficients));
}

GuidedSystem GuidedSystem::from_tables(int nodes, const std::vector<std::vector<int>>& tables,
                                       const std::vector<std::vector<int>>& guiding_nodes) {
  std::vector<Generator> gens;
  for (const auto& t : tables) {
    Generator g;
    g.table = t;
    g.monotone = false;
    gens.push_back(std::move(g));
  }
  std::vector<IntervalSet> guiding;
  for (const auto& nodes_in : guiding_nodes) {
    std::vector<double> pts(nodes_in.begin(), nodes_in.end());
    guiding.push_back(IntervalSet::points(pts));
  }
  Tolerances tol;
  tol.lambda = 0.25;  // node indices are integers
  return GuidedSystem(StateSpace::graph(nodes), std::move(gens), std::move(guiding), tol);
}

void GuidedSystem::validate() const {
  if (generators_.empty()) throw SchemaError("a guided system needs at least one generator");
  if (guiding_.size() != generators_.size())
    throw SchemaError("one guiding set per generator is required");
  if (!coefficients_.empty() && coefficients_.size() != generators_.size())
    throw SchemaError("one coefficient per generator is required");

  if (space_.kind() == StateSpace::Kind::FiniteGraph) {
    for (std::size_t i = 0; i < generators_.size(); ++i) {
      const auto& t = generators_[i].table;
      if (static_cast<int>(t.size()) != space_.nodes())
        throw SchemaError("generator table " + std::to_string(i) + " has wrong length");
      for (int v : t)
        if (v < 0 || v >= space_.nodes())
          throw SchemaError("generator table " + std::to_string(i) + " leaves the graph");
    }
    for (int v = 0; v < space_.nodes(); ++v) {
      bool everywhere = true;
      for (const auto& g : guiding_) everywhere = everywhere && g.contains(v, space_, tol_.lambda);
      if (everywhere)
        throw HypothesisFailure("guiding sets share node " + std::to_string(v));
    }
    return;
  }

  // The intersection of all guiding sets must be empty.
  std::vector<ClosedInterval> common;
  bool first = true;
  for (const auto& g : guiding_) {
    std::vector<ClosedInterval> parts;
    for (auto p : g.parts()) {
      if (space_.kind() == StateSpace::Kind::Circle) {
        double period = space_.upper();
        double lo = space_.normalize(p.lo);
        double hi = lo + (p.hi - p.lo);
        if (p.hi - p.lo >= period) {
          parts.push_back({0.0, period});
        } else if (hi > period) {
          parts.push_back({lo, period});
          parts.push_back({0.0, hi - period});
        } else {
          parts.push_back({lo, hi});
        }
      } else {
        parts.push_back(p);
      }
    }
    if (first) {
      common = parts;
      first = false;
      continue;
    }
    std::vector<ClosedInterval> next;
    for (const auto& a : common)
      for (const auto& b : parts) {
        double lo = std::max(a.lo, b.lo);
        double hi = std::min(a.hi, b.hi);
        if (lo <= hi) next.push_back({lo, hi});
      }
    common = std::move(next);
  }
  if (!common.empty())
    throw HypothesisFailure("guiding sets have a common point near " + std::to_string(common[0].lo));

  int n = std::max(tol_.validation_grid, 2);
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    for (int k = 0; k < n; ++k) {
      double x = space_.lower() + space_.length() * k / (n - 1);
      double y = generators_[i].map(x);
      if (!space_.contains(y, tol_.step))
        throw HypothesisFailure("generator " + std::to_string(i) + " maps " + std::to_string(x) +
                                " outside the state space");
      if (!coefficients_.empty() && coefficients_[i](x) < -tol_.step)
        throw HypothesisFailure("coefficient " + std::to_string(i) + " is negative at " +
                                std::to_string(x));
    }
  }
}

bool GuidedSystem::unguided() const {
  return std::all_of(guiding_.begin(), guiding_.end(), [](const IntervalSet& g) { return g.empty(); });
}

double GuidedSystem::apply_raw(std::size_t i, double x) const {
  const Generator& g = generators_[i];
  if (space_.kind() == StateSpace::Kind::FiniteGraph) return g.table[static_cast<int>(x)];
  return g.map(x);
}

double GuidedSystem::apply(std::size_t i, double x) const {
  double y = apply_raw(i, x);
  if (space_.kind() == StateSpace::Kind::Interval) y = std::clamp(y, space_.lower(), space_.upper());
  return space_.normalize(y);
}

bool GuidedSystem::allowed(std::size_t i, double x) const {
  return guiding_[i].distance(x, space_) > tol_.lambda;
}

bool GuidedSystem::in_lambda(double x) const {
  for (std::size_t i = 0; i < guiding_.size(); ++i)
    if (!allowed(i, x)) return true;
  return false;
}

std::vector<int> allowed_generators(const GuidedSystem& sys, double x) {
  std::vector<int> out;
  for (std::size_t i = 0; i < sys.size(); ++i)
    if (sys.allowed(i, x)) out.push_back(static_cast<int>(i));
  return out;
}

int first_invalid_step(const GuidedSystem& sys, const Orbit& orbit) {
  if (orbit.points.size() != orbit.generators.size() + 1) return 0;
  for (std::size_t j = 0; j < orbit.generators.size(); ++j) {
    int i = orbit.generators[j];
    if (i < 0 || static_cast<std::size_t>(i) >= sys.size()) return static_cast<int>(j);
    if (!sys.allowed(i, orbit.points[j])) return static_cast<int>(j);
    double expected = sys.apply(i, orbit.points[j]);
    if (sys.space().distance(expected, orbit.points[j + 1]) > sys.tolerances().step)
      return static_cast<int>(j);
  }
  return -1;
}

}  // namespace guided::gds
