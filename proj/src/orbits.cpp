#include "guided/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "guided/errors.hpp"

namespace guided::gds {

CellGrid::CellGrid(const StateSpace& space, double width) : space_(space), width_(width) {
  if (space.kind() == StateSpace::Kind::FiniteGraph) {
    width_ = 1.0;
    count_ = space.nodes();
    return;
  }
  if (!(width > 0)) throw SchemaError("cell width must be positive");
  double n = std::ceil(space.length() / width - 1e-9);
  if (n > 2e8) throw BudgetExceeded("cell grid too fine: " + std::to_string(n) + " cells");
  count_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

std::int64_t CellGrid::index(double x) const {
  if (space_.kind() == StateSpace::Kind::FiniteGraph) return static_cast<std::int64_t>(std::lround(x));
  double r = space_.kind() == StateSpace::Kind::Circle ? space_.normalize(x) : x - space_.lower();
  auto k = static_cast<std::int64_t>(std::floor(r / width_));
  return std::clamp<std::int64_t>(k, 0, count_ - 1);
}

double CellGrid::lower(std::int64_t k) const {
  if (space_.kind() == StateSpace::Kind::FiniteGraph) return static_cast<double>(k);
  return space_.lower() + k * width_;
}

double CellGrid::upper(std::int64_t k) const {
  if (space_.kind() == StateSpace::Kind::FiniteGraph) return static_cast<double>(k);
  return std::min(space_.upper(), space_.lower() + (k + 1) * width_);
}

double CellGrid::center(std::int64_t k) const { return 0.5 * (lower(k) + upper(k)); }

Orbit OrbitCloud::path_to(std::size_t k) const {
  Orbit o;
  std::vector<std::size_t> chain;
  for (int j = static_cast<int>(k); j >= 0; j = parent[j]) chain.push_back(static_cast<std::size_t>(j));
  std::reverse(chain.begin(), chain.end());
  for (std::size_t idx = 0; idx < chain.size(); ++idx) {
    o.points.push_back(points[chain[idx]]);
    if (idx > 0) o.generators.push_back(generator[chain[idx]]);
  }
  return o;
}

double cell_coverage(const StateSpace& space, const std::vector<double>& points, double eps) {
  CellGrid grid(space, eps);
  std::vector<char> hit(static_cast<std::size_t>(grid.count()), 0);
  std::int64_t n = 0;
  for (double p : points) {
    auto k = grid.index(p);
    if (!hit[k]) {
      hit[k] = 1;
      ++n;
    }
  }
  return static_cast<double>(n) / static_cast<double>(grid.count());
}

namespace {

using StopFn = std::function<bool(double)>;

// Points are deduplicated on cells of eps / (2 * refine); coverage is measured on eps-cells.
OrbitCloud explore(const GuidedSystem& sys, double x0, int depth, double eps,
                   const OrbitOptions& opts, const StopFn& stop, bool& stopped, int refine = 1) {
  const StateSpace& space = sys.space();
  CellGrid dedup(space, space.kind() == StateSpace::Kind::FiniteGraph ? 1.0 : eps / (2 * refine));
  CellGrid cover(space, eps);
  std::vector<char> seen(static_cast<std::size_t>(dedup.count()), 0);
  std::vector<char> hit(static_cast<std::size_t>(cover.count()), 0);
  std::int64_t hits = 0;

  OrbitCloud cloud;
  stopped = false;
  auto accept = [&](double x, int d, int parent, int gen) {
    cloud.points.push_back(x);
    cloud.depth.push_back(d);
    cloud.parent.push_back(parent);
    cloud.generator.push_back(gen);
    auto c = cover.index(x);
    if (!hit[c]) {
      hit[c] = 1;
      ++hits;
    }
  };

  x0 = space.normalize(x0);
  seen[dedup.index(x0)] = 1;
  accept(x0, 0, -1, -1);
  if (stop && stop(x0)) stopped = true;

  std::size_t layer_begin = 0;
  int d = 0;
  while (!stopped && d < depth) {
    if (opts.stop_at_full_coverage && hits == cover.count()) break;
    std::size_t layer_end = cloud.points.size();
    if (layer_begin == layer_end) {
      cloud.saturated = true;
      break;
    }
    ++d;
    for (std::size_t k = layer_begin; k < layer_end && !stopped; ++k) {
      double p = cloud.points[k];
      for (std::size_t i = 0; i < sys.size(); ++i) {
        if (!sys.allowed(i, p)) continue;
        double q = sys.apply(i, p);
        auto c = dedup.index(q);
        if (seen[c]) continue;
        seen[c] = 1;
        if (cloud.points.size() >= opts.max_points) {
          cloud.partial = true;
          break;
        }
        accept(q, d, static_cast<int>(k), static_cast<int>(i));
        if (stop && stop(q)) {
          stopped = true;
          break;
        }
      }
      if (cloud.partial) break;
    }
    if (cloud.partial) break;
    layer_begin = layer_end;
  }
  if (!stopped && !cloud.partial && layer_begin == cloud.points.size()) cloud.saturated = true;
  cloud.depth_reached = d;
  cloud.coverage = static_cast<double>(hits) / static_cast<double>(cover.count());
  return cloud;
}

// One seed per eps-cell centre, then the interval endpoints and guiding-set endpoints, where
// invariant points the centres miss tend to sit.
std::vector<double> seeds_for(const GuidedSystem& sys, double eps) {
  const StateSpace& space = sys.space();
  CellGrid grid(space, eps);
  std::vector<double> seeds;
  for (std::int64_t k = 0; k < grid.count(); ++k) seeds.push_back(grid.center(k));
  if (space.kind() == StateSpace::Kind::FiniteGraph) return seeds;
  std::vector<double> extra;
  if (space.kind() == StateSpace::Kind::Interval) extra = {space.lower(), space.upper()};
  for (const auto& set : sys.guiding())
    for (const auto& part : set.parts()) {
      extra.push_back(space.normalize(part.lo));
      extra.push_back(space.normalize(part.hi));
    }
  std::sort(extra.begin(), extra.end());
  extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
  seeds.insert(seeds.end(), extra.begin(), extra.end());
  return seeds;
}

// Every allowed image of every point lies within tol of some point: a finite invariant set.
bool points_closed(const GuidedSystem& sys, const std::vector<double>& pts, double tol) {
  const StateSpace& space = sys.space();
  std::vector<double> sorted;
  for (double p : pts) sorted.push_back(space.normalize(p));
  std::sort(sorted.begin(), sorted.end());
  auto near = [&](double q) {
    q = space.normalize(q);
    auto it = std::lower_bound(sorted.begin(), sorted.end(), q);
    if (it != sorted.end() && space.distance(*it, q) <= tol) return true;
    if (it != sorted.begin() && space.distance(*std::prev(it), q) <= tol) return true;
    return space.distance(sorted.front(), q) <= tol || space.distance(sorted.back(), q) <= tol;
  };
  for (double p : pts)
    for (std::size_t i = 0; i < sys.size(); ++i)
      if (sys.allowed(i, p) && !near(sys.apply(i, p))) return false;
  return true;
}

// Every allowed image of every point falls in an eps-cell already holding a point.
bool cells_closed(const GuidedSystem& sys, const std::vector<double>& pts, const CellGrid& cover,
                  std::vector<char>& in_witness) {
  in_witness.assign(static_cast<std::size_t>(cover.count()), 0);
  for (double p : pts) in_witness[cover.index(p)] = 1;
  for (double p : pts)
    for (std::size_t i = 0; i < sys.size(); ++i)
      if (sys.allowed(i, p) && !in_witness[cover.index(sys.apply(i, p))]) return false;
  return true;
}

constexpr int kMaxRefine = 8;

}  // namespace

OrbitCloud guided_orbit_set(const GuidedSystem& sys, double x0, int depth, double eps,
                            const OrbitOptions& opts) {
  // A cloud that saturates short of full coverage may be an artifact of pruning: retry on finer
  // dedup cells before accepting it.
  bool stopped = false;
  OrbitCloud cloud = explore(sys, x0, depth, eps, opts, nullptr, stopped);
  const double closed_tol = 1e-9 * (1 + sys.space().length());
  for (int refine = 2; refine <= kMaxRefine && cloud.saturated && cloud.coverage < 1.0; refine *= 2) {
    if (points_closed(sys, cloud.points, closed_tol)) break;
    OrbitCloud finer = explore(sys, x0, depth, eps, opts, nullptr, stopped, refine);
    if (finer.coverage >= cloud.coverage) cloud = std::move(finer);
  }
  return cloud;
}

const char* to_string(MinimalityKind k) {
  switch (k) {
    case MinimalityKind::MinimalEvidence: return "MinimalEvidence";
    case MinimalityKind::NotMinimal: return "NotMinimal";
    case MinimalityKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* to_string(AttractorKind k) {
  switch (k) {
    case AttractorKind::Yes: return "Yes";
    case AttractorKind::No: return "No";
    case AttractorKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

MinimalityVerdict probe_minimality(const GuidedSystem& sys, double eps, int depth,
                                   const OrbitOptions& opts) {
  MinimalityVerdict v;
  v.eps = eps;
  v.depth = depth;
  v.worst_coverage = 1.0;
  OrbitOptions o = opts;
  o.stop_at_full_coverage = true;
  CellGrid cover(sys.space(), eps);
  double close_tol = 1e-9 * (1.0 + sys.space().length());
  bool all_full = true;
  for (double seed : seeds_for(sys, eps)) {
    ++v.seeds;
    // Deduplication can starve a dense orbit of a cell, so a closed-looking cloud that is not a
    // finite invariant set is re-explored at finer deduplication before it counts as a witness.
    bool stopped = false;
    OrbitCloud cloud;
    std::vector<char> in_witness;
    bool witness = false;
    for (int refine = 1; refine <= kMaxRefine; refine *= 2) {
      cloud = explore(sys, seed, depth, eps, o, nullptr, stopped, refine);
      if (cloud.coverage >= 1.0 || !cloud.saturated) break;
      if (!cells_closed(sys, cloud.points, cover, in_witness)) break;
      if (refine == kMaxRefine || points_closed(sys, cloud.points, close_tol)) {
        witness = true;
        break;
      }
    }
    v.worst_coverage = std::min(v.worst_coverage, cloud.coverage);
    if (cloud.coverage >= 1.0) continue;
    all_full = false;
    if (!witness) continue;
    v.kind = MinimalityKind::NotMinimal;
    for (std::int64_t k = 0; k < cover.count(); ++k)
      if (in_witness[k]) v.witness_cells.push_back(k);
    v.witness_points = cloud.points;
    std::sort(v.witness_points.begin(), v.witness_points.end());
    v.witness_seed = seed;
    v.note = "saturated orbit cloud is forward-closed and misses some cells";
    return v;
  }
  if (all_full) {
    v.kind = MinimalityKind::MinimalEvidence;
    v.note = "every seed reached full coverage";
  } else {
    v.kind = MinimalityKind::Inconclusive;
    v.note = "some seed stopped below full coverage without a closed witness";
  }
  return v;
}

AttractorVerdict probe_weak_attractor(const GuidedSystem& sys, double x0, double eps, int depth,
                                      const OrbitOptions& opts) {
  AttractorVerdict v;
  v.x0 = x0;
  v.eps = eps;
  v.depth = depth;
  const StateSpace& space = sys.space();
  StopFn near = [&](double x) { return space.distance(x, x0) < eps; };
  CellGrid grid(space, eps);
  bool unresolved = false;
  auto seeds = seeds_for(sys, eps);
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    ++v.seeds;
    bool stopped = false;
    OrbitCloud cloud;
    bool finite = false;
    for (int refine = 1; refine <= kMaxRefine && !finite; refine *= 2) {
      cloud = explore(sys, seeds[k], depth, eps, opts, near, stopped, refine);
      if (stopped || !cloud.saturated) break;
      finite = points_closed(sys, cloud.points, 1e-9 * (1.0 + space.length()));
    }
    if (stopped) continue;
    if (cloud.saturated) {
      v.kind = AttractorKind::No;
      v.witness_seed = seeds[k];
      v.witness_cell = grid.index(seeds[k]);
      return v;
    }
    unresolved = true;
  }
  v.kind = unresolved ? AttractorKind::Inconclusive : AttractorKind::Yes;
  return v;
}

namespace {

void canonicalize(Orbit& cycle) {
  // Rotate so the smallest point comes first; the closing point repeats it.
  std::size_t len = cycle.generators.size();
  std::size_t best = 0;
  for (std::size_t j = 1; j < len; ++j)
    if (cycle.points[j] < cycle.points[best]) best = j;
  Orbit out;
  for (std::size_t j = 0; j < len; ++j) {
    out.points.push_back(cycle.points[(best + j) % len]);
    out.generators.push_back(cycle.generators[(best + j) % len]);
  }
  out.points.push_back(out.points.front());
  cycle = std::move(out);
}

bool same_cycle(const Orbit& a, const Orbit& b, const StateSpace& space, double tol) {
  if (a.generators != b.generators) return false;
  for (std::size_t j = 0; j < a.points.size(); ++j)
    if (space.distance(a.points[j], b.points[j]) > tol) return false;
  return true;
}

}  // namespace

CycleReport find_guided_cycles(const GuidedSystem& sys, int max_len, double close_tol) {
  CycleReport report;
  report.max_len = max_len;
  const StateSpace& space = sys.space();
  std::vector<double> seeds;
  for (const auto& g : sys.guiding()) {
    for (const auto& p : g.parts()) {
      if (space.kind() == StateSpace::Kind::FiniteGraph) {
        for (double v = std::ceil(p.lo); v <= p.hi; v += 1.0) seeds.push_back(v);
      } else if (p.hi - p.lo <= sys.tolerances().lambda) {
        seeds.push_back(0.5 * (p.lo + p.hi));
      } else {
        for (int k = 0; k <= 8; ++k) seeds.push_back(p.lo + (p.hi - p.lo) * k / 8.0);
      }
    }
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  Orbit path;
  std::function<void(double)> dfs = [&](double seed) {
    double p = path.points.back();
    for (std::size_t i = 0; i < sys.size(); ++i) {
      if (!sys.allowed(i, p)) continue;
      double q = sys.apply(i, p);
      if (space.distance(q, seed) <= close_tol) {
        Orbit cycle = path;
        cycle.points.push_back(q);
        cycle.generators.push_back(static_cast<int>(i));
        canonicalize(cycle);
        bool dup = false;
        for (const auto& c : report.cycles) dup = dup || same_cycle(c, cycle, space, 1e-7);
        if (!dup) report.cycles.push_back(std::move(cycle));
        continue;
      }
      if (static_cast<int>(path.generators.size()) + 1 >= max_len) continue;
      if (!sys.in_lambda(q)) continue;
      path.points.push_back(q);
      path.generators.push_back(static_cast<int>(i));
      dfs(seed);
      path.points.pop_back();
      path.generators.pop_back();
    }
  };
  for (double s : seeds) {
    s = space.normalize(s);
    if (!sys.in_lambda(s)) continue;
    ++report.seeds;
    path = Orbit{{s}, {}};
    dfs(s);
  }
  std::sort(report.cycles.begin(), report.cycles.end(), [](const Orbit& a, const Orbit& b) {
    if (a.generators.size() != b.generators.size()) return a.generators.size() < b.generators.size();
    return a.points < b.points;
  });
  return report;
}

ContractionResult check_contraction_minimality(const GuidedSystem& sys, int samples,
                                               std::uint64_t seed) {
  ContractionResult r;
  r.samples = samples;
  const StateSpace& space = sys.space();
  if (space.kind() == StateSpace::Kind::FiniteGraph) {
    r.failed_hypothesis = "contraction";
    r.detail = "finite graphs carry no contraction structure";
    return r;
  }
  if (!sys.unguided()) {
    r.failed_hypothesis = "unguided";
    r.detail = "the criterion covers systems whose guiding sets are all empty";
    return r;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(space.lower(), space.upper());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    double a = space.lower();
    double b = space.upper();
    if (space.kind() == StateSpace::Kind::Interval)
      r.lipschitz = std::max(r.lipschitz, std::fabs(sys.apply_raw(i, b) - sys.apply_raw(i, a)) / (b - a));
    for (int s = 0; s < samples; ++s) {
      double x = u(rng);
      double y = u(rng);
      double dxy = space.distance(x, y);
      if (dxy == 0.0) continue;
      double dimg = space.distance(sys.apply(i, x), sys.apply(i, y));
      if (!(dimg < dxy)) {
        r.failed_hypothesis = "contraction";
        r.detail = "generator " + std::to_string(i) + " does not contract the pair (" +
                   std::to_string(x) + ", " + std::to_string(y) + ")";
        return r;
      }
    }
  }

  int n = std::max(sys.tolerances().validation_grid, 2);
  std::vector<ClosedInterval> images;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (sys.generator(i).monotone && space.kind() == StateSpace::Kind::Interval) {
      double ya = sys.apply(i, space.lower());
      double yb = sys.apply(i, space.upper());
      lo = std::min(ya, yb);
      hi = std::max(ya, yb);
    } else {
      for (int k = 0; k < n; ++k) {
        double y = sys.apply(i, space.lower() + space.length() * k / (n - 1));
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
    images.push_back({lo, hi});
  }
  r.ranges = images;
  IntervalSet uni(images);
  double tol = sys.tolerances().range;
  double cursor = space.lower();
  for (const auto& p : uni.parts()) {
    if (p.lo > cursor + tol) break;
    cursor = std::max(cursor, p.hi);
  }
  if (cursor < space.upper() - tol) {
    r.failed_hypothesis = "range_cover";
    r.detail = "generator ranges leave a gap after " + std::to_string(cursor);
    return r;
  }
  r.certified = true;
  return r;
}

Orbit random_orbit(const GuidedSystem& sys, double x0, int length, std::mt19937_64& rng) {
  Orbit o;
  o.points.push_back(sys.space().normalize(x0));
  for (int j = 0; j < length; ++j) {
    auto allowed = allowed_generators(sys, o.points.back());
    if (allowed.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
    int i = allowed[pick(rng)];
    o.points.push_back(sys.apply(i, o.points.back()));
    o.generators.push_back(i);
  }
  return o;
}

ConjugacyReport verify_conjugacy(const GuidedSystem& a, const GuidedSystem& b, const ScalarMap& phi,
                                 const ScalarMap& phi_inv, int samples, std::uint64_t seed,
                                 double tol) {
  if (a.size() != b.size()) throw SchemaError("conjugated systems need the same number of generators");
  ConjugacyReport r;
  r.samples = samples;
  const StateSpace& sa = a.space();
  const StateSpace& sb = b.space();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(sa.lower(), sa.upper());
  for (int s = 0; s < samples; ++s) {
    double x = s == 0 ? sa.lower() : (s == 1 && sa.kind() == StateSpace::Kind::Interval ? sa.upper() : u(rng));
    double y = sb.normalize(phi(x));
    r.inverse_defect = std::max(r.inverse_defect, sa.distance(sa.normalize(phi_inv(y)), x));
    for (std::size_t i = 0; i < a.size(); ++i) {
      double lhs = sb.normalize(phi(a.apply(i, x)));
      double rhs = b.apply(i, y);
      r.max_defect = std::max(r.max_defect, sb.distance(lhs, rhs));
    }
  }
  if (r.inverse_defect > tol) {
    r.invertible = false;
    throw NotInvertible("phi_inv(phi(x)) differs from x by " + std::to_string(r.inverse_defect));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<ClosedInterval> parts;
    for (const auto& p : a.guiding(i).parts()) {
      double lo = phi(p.lo);
      double hi = phi(p.hi);
      parts.push_back({std::min(lo, hi), std::max(lo, hi)});
    }
    r.guiding_defect.push_back(hausdorff_distance(IntervalSet(parts), b.guiding(i), sb));
  }
  for (int k = 0; k < 100; ++k) {
    Orbit o = random_orbit(a, u(rng), 20, rng);
    ++r.orbits_checked;
    for (std::size_t j = 0; j < o.generators.size(); ++j) {
      double y = sb.normalize(phi(o.points[j]));
      if (!b.allowed(o.generators[j], y)) {
        ++r.properness_violations;
        break;
      }
    }
  }
  bool guiding_ok = std::all_of(r.guiding_defect.begin(), r.guiding_defect.end(),
                                [tol](double d) { return d <= tol; });
  r.pass = r.max_defect <= tol && guiding_ok && r.properness_violations == 0;
  return r;
}

}  // namespace guided::gds
