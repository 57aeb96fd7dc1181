#include "guided/orbit_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "guided/errors.hpp"

namespace guided::gds {

namespace {

bool cell_inside_band(const IntervalSet& lambda, const StateSpace& space, double lo, double hi,
                      double tol) {
  for (const auto& p : lambda.parts()) {
    if (space.kind() == StateSpace::Kind::Circle) {
      double period = space.upper();
      double start = space.normalize(lo - (p.lo - tol));
      if (start + (hi - lo) <= (p.hi - p.lo) + 2 * tol || (p.hi - p.lo) + 2 * tol >= period) return true;
    } else if (lo >= p.lo - tol && hi <= p.hi + tol) {
      return true;
    }
  }
  return false;
}

// Cells meeting [lo, hi] (lifted coordinates on a circle) in more than a sliver.
void cells_meeting(const StateSpace& space, double width, int cells, double lo, double hi,
                   std::vector<int>& out) {
  double sliver = 1e-9 * width;
  double base = space.lower();
  if (hi - lo <= sliver) {
    double x = space.normalize(0.5 * (lo + hi));
    int k = static_cast<int>(std::floor((x - base) / width));
    out.push_back(std::clamp(k, 0, cells - 1));
    return;
  }
  long first = static_cast<long>(std::floor((lo - base + sliver) / width));
  long last = static_cast<long>(std::ceil((hi - base - sliver) / width)) - 1;
  for (long k = first; k <= last; ++k) {
    long idx = k;
    if (space.kind() == StateSpace::Kind::Circle) {
      idx = ((k % cells) + cells) % cells;
    } else {
      idx = std::clamp<long>(k, 0, cells - 1);
    }
    out.push_back(static_cast<int>(idx));
  }
}

}  // namespace

OrbitGraph build_orbit_graph(const GuidedSystem& sys, int cells) {
  OrbitGraph g;
  const StateSpace& space = sys.space();
  if (space.kind() == StateSpace::Kind::FiniteGraph) {
    g.nodes = space.nodes();
    g.cell_width = 1.0;
    for (int v = 0; v < g.nodes; ++v)
      for (std::size_t i = 0; i < sys.size(); ++i)
        if (sys.allowed(i, v)) g.edges.push_back({v, sys.generator(i).table[v], static_cast<int>(i)});
  } else {
    if (cells <= 0) throw SchemaError("cell count must be positive");
    g.nodes = cells;
    double width = space.length() / cells;
    g.cell_width = width;
    double tol = sys.tolerances().lambda;
    std::vector<int> hit;
    for (int c = 0; c < cells; ++c) {
      double lo = space.lower() + c * width;
      double hi = c + 1 == cells ? space.upper() : space.lower() + (c + 1) * width;
      for (std::size_t i = 0; i < sys.size(); ++i) {
        if (cell_inside_band(sys.guiding(i), space, lo, hi, tol)) continue;
        double ilo;
        double ihi;
        if (sys.generator(i).monotone) {
          double a = sys.apply_raw(i, lo);
          double b = sys.apply_raw(i, hi);
          ilo = std::min(a, b);
          ihi = std::max(a, b);
          if (space.kind() == StateSpace::Kind::Interval) {
            ilo = std::clamp(ilo, space.lower(), space.upper());
            ihi = std::clamp(ihi, space.lower(), space.upper());
          }
        } else {
          g.approximate = true;
          ilo = std::numeric_limits<double>::infinity();
          ihi = -ilo;
          for (int s = 0; s <= 8; ++s) {
            double y = sys.apply(i, lo + (hi - lo) * s / 8.0);
            ilo = std::min(ilo, y);
            ihi = std::max(ihi, y);
          }
        }
        hit.clear();
        cells_meeting(space, width, cells, ilo, ihi, hit);
        for (int dst : hit) g.edges.push_back({c, dst, static_cast<int>(i)});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

std::vector<std::vector<int>> minimal_subsystems(const OrbitGraph& graph) {
  int n = graph.nodes;
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : graph.edges) adj[e.src].push_back(e.dst);

  // Iterative Tarjan; comp[v] is the SCC id once v is finished.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::pair<int, std::size_t>> call;
  int counter = 0;
  int ncomp = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < adj[v].size()) {
        int w = adj[v][next++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      int finished = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }

  std::vector<char> leaves(ncomp, 0);
  for (const auto& e : graph.edges)
    if (comp[e.src] != comp[e.dst]) leaves[comp[e.src]] = 1;
  std::vector<std::vector<int>> members(ncomp);
  for (int v = 0; v < n; ++v) members[comp[v]].push_back(v);
  std::vector<std::vector<int>> out;
  for (int c = 0; c < ncomp; ++c)
    if (!leaves[c]) out.push_back(members[c]);
  std::sort(out.begin(), out.end());
  return out;
}

std::string edge_list(const OrbitGraph& graph) {
  std::ostringstream os;
  for (const auto& e : graph.edges) os << e.src << ' ' << e.dst << ' ' << e.gen << '\n';
  return os.str();
}

}  // namespace guided::gds
