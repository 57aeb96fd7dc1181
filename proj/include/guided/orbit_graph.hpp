#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guided/system.hpp"

namespace guided::gds {

struct Edge {
  int src;
  int dst;
  int gen;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct OrbitGraph {
  int nodes = 0;
  std::vector<Edge> edges;  // sorted, no duplicates
  bool approximate = false; // some non-monotone image was sampled
  double cell_width = 0.0;
};

// Cells of equal width; a generator contributes no edges from a cell that lies inside its
// guiding band. Finite graphs use their own nodes and ignore `cells`.
OrbitGraph build_orbit_graph(const GuidedSystem& sys, int cells);

// Terminal strongly connected components, each sorted, listed in ascending order.
std::vector<std::vector<int>> minimal_subsystems(const OrbitGraph& graph);

std::string edge_list(const OrbitGraph& graph);

}  // namespace guided::gds
