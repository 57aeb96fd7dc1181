#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "guided/system.hpp"

namespace guided::gds {

// Uniform cells of a given width over the state space; the last cell may be partial.
class CellGrid {
 public:
  CellGrid(const StateSpace& space, double width);
  std::int64_t count() const { return count_; }
  double width() const { return width_; }
  std::int64_t index(double x) const;
  double lower(std::int64_t k) const;
  double upper(std::int64_t k) const;
  double center(std::int64_t k) const;

 private:
  StateSpace space_;
  double width_;
  std::int64_t count_;
};

struct OrbitCloud {
  std::vector<double> points;   // BFS order; points[0] is the seed
  std::vector<int> depth;       // layer of each point
  std::vector<int> parent;      // -1 for the seed
  std::vector<int> generator;   // generator used from parent, -1 for the seed
  double coverage = 0.0;        // fraction of eps-cells hit
  bool saturated = false;       // no new cell appeared in the last layer
  bool partial = false;         // point budget exhausted
  int depth_reached = 0;

  Orbit path_to(std::size_t k) const;
};

struct OrbitOptions {
  std::size_t max_points = 5'000'000;
  bool stop_at_full_coverage = false;
};

OrbitCloud guided_orbit_set(const GuidedSystem& sys, double x0, int depth, double eps,
                            const OrbitOptions& opts = {});

// Fraction of eps-cells containing at least one of the points.
double cell_coverage(const StateSpace& space, const std::vector<double>& points, double eps);

enum class MinimalityKind { MinimalEvidence, NotMinimal, Inconclusive };
const char* to_string(MinimalityKind k);

struct MinimalityVerdict {
  MinimalityKind kind = MinimalityKind::Inconclusive;
  double eps = 0.0;
  int depth = 0;
  double worst_coverage = 0.0;
  std::size_t seeds = 0;
  // NotMinimal only: a forward-closed proper set of eps-cells and the orbit points in it.
  std::vector<std::int64_t> witness_cells;
  std::vector<double> witness_points;
  double witness_seed = 0.0;
  std::string note;
};

MinimalityVerdict probe_minimality(const GuidedSystem& sys, double eps, int depth,
                                   const OrbitOptions& opts = {});

enum class AttractorKind { Yes, No, Inconclusive };
const char* to_string(AttractorKind k);

struct AttractorVerdict {
  AttractorKind kind = AttractorKind::Inconclusive;
  double x0 = 0.0;
  double eps = 0.0;
  int depth = 0;
  std::size_t seeds = 0;
  std::optional<double> witness_seed;  // a seed whose saturated cloud misses B(x0, eps)
  std::optional<std::int64_t> witness_cell;
};

AttractorVerdict probe_weak_attractor(const GuidedSystem& sys, double x0, double eps, int depth,
                                      const OrbitOptions& opts = {});

struct CycleReport {
  std::vector<Orbit> cycles;  // points.front() == points.back() up to tolerance
  int max_len = 0;
  std::size_t seeds = 0;
};

// Lambda-proper cycles lying entirely in the union of the guiding sets.
CycleReport find_guided_cycles(const GuidedSystem& sys, int max_len, double close_tol = 1e-9);

struct ContractionResult {
  bool certified = false;
  std::string failed_hypothesis;  // "unguided", "contraction", "range_cover"
  std::string detail;
  double lipschitz = 0.0;  // largest endpoint secant slope
  std::vector<ClosedInterval> ranges;
  int samples = 0;
};

ContractionResult check_contraction_minimality(const GuidedSystem& sys, int samples,
                                               std::uint64_t seed = 1);

struct ConjugacyReport {
  bool pass = false;
  bool invertible = true;
  double max_defect = 0.0;           // max d(phi(delta_i x), gamma_i(phi x))
  std::vector<double> guiding_defect;  // Hausdorff(phi(Lambda_i), Omega_i)
  double inverse_defect = 0.0;
  int properness_violations = 0;
  int orbits_checked = 0;
  int samples = 0;
};

ConjugacyReport verify_conjugacy(const GuidedSystem& a, const GuidedSystem& b, const ScalarMap& phi,
                                 const ScalarMap& phi_inv, int samples, std::uint64_t seed = 1,
                                 double tol = 1e-9);

// A random Lambda-proper orbit of the given length; stops early when no generator is allowed.
Orbit random_orbit(const GuidedSystem& sys, double x0, int length, std::mt19937_64& rng);

}  // namespace guided::gds
