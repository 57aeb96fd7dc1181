#pragma once

#include <optional>
#include <string>
#include <vector>

#include "guided/scalar_map.hpp"

namespace guided::gds {

struct Tolerances {
  double lambda = 1e-9;  // guiding-set band
  double step = 1e-9;    // orbit step and range-escape slack
  double range = 1e-9;   // range-cover gaps
  int validation_grid = 1001;
};

class StateSpace {
 public:
  enum class Kind { Interval, Circle, FiniteGraph };

  static StateSpace interval(double a, double b);
  static StateSpace circle(double period);
  static StateSpace graph(int nodes);

  Kind kind() const { return kind_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  double length() const { return hi_ - lo_; }
  int nodes() const { return nodes_; }

  // Circle points live in [0, period); other spaces are unchanged.
  double normalize(double x) const;
  double distance(double x, double y) const;
  bool contains(double x, double tol) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Interval;
  double lo_ = 0.0;
  double hi_ = 1.0;
  int nodes_ = 0;
};

struct ClosedInterval {
  double lo;
  double hi;
};

// Finite union of closed intervals (arcs on a circle, node indices on a graph).
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<ClosedInterval> parts);
  static IntervalSet points(const std::vector<double>& pts);

  bool empty() const { return parts_.empty(); }
  const std::vector<ClosedInterval>& parts() const { return parts_; }
  double distance(double x, const StateSpace& space) const;
  bool contains(double x, const StateSpace& space, double tol) const {
    return distance(x, space) <= tol;
  }

 private:
  std::vector<ClosedInterval> parts_;
};

// sup over A of dist(., B) combined symmetrically; infinity when exactly one side is empty.
double hausdorff_distance(const IntervalSet& a, const IntervalSet& b, const StateSpace& space);

struct Generator {
  ScalarMap map;
  std::vector<int> table;  // FiniteGraph only
  bool monotone = true;
};

class GuidedSystem {
 public:
  GuidedSystem(StateSpace space, std::vector<Generator> generators,
               std::vector<IntervalSet> guiding, Tolerances tol = {},
               std::vector<ScalarMap> coefficients = {});

  static GuidedSystem from_maps(StateSpace space, const std::vector<ScalarMap>& maps,
                                std::vector<IntervalSet> guiding, Tolerances tol = {},
                                std::vector<ScalarMap> coefficients = {});
  static GuidedSystem from_tables(int nodes, const std::vector<std::vector<int>>& tables,
                                  const std::vector<std::vector<int>>& guiding_nodes);

  const StateSpace& space() const { return space_; }
  std::size_t size() const { return generators_.size(); }
  const Generator& generator(std::size_t i) const { return generators_[i]; }
  const IntervalSet& guiding(std::size_t i) const { return guiding_[i]; }
  const std::vector<IntervalSet>& guiding() const { return guiding_; }
  const Tolerances& tolerances() const { return tol_; }
  bool has_coefficients() const { return !coefficients_.empty(); }
  const ScalarMap& coefficient(std::size_t i) const { return coefficients_[i]; }
  bool unguided() const;

  double apply(std::size_t i, double x) const;
  // Unnormalized value; on a circle this is the lifted image.
  double apply_raw(std::size_t i, double x) const;
  bool allowed(std::size_t i, double x) const;
  bool in_lambda(double x) const;

 private:
  void validate() const;

  StateSpace space_;
  std::vector<Generator> generators_;
  std::vector<IntervalSet> guiding_;
  Tolerances tol_;
  std::vector<ScalarMap> coefficients_;
};

std::vector<int> allowed_generators(const GuidedSystem& sys, double x);

struct Orbit {
  std::vector<double> points;
  std::vector<int> generators;  // generators[j] maps points[j] to points[j+1]
};

// Index of the first bad step, or -1 when the orbit is Lambda-proper.
int first_invalid_step(const GuidedSystem& sys, const Orbit& orbit);

}  // namespace guided::gds
