#pragma once

#include <string>
#include <vector>

#include "guided/scalar_map.hpp"
#include "guided/system.hpp"

namespace guided {

enum class Interpolation { Linear, Cubic };

struct StencilPoint {
  int node;
  double weight;
};

// Function on M+1 uniform nodes, piecewise-linear unless built as Cubic (4-point Lagrange).
// On a circle the last node coincides with the first and values wrap; on an interval queries up
// to `slack` outside are clamped.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(gds::StateSpace space, int intervals, std::vector<double> values, double slack = 1e-9,
               Interpolation interp = Interpolation::Linear);
  static GridFunction sample(const gds::StateSpace& space, int intervals, const RealFn& f);
  static GridFunction zero(const gds::StateSpace& space, int intervals);

  const gds::StateSpace& space() const { return space_; }
  int intervals() const { return m_; }
  double step() const { return space_.length() / m_; }
  double node(int j) const;
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](int j) const { return values_[j]; }

  // Throws MapEscape for interval queries outside [a - slack, b + slack].
  double operator()(double x) const;

  // Node k and weight w with x = (1 - w) t_k + w t_{k+1}, 0 <= w <= 1.
  void locate(double x, int& k, double& w) const;
  // Nodes and weights with f(x) = sum weight * f[node]; returns the number of points used.
  int stencil(double x, StencilPoint out[4]) const;
  Interpolation interpolation() const { return interp_; }

  double sup_norm() const;
  std::string to_csv() const;

 private:
  gds::StateSpace space_ = gds::StateSpace::interval(0, 1);
  int m_ = 1;
  std::vector<double> values_{0.0, 0.0};
  double slack_ = 1e-9;
  Interpolation interp_ = Interpolation::Linear;
};

double sup_distance(const GridFunction& f, const RealFn& g);
std::string format_double(double v);

}  // namespace guided
