#include "guided/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "guided/errors.hpp"

namespace guided {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

GridFunction::GridFunction(gds::StateSpace space, int intervals, std::vector<double> values, double slack,
                           Interpolation interp)
    : space_(space), m_(intervals), values_(std::move(values)), slack_(slack), interp_(interp) {
  if (space_.kind() == gds::StateSpace::Kind::FiniteGraph)
    throw SchemaError("grid functions live on intervals or circles");
  if (m_ < 1) throw SchemaError("grid needs at least one interval");
  if (interp_ == Interpolation::Cubic && m_ < 3) throw SchemaError("cubic interpolation needs three intervals");
  if (static_cast<int>(values_.size()) != m_ + 1) throw SchemaError("grid value count must be M+1");
  if (space_.kind() == gds::StateSpace::Kind::Circle) values_[m_] = values_[0];
}

GridFunction GridFunction::sample(const gds::StateSpace& space, int intervals, const RealFn& f) {
  std::vector<double> vals(intervals + 1);
  GridFunction shape(space, intervals, std::vector<double>(intervals + 1, 0.0));
  for (int j = 0; j <= intervals; ++j) vals[j] = f(shape.node(j));
  return GridFunction(space, intervals, std::move(vals));
}

GridFunction GridFunction::zero(const gds::StateSpace& space, int intervals) {
  return GridFunction(space, intervals, std::vector<double>(intervals + 1, 0.0));
}

double GridFunction::node(int j) const {
  if (j == m_) return space_.upper();
  return space_.lower() + space_.length() * j / m_;
}

void GridFunction::locate(double x, int& k, double& w) const {
  double a = space_.lower();
  double h = step();
  if (space_.kind() == gds::StateSpace::Kind::Circle) {
    x = space_.normalize(x);
  } else {
    if (x < a - slack_ || x > space_.upper() + slack_)
      throw MapEscape("query " + format_double(x) + " outside " + space_.describe());
    x = std::clamp(x, a, space_.upper());
  }
  double s = (x - a) / h;
  k = static_cast<int>(std::floor(s));
  if (k >= m_) k = m_ - 1;
  if (k < 0) k = 0;
  w = s - k;
}

int GridFunction::stencil(double x, StencilPoint out[4]) const {
  int k;
  double w;
  locate(x, k, w);
  if (interp_ == Interpolation::Linear) {
    out[0] = {k, 1.0 - w};
    out[1] = {k + 1, w};
    return 2;
  }
  // Nodes k-1..k+2 around the cell, shifted inward at interval ends; wrapped on a circle.
  int k0 = k - 1;
  bool periodic = space_.kind() == gds::StateSpace::Kind::Circle;
  if (!periodic) k0 = std::clamp(k0, 0, m_ - 3);
  double s = (k - k0) + w;  // position relative to node k0
  for (int i = 0; i < 4; ++i) {
    double l = 1.0;
    for (int q = 0; q < 4; ++q)
      if (q != i) l *= (s - q) / static_cast<double>(i - q);
    int node = k0 + i;
    if (periodic) node = ((node % m_) + m_) % m_;
    out[i] = {node, l};
  }
  return 4;
}

double GridFunction::operator()(double x) const {
  StencilPoint st[4];
  int n = stencil(x, st);
  double v = 0.0;
  for (int i = 0; i < n; ++i) v += st[i].weight * values_[st[i].node];
  return v;
}

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::fabs(v));
  return s;
}

std::string GridFunction::to_csv() const {
  std::ostringstream os;
  os << "t,value\n";
  for (int j = 0; j <= m_; ++j) os << format_double(node(j)) << ',' << format_double(values_[j]) << '\n';
  return os.str();
}

double sup_distance(const GridFunction& f, const RealFn& g) {
  double s = 0.0;
  for (int j = 0; j <= f.intervals(); ++j) s = std::max(s, std::fabs(f[j] - g(f.node(j))));
  return s;
}

}  // namespace guided
