#pragma once

#include <functional>
#include <optional>
#include <string>

#include "guided/expr.hpp"

namespace guided {

using RealFn = std::function<double(double)>;

// A real map with its derivative, backed either by an expression (derivatives are
// symbolic) or by callables (used for maps defined through inverse functions).
class ScalarMap {
 public:
  ScalarMap();
  explicit ScalarMap(expr::Expression e);
  static ScalarMap parse(const std::string& source, const std::string& variable = "t");
  static ScalarMap from_functions(RealFn f, RealFn df, std::string label, RealFn d2f = nullptr);

  double operator()(double x) const { return f_(x); }
  double derivative(double x) const { return df_(x); }
  bool has_second_derivative() const { return static_cast<bool>(d2f_); }
  double second_derivative(double x) const { return d2f_(x); }

  const std::optional<expr::Expression>& expression() const { return expr_; }
  const std::string& label() const { return label_; }

 private:
  std::optional<expr::Expression> expr_;
  RealFn f_;
  RealFn df_;
  RealFn d2f_;
  std::string label_;
};

// outer(inner(x)); symbolic when both sides are expressions, chain rule otherwise.
ScalarMap compose(const ScalarMap& outer, const ScalarMap& inner);

}  // namespace guided
