#include "guided/scalar_map.hpp"

namespace guided {

ScalarMap::ScalarMap() : ScalarMap(expr::Expression::var("t")) {}

ScalarMap::ScalarMap(expr::Expression e) : expr_(e), label_(e.str()) {
  expr::Expression de = e.derivative();
  expr::Expression d2e = de.derivative();
  f_ = [e](double x) { return e.eval(x); };
  df_ = [de](double x) { return de.eval(x); };
  d2f_ = [d2e](double x) { return d2e.eval(x); };
}

ScalarMap ScalarMap::parse(const std::string& source, const std::string& variable) {
  return ScalarMap(expr::Expression::parse(source, variable));
}

ScalarMap ScalarMap::from_functions(RealFn f, RealFn df, std::string label, RealFn d2f) {
  ScalarMap m;
  m.expr_.reset();
  m.f_ = std::move(f);
  m.df_ = std::move(df);
  m.d2f_ = std::move(d2f);
  m.label_ = std::move(label);
  return m;
}

ScalarMap compose(const ScalarMap& outer, const ScalarMap& inner) {
  if (outer.expression() && inner.expression())
    return ScalarMap(outer.expression()->compose(*inner.expression()));
  ScalarMap o = outer;
  ScalarMap i = inner;
  return ScalarMap::from_functions([o, i](double x) { return o(i(x)); },
                                   [o, i](double x) { return o.derivative(i(x)) * i.derivative(x); },
                                   outer.label() + " o " + inner.label());
}

}  // namespace guided
