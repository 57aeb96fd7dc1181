#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "guided/errors.hpp"

namespace guided::expr {

enum class Kind { Number, Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh, Sign };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind = Kind::Number;
  double value = 0.0;  // Number literal, or the value of a named Constant
  std::string name;    // Constant or Variable name
  Func func = Func::Sin;
  NodePtr lhs;  // sole operand for Neg and Call
  NodePtr rhs;
};

const char* func_name(Func f);

struct Program;

// Immutable single-variable expression. Copies share the tree.
class Expression {
 public:
  Expression();

  static Expression parse(std::string_view source, const std::string& variable = "t");
  static Expression number(double v, const std::string& variable = "t");
  static Expression var(const std::string& variable = "t");

  double eval(double x) const;
  double operator()(double x) const { return eval(x); }

  // Symbolic derivative with constant folding only; no general simplification.
  Expression derivative() const;
  // this(inner(x)); the result uses inner's variable name.
  Expression compose(const Expression& inner) const;

  // Infix form that re-parses to an expression evaluating identically.
  std::string str() const;
  // Structural form, e.g. "Div(Add(Var, 1), 2)".
  std::string tree() const;

  bool is_constant() const;
  const std::string& variable() const { return variable_; }
  const NodePtr& root() const { return root_; }

  Expression(NodePtr root, std::string variable);

 private:
  NodePtr root_;
  std::string variable_;
  std::shared_ptr<const Program> program_;
};

std::string to_string(const NodePtr& node);
std::string format_number(double v);

}  // namespace guided::expr
