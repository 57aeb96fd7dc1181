#include "guided/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace guided {

namespace {

std::string join_expected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected,
                         const std::string& found)
    : Error("SyntaxError", ErrorCategory::Usage,
            "syntax error at offset " + std::to_string(offset) + ": expected one of {" +
                join_expected(expected) + "}, found " + found),
      offset_(offset),
      expected_(std::move(expected)) {}

DomainError::DomainError(const std::string& subexpression, double argument)
    : Error("DomainError", ErrorCategory::Numeric,
            "domain error in " + subexpression + " (argument " + std::to_string(argument) + ")"),
      subexpression_(subexpression) {}

}  // namespace guided

namespace guided::expr {

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
    case Func::Tanh: return "tanh";
    case Func::Sign: return "sign";
  }
  return "?";
}

namespace {

bool lookup_func(std::string_view name, Func& out) {
  static const std::array<Func, 9> all{Func::Sin,  Func::Cos, Func::Tan,  Func::Exp, Func::Log,
                                       Func::Sqrt, Func::Abs, Func::Tanh, Func::Sign};
  for (Func f : all) {
    if (name == func_name(f)) {
      out = f;
      return true;
    }
  }
  return false;
}

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr num(double v) {
  Node n;
  n.kind = Kind::Number;
  n.value = v;
  return make_node(std::move(n));
}

NodePtr constant(const std::string& name) {
  Node n;
  n.kind = Kind::Constant;
  n.name = name;
  n.value = name == "pi" ? std::numbers::pi : std::numbers::e;
  return make_node(std::move(n));
}

NodePtr variable(const std::string& name) {
  Node n;
  n.kind = Kind::Variable;
  n.name = name;
  return make_node(std::move(n));
}

NodePtr binary(Kind k, NodePtr a, NodePtr b) {
  Node n;
  n.kind = k;
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return make_node(std::move(n));
}

NodePtr neg_raw(NodePtr a) {
  Node n;
  n.kind = Kind::Neg;
  n.lhs = std::move(a);
  return make_node(std::move(n));
}

NodePtr call(Func f, NodePtr a) {
  Node n;
  n.kind = Kind::Call;
  n.func = f;
  n.lhs = std::move(a);
  return make_node(std::move(n));
}

bool is_num(const NodePtr& n, double v) { return n->kind == Kind::Number && n->value == v; }
bool is_num(const NodePtr& n) { return n->kind == Kind::Number; }

// Builders fold literal constants and drop neutral elements.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_num(a) && is_num(b)) return num(a->value + b->value);
  if (is_num(a, 0.0)) return b;
  if (is_num(b, 0.0)) return a;
  return binary(Kind::Add, std::move(a), std::move(b));
}

NodePtr neg(NodePtr a) {
  if (is_num(a)) return num(-a->value);
  if (a->kind == Kind::Neg) return a->lhs;
  return neg_raw(std::move(a));
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_num(a) && is_num(b)) return num(a->value - b->value);
  if (is_num(b, 0.0)) return a;
  if (is_num(a, 0.0)) return neg(std::move(b));
  return binary(Kind::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
  if (is_num(a) && is_num(b)) return num(a->value * b->value);
  if (is_num(a, 1.0)) return b;
  if (is_num(b, 1.0)) return a;
  return binary(Kind::Mul, std::move(a), std::move(b));
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_num(b, 1.0)) return a;
  if (is_num(a) && is_num(b) && b->value != 0.0) return num(a->value / b->value);
  if (is_num(a, 0.0) && !is_num(b, 0.0)) return num(0.0);
  return binary(Kind::Div, std::move(a), std::move(b));
}

NodePtr pow(NodePtr a, NodePtr b) {
  if (is_num(b, 0.0)) return num(1.0);
  if (is_num(b, 1.0)) return a;
  if (is_num(a) && is_num(b)) {
    double v = std::pow(a->value, b->value);
    if (std::isfinite(v)) return num(v);
  }
  return binary(Kind::Pow, std::move(a), std::move(b));
}

bool depends_on_variable(const NodePtr& n) {
  if (!n) return false;
  if (n->kind == Kind::Variable) return true;
  return depends_on_variable(n->lhs) || depends_on_variable(n->rhs);
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  Parser(std::string_view src, const std::string& var) : src_(src), var_(var) {}

  NodePtr parse() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    return e;
  }

 private:
  std::string_view src_;
  const std::string& var_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    skip_ws();
    std::string found = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    throw SyntaxError(pos_, std::move(expected), found);
  }

  static std::vector<std::string> operand_start() {
    return {"NUMBER", "IDENT", "'('", "'-'"};
  }

  NodePtr parse_expr() {
    NodePtr left = parse_term();
    for (;;) {
      char c = peek();
      if (c == '+' || c == '-') {
        ++pos_;
        NodePtr right = parse_term();
        left = binary(c == '+' ? Kind::Add : Kind::Sub, left, right);
      } else {
        return left;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr left = parse_factor();
    for (;;) {
      char c = peek();
      if (c == '*' || c == '/') {
        ++pos_;
        NodePtr right = parse_factor();
        left = binary(c == '*' ? Kind::Mul : Kind::Div, left, right);
      } else {
        return left;
      }
    }
  }

  NodePtr parse_factor() {
    if (peek() == '-') {
      ++pos_;
      return neg_raw(parse_factor());
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (peek() == '^') {
      ++pos_;
      NodePtr exponent = parse_factor();
      return binary(Kind::Pow, base, exponent);
    }
    return base;
  }

  NodePtr parse_atom() {
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string ident(src_.substr(start, pos_ - start));
      Func f;
      if (lookup_func(ident, f)) {
        if (peek() != '(') fail({"'('"});
        ++pos_;
        NodePtr arg = parse_expr();
        if (peek() != ')') fail({"')'", "'+'", "'-'", "'*'", "'/'", "'^'"});
        ++pos_;
        return call(f, arg);
      }
      if (ident == "pi" || ident == "e") return constant(ident);
      if (ident == var_) return variable(var_);
      pos_ = start;
      fail({"NUMBER", "'" + var_ + "'", "'pi'", "'e'", "function name", "'('"});
    }
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (peek() != ')') fail({"')'", "'+'", "'-'", "'*'", "'/'", "'^'"});
      ++pos_;
      return inner;
    }
    fail(operand_start());
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t int_digits = digits();
    std::size_t frac_digits = 0;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      frac_digits = digits();
    }
    if (int_digits + frac_digits == 0) {
      pos_ = start;
      fail({"NUMBER"});
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // 'e' belongs to the next token
    }
    double v = 0.0;
    std::string text(src_.substr(start, pos_ - start));
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail({"NUMBER"});
    }
    return num(v);
  }
};

// ---------------------------------------------------------------- printer

int precedence(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    case Kind::Number: return n->value < 0 || std::signbit(n->value) ? 3 : 5;
    default: return 5;
  }
}

void print(const NodePtr& n, std::string& out);

void print_wrapped(const NodePtr& n, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(n, out);
  if (wrap) out += ')';
}

void print(const NodePtr& n, std::string& out) {
  switch (n->kind) {
    case Kind::Number: out += format_number(n->value); return;
    case Kind::Constant:
    case Kind::Variable: out += n->name; return;
    case Kind::Call:
      out += func_name(n->func);
      out += '(';
      print(n->lhs, out);
      out += ')';
      return;
    case Kind::Neg:
      out += '-';
      print_wrapped(n->lhs, precedence(n->lhs) < 3, out);
      return;
    case Kind::Pow:
      print_wrapped(n->lhs, precedence(n->lhs) <= 4, out);
      out += '^';
      print_wrapped(n->rhs, precedence(n->rhs) < 5, out);
      return;
    default: {
      int p = precedence(n);
      char op = n->kind == Kind::Add ? '+' : n->kind == Kind::Sub ? '-' : n->kind == Kind::Mul ? '*' : '/';
      print_wrapped(n->lhs, precedence(n->lhs) < p, out);
      out += op;
      print_wrapped(n->rhs, precedence(n->rhs) <= p, out);
      return;
    }
  }
}

void print_tree(const NodePtr& n, std::string& out) {
  switch (n->kind) {
    case Kind::Number: out += format_number(n->value); return;
    case Kind::Constant: out += n->name; return;
    case Kind::Variable: out += "Var"; return;
    case Kind::Neg:
      out += "Neg(";
      print_tree(n->lhs, out);
      out += ')';
      return;
    case Kind::Call: {
      std::string name = func_name(n->func);
      name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
      out += name + "(";
      print_tree(n->lhs, out);
      out += ')';
      return;
    }
    default: {
      const char* label = n->kind == Kind::Add   ? "Add"
                          : n->kind == Kind::Sub ? "Sub"
                          : n->kind == Kind::Mul ? "Mul"
                          : n->kind == Kind::Div ? "Div"
                                                 : "Pow";
      out += label;
      out += '(';
      print_tree(n->lhs, out);
      out += ", ";
      print_tree(n->rhs, out);
      out += ')';
      return;
    }
  }
}

// ---------------------------------------------------------------- derivative

NodePtr d(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Number:
    case Kind::Constant: return num(0.0);
    case Kind::Variable: return num(1.0);
    case Kind::Add: return add(d(n->lhs), d(n->rhs));
    case Kind::Sub: return sub(d(n->lhs), d(n->rhs));
    case Kind::Neg: return neg(d(n->lhs));
    case Kind::Mul: return add(mul(d(n->lhs), n->rhs), mul(n->lhs, d(n->rhs)));
    case Kind::Div:
      if (!depends_on_variable(n->rhs)) return div(d(n->lhs), n->rhs);
      return div(sub(mul(d(n->lhs), n->rhs), mul(n->lhs, d(n->rhs))), pow(n->rhs, num(2.0)));
    case Kind::Pow: {
      const NodePtr& u = n->lhs;
      const NodePtr& v = n->rhs;
      if (!depends_on_variable(v)) {
        return mul(mul(v, pow(u, sub(v, num(1.0)))), d(u));
      }
      if (!depends_on_variable(u)) {
        return mul(mul(n, call(Func::Log, u)), d(v));
      }
      return mul(n, add(mul(d(v), call(Func::Log, u)), div(mul(v, d(u)), u)));
    }
    case Kind::Call: {
      const NodePtr& u = n->lhs;
      NodePtr du = d(u);
      switch (n->func) {
        case Func::Sin: return mul(call(Func::Cos, u), du);
        case Func::Cos: return mul(neg(call(Func::Sin, u)), du);
        case Func::Tan: return div(du, pow(call(Func::Cos, u), num(2.0)));
        case Func::Exp: return mul(call(Func::Exp, u), du);
        case Func::Log: return div(du, u);
        case Func::Sqrt: return div(du, mul(num(2.0), call(Func::Sqrt, u)));
        case Func::Abs: return mul(call(Func::Sign, u), du);
        case Func::Tanh: return mul(sub(num(1.0), pow(call(Func::Tanh, u), num(2.0))), du);
        case Func::Sign: return num(0.0);
      }
    }
  }
  return num(0.0);
}

NodePtr substitute(const NodePtr& n, const NodePtr& inner) {
  if (n->kind == Kind::Variable) return inner;
  if (!n->lhs) return n;
  Node copy = *n;
  copy.lhs = substitute(n->lhs, inner);
  if (n->rhs) copy.rhs = substitute(n->rhs, inner);
  return make_node(std::move(copy));
}

}  // namespace

// ---------------------------------------------------------------- evaluation

// Postfix program; evaluation avoids pointer chasing in hot loops.
struct Instr {
  Kind kind;
  Func func;
  double value;
  const Node* node;
};

struct Program {
  std::vector<Instr> code;
  std::size_t max_stack = 0;
};

namespace {

std::size_t emit(const NodePtr& n, std::vector<Instr>& code) {
  std::size_t depth = 1;
  if (n->lhs) depth = std::max(depth, emit(n->lhs, code));
  if (n->rhs) depth = std::max(depth, 1 + emit(n->rhs, code));
  code.push_back(Instr{n->kind, n->func, n->value, n.get()});
  return depth;
}

[[noreturn]] void domain_fail(const Node* node, double arg) {
  // The node is owned by the expression being evaluated, so aliasing is safe here.
  NodePtr alias(std::shared_ptr<const Node>(), node);
  throw DomainError(to_string(alias), arg);
}

}  // namespace

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string to_string(const NodePtr& node) {
  std::string out;
  print(node, out);
  return out;
}

Expression::Expression() : Expression(num(0.0), "t") {}

Expression::Expression(NodePtr root, std::string variable)
    : root_(std::move(root)), variable_(std::move(variable)) {
  auto prog = std::make_shared<Program>();
  prog->max_stack = emit(root_, prog->code);
  program_ = std::move(prog);
}

Expression Expression::parse(std::string_view source, const std::string& variable) {
  Func f;
  if (variable.empty() || variable == "pi" || variable == "e" || lookup_func(variable, f))
    throw SchemaError("invalid variable name '" + variable + "'");
  Parser p(source, variable);
  return Expression(p.parse(), variable);
}

Expression Expression::number(double v, const std::string& variable) {
  return Expression(num(v), variable);
}

Expression Expression::var(const std::string& variable) {
  return Expression(guided::expr::variable(variable), variable);
}

double Expression::eval(double x) const {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> inline_stack{};
  std::vector<double> heap;
  double* stack = inline_stack.data();
  if (program_->max_stack > kInline) {
    heap.resize(program_->max_stack);
    stack = heap.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : program_->code) {
    switch (in.kind) {
      case Kind::Number:
      case Kind::Constant: stack[sp++] = in.value; break;
      case Kind::Variable: stack[sp++] = x; break;
      case Kind::Neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Kind::Add: --sp; stack[sp - 1] += stack[sp]; break;
      case Kind::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
      case Kind::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
      case Kind::Div:
        --sp;
        if (stack[sp] == 0.0) domain_fail(in.node, stack[sp]);
        stack[sp - 1] /= stack[sp];
        break;
      case Kind::Pow: {
        --sp;
        double b = stack[sp - 1];
        double e = stack[sp];
        if (b < 0.0 && e != std::floor(e)) domain_fail(in.node, b);
        if (b == 0.0 && e < 0.0) domain_fail(in.node, b);
        stack[sp - 1] = std::pow(b, e);
        break;
      }
      case Kind::Call: {
        double& a = stack[sp - 1];
        switch (in.func) {
          case Func::Sin: a = std::sin(a); break;
          case Func::Cos: a = std::cos(a); break;
          case Func::Tan: a = std::tan(a); break;
          case Func::Exp: a = std::exp(a); break;
          case Func::Log:
            if (!(a > 0.0)) domain_fail(in.node, a);
            a = std::log(a);
            break;
          case Func::Sqrt:
            if (a < 0.0) domain_fail(in.node, a);
            a = std::sqrt(a);
            break;
          case Func::Abs: a = std::fabs(a); break;
          case Func::Tanh: a = std::tanh(a); break;
          case Func::Sign: a = a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); break;
        }
        break;
      }
    }
  }
  return stack[0];
}

Expression Expression::derivative() const { return Expression(d(root_), variable_); }

Expression Expression::compose(const Expression& inner) const {
  return Expression(substitute(root_, inner.root_), inner.variable_);
}

std::string Expression::str() const { return to_string(root_); }

std::string Expression::tree() const {
  std::string out;
  print_tree(root_, out);
  return out;
}

bool Expression::is_constant() const { return !depends_on_variable(root_); }

}  // namespace guided::expr
