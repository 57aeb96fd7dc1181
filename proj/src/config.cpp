#include "guided/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace guided::config {

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

void check_keys(const json& obj, const std::string& ptr, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw SchemaError((ptr.empty() ? "/" : ptr) + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw SchemaError("unknown key " + child(ptr, key));
}

const json& require(const json& obj, const std::string& key, const std::string& ptr) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError("missing key " + child(ptr, key));
  return *it;
}

expr::Expression parse_expr(const json& v, const std::string& variable, const std::string& ptr) {
  std::string src;
  if (v.is_string())
    src = v.get<std::string>();
  else if (v.is_number())
    src = expr::format_number(v.get<double>());
  else
    throw SchemaError(ptr + ": expected an expression string");
  try {
    return expr::Expression::parse(src, variable);
  } catch (const SyntaxError& e) {
    throw ExpressionError(ptr, e.offset(), e.what());
  }
}

double number(const json& v, const std::string& ptr) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    auto e = parse_expr(v, "t", ptr);
    if (!e.is_constant()) throw SchemaError(ptr + ": expected a constant");
    return e.eval(0.0);
  }
  throw SchemaError(ptr + ": expected a number");
}

double number_or(const json& obj, const std::string& key, const std::string& ptr, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, child(ptr, key));
}

int integer(const json& v, const std::string& ptr) {
  if (!v.is_number_integer()) throw SchemaError(ptr + ": expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& ptr) {
  if (!v.is_string()) throw SchemaError(ptr + ": expected a string");
  return v.get<std::string>();
}

const json& array(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw SchemaError(ptr + ": expected an array");
  return v;
}

std::vector<double> numbers(const json& v, const std::string& ptr) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(v, ptr).size(); ++i) out.push_back(number(v[i], child(ptr, i)));
  return out;
}

Eigen::VectorXd vector(const json& v, const std::string& ptr) {
  auto xs = numbers(v, ptr);
  if (xs.empty()) throw SchemaError(ptr + ": empty vector");
  return Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Eigen::MatrixXd matrix(const json& v, const std::string& ptr) {
  const json& rows = array(v, ptr);
  if (rows.empty()) throw SchemaError(ptr + ": empty matrix");
  std::size_t n = array(rows[0], child(ptr, 0)).size();
  Eigen::MatrixXd m(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto row = numbers(rows[i], child(ptr, i));
    if (row.size() != n) throw SchemaError(child(ptr, i) + ": ragged matrix");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
  }
  return m;
}

gds::StateSpace parse_space(const json& v, const std::string& ptr) {
  check_keys(v, ptr, {"kind", "a", "b", "period", "nodes"});
  std::string kind = text(require(v, "kind", ptr), child(ptr, "kind"));
  if (kind == "interval") {
    check_keys(v, ptr, {"kind", "a", "b"});
    return gds::StateSpace::interval(number(require(v, "a", ptr), child(ptr, "a")),
                                     number(require(v, "b", ptr), child(ptr, "b")));
  }
  if (kind == "circle") {
    check_keys(v, ptr, {"kind", "period"});
    return gds::StateSpace::circle(number(require(v, "period", ptr), child(ptr, "period")));
  }
  if (kind == "graph") {
    check_keys(v, ptr, {"kind", "nodes"});
    return gds::StateSpace::graph(integer(require(v, "nodes", ptr), child(ptr, "nodes")));
  }
  throw SchemaError(child(ptr, "kind") + ": unknown space kind '" + kind + "'");
}

// Each entry is a point or a [lo, hi] pair.
gds::IntervalSet parse_set(const json& v, const std::string& ptr) {
  std::vector<gds::ClosedInterval> parts;
  for (std::size_t k = 0; k < array(v, ptr).size(); ++k) {
    const json& e = v[k];
    std::string p = child(ptr, k);
    if (e.is_array()) {
      if (e.size() != 2) throw SchemaError(p + ": an interval needs two endpoints");
      double lo = number(e[0], child(p, 0));
      double hi = number(e[1], child(p, 1));
      if (lo > hi) throw SchemaError(p + ": interval endpoints out of order");
      parts.push_back({lo, hi});
    } else {
      double x = number(e, p);
      parts.push_back({x, x});
    }
  }
  return gds::IntervalSet(std::move(parts));
}

struct SystemParts {
  std::optional<gds::StateSpace> space;
  std::vector<ScalarMap> maps;
  std::vector<std::vector<int>> tables;
  std::optional<std::vector<gds::IntervalSet>> guiding;
  std::vector<std::vector<int>> guiding_nodes;
};

SystemParts parse_system_parts(const json& doc, const std::string& ptr, const std::string& variable) {
  SystemParts s;
  if (auto it = doc.find("space"); it != doc.end()) s.space = parse_space(*it, child(ptr, "space"));
  bool graph = s.space && s.space->kind() == gds::StateSpace::Kind::FiniteGraph;
  if (auto it = doc.find("maps"); it != doc.end()) {
    std::string mp = child(ptr, "maps");
    for (std::size_t i = 0; i < array(*it, mp).size(); ++i) {
      const json& m = (*it)[i];
      if (graph) {
        std::vector<int> table;
        for (std::size_t k = 0; k < array(m, child(mp, i)).size(); ++k)
          table.push_back(integer(m[k], child(child(mp, i), k)));
        s.tables.push_back(std::move(table));
      } else {
        s.maps.emplace_back(parse_expr(m, variable, child(mp, i)));
      }
    }
  }
  if (auto it = doc.find("guiding"); it != doc.end()) {
    std::string gp = child(ptr, "guiding");
    std::vector<gds::IntervalSet> sets;
    for (std::size_t i = 0; i < array(*it, gp).size(); ++i) {
      if (graph) {
        std::vector<int> nodes;
        for (std::size_t k = 0; k < array((*it)[i], child(gp, i)).size(); ++k)
          nodes.push_back(integer((*it)[i][k], child(child(gp, i), k)));
        s.guiding_nodes.push_back(std::move(nodes));
      } else {
        sets.push_back(parse_set((*it)[i], child(gp, i)));
      }
    }
    if (!graph) s.guiding = std::move(sets);
  }
  return s;
}

gds::GuidedSystem assemble(const SystemParts& s, const gds::Tolerances& tol, const std::vector<ScalarMap>& coeffs,
                           const std::string& where) {
  if (!s.space) throw SchemaError("missing key " + where + "/space");
  if (s.space->kind() == gds::StateSpace::Kind::FiniteGraph) {
    auto nodes = s.guiding_nodes;
    nodes.resize(s.tables.size());
    return gds::GuidedSystem::from_tables(s.space->nodes(), s.tables, nodes);
  }
  if (s.maps.empty()) throw SchemaError("missing key " + where + "/maps");
  std::vector<gds::IntervalSet> guiding = s.guiding.value_or(std::vector<gds::IntervalSet>(s.maps.size()));
  if (guiding.size() != s.maps.size())
    throw SchemaError(where + "/guiding: one set per map is required");
  if (!coeffs.empty() && coeffs.size() != s.maps.size())
    throw SchemaError(where + "/coeffs: one coefficient per map is required");
  return gds::GuidedSystem::from_maps(*s.space, s.maps, std::move(guiding), tol, coeffs);
}

cauchy::SeparableMap parse_separable(const json& v, const std::vector<std::string>& vars, const std::string& ptr) {
  cauchy::SeparableMap out;
  for (std::size_t i = 0; i < array(v, ptr).size(); ++i) {
    std::string rp = child(ptr, i);
    if (array(v[i], rp).size() != vars.size()) throw SchemaError(rp + ": one term per variable is required");
    std::vector<expr::Expression> row;
    for (std::size_t j = 0; j < vars.size(); ++j) row.push_back(parse_expr(v[i][j], vars[j], child(rp, j)));
    out.comp.push_back(std::move(row));
  }
  if (out.comp.size() != vars.size()) throw SchemaError(ptr + ": one row per variable is required");
  return out;
}

Problem parse_problem(const json& p, const std::string& kind, const std::string& variable, const std::string& ptr,
                      const gds::Tolerances& tol) {
  auto expr_or = [&](const char* key, const std::string& var) -> std::optional<expr::Expression> {
    auto it = p.find(key);
    if (it == p.end()) return std::nullopt;
    return parse_expr(*it, var, child(ptr, key));
  };
  auto req_expr = [&](const char* key, const std::string& var) {
    return parse_expr(require(p, key, ptr), var, child(ptr, key));
  };

  if (kind == "pconf") {
    check_keys(p, ptr, {"kind", "anchors", "h", "c", "mu"});
    PconfSpec s;
    s.anchors = numbers(require(p, "anchors", ptr), child(ptr, "anchors"));
    s.h = expr_or("h", variable);
    s.c = number_or(p, "c", ptr, 0.0);
    s.mu = number_or(p, "mu", ptr, 0.0);
    return s;
  }
  if (kind == "funceq") {
    check_keys(p, ptr, {"kind", "h", "f", "grid"});
    FunceqSpec s{expr_or("h", variable), expr_or("f", variable), std::nullopt};
    if (p.contains("grid")) s.grid = integer(p["grid"], child(ptr, "grid"));
    return s;
  }
  if (kind == "overdet") {
    check_keys(p, ptr, {"kind", "a", "b", "A", "B", "shape", "alpha", "beta", "rules", "exact"});
    OverdetSpec s;
    double a = number(require(p, "a", ptr), child(ptr, "a"));
    double b = number(require(p, "b", ptr), child(ptr, "b"));
    double A = number(require(p, "A", ptr), child(ptr, "A"));
    double B = number(require(p, "B", ptr), child(ptr, "B"));
    if (p.contains("rules")) {
      if (p.contains("shape") || p.contains("alpha") || p.contains("beta"))
        throw SchemaError(ptr + ": give either rules or shape/alpha/beta");
      s.problem.a = a;
      s.problem.b = b;
      s.problem.A = A;
      s.problem.B = B;
      std::string rp = child(ptr, "rules");
      for (std::size_t i = 0; i < array(p["rules"], rp).size(); ++i) {
        const json& r = p["rules"][i];
        std::string ip = child(rp, i);
        check_keys(r, ip, {"map", "p", "qa", "qb", "r"});
        auto field = [&](const char* key, const char* fallback) {
          auto it = r.find(key);
          return ScalarMap(it == r.end() ? expr::Expression::parse(fallback, variable)
                                         : parse_expr(*it, variable, child(ip, key)));
        };
        s.problem.rules.push_back({ScalarMap(parse_expr(require(r, "map", ip), variable, child(ip, "map"))),
                                   field("p", "0"), field("qa", "0"), field("qb", "0"), field("r", "0")});
      }
    } else {
      std::string shape = text(require(p, "shape", ptr), child(ptr, "shape"));
      cauchy::Shape sh;
      if (shape == "jensen")
        sh = cauchy::Shape::Jensen;
      else if (shape == "cauchy")
        sh = cauchy::Shape::Cauchy;
      else
        throw SchemaError(child(ptr, "shape") + ": expected jensen or cauchy");
      s.problem = cauchy::OverdetProblem::from_shape(a, b, ScalarMap(req_expr("alpha", variable)),
                                                     ScalarMap(req_expr("beta", variable)), sh, A, B);
    }
    s.exact = expr_or("exact", variable);
    return s;
  }
  if (kind == "affine") {
    check_keys(p, ptr, {"kind", "A1", "A2", "b1", "b2", "c"});
    AffineSpec s;
    s.a1 = matrix(require(p, "A1", ptr), child(ptr, "A1"));
    s.a2 = matrix(require(p, "A2", ptr), child(ptr, "A2"));
    s.b1 = vector(require(p, "b1", ptr), child(ptr, "b1"));
    s.b2 = vector(require(p, "b2", ptr), child(ptr, "b2"));
    if (p.contains("c")) s.c = vector(p["c"], child(ptr, "c"));
    return s;
  }
  if (kind == "vector-cauchy") {
    check_keys(p, ptr, {"kind", "variables", "a1", "a2", "c", "domain"});
    VectorCauchySpec s;
    std::string vp = child(ptr, "variables");
    for (std::size_t i = 0; i < array(require(p, "variables", ptr), vp).size(); ++i)
      s.variables.push_back(text(p["variables"][i], child(vp, i)));
    if (s.variables.empty()) throw SchemaError(vp + ": at least one variable is required");
    s.a1 = parse_separable(require(p, "a1", ptr), s.variables, child(ptr, "a1"));
    s.a2 = parse_separable(require(p, "a2", ptr), s.variables, child(ptr, "a2"));
    s.c = vector(require(p, "c", ptr), child(ptr, "c"));
    if (static_cast<std::size_t>(s.c.size()) != s.variables.size())
      throw SchemaError(child(ptr, "c") + ": one entry per variable is required");
    if (p.contains("domain")) {
      std::string dp = child(ptr, "domain");
      const json& d = p["domain"];
      check_keys(d, dp, {"kind", "radius", "inner"});
      std::string dk = text(require(d, "kind", dp), child(dp, "kind"));
      if (dk == "box")
        s.domain.domain = cauchy::SampleDomain::Box;
      else if (dk == "l1-ball")
        s.domain.domain = cauchy::SampleDomain::L1Ball;
      else if (dk == "annulus")
        s.domain.domain = cauchy::SampleDomain::Annulus;
      else
        throw SchemaError(child(dp, "kind") + ": expected box, l1-ball or annulus");
      s.domain.r_hi = number_or(d, "radius", dp, 1.0);
      s.domain.r_lo = number_or(d, "inner", dp, 0.0);
    }
    return s;
  }
  if (kind == "bvp") {
    check_keys(p, ptr, {"kind", "alpha1", "alpha2", "m", "n", "g1", "g2", "gGamma", "tol"});
    BvpSpec s;
    s.problem.alpha1 = req_expr("alpha1", "z");
    s.problem.alpha2 = req_expr("alpha2", "z");
    s.problem.m = number_or(p, "m", ptr, 1.0);
    s.problem.n = number_or(p, "n", ptr, 1.0);
    if (auto e = expr_or("g1", "x")) s.problem.g1 = *e;
    if (auto e = expr_or("g2", "y")) s.problem.g2 = *e;
    if (auto e = expr_or("gGamma", "z")) s.problem.g_gamma = *e;
    s.problem.tol = number_or(p, "tol", ptr, 1e-9);
    return s;
  }
  if (kind == "conjugacy") {
    check_keys(p, ptr, {"kind", "phi", "phi_inv", "target"});
    ConjugacySpec s;
    s.phi = req_expr("phi", variable);
    s.phi_inv = req_expr("phi_inv", variable);
    std::string tp = child(ptr, "target");
    const json& t = require(p, "target", ptr);
    check_keys(t, tp, {"space", "maps", "guiding"});
    s.target = std::make_shared<gds::GuidedSystem>(assemble(parse_system_parts(t, tp, variable), tol, {}, tp));
    return s;
  }
  throw SchemaError(child(ptr, "kind") + ": unknown problem kind '" + kind + "'");
}

}  // namespace

JobConfig parse_config(const json& doc) {
  check_keys(doc, "", {"variable", "space", "maps", "guiding", "coeffs", "problem", "tolerances", "budgets"});
  JobConfig cfg;
  cfg.raw = doc;
  if (doc.contains("variable")) cfg.variable = text(doc["variable"], "/variable");

  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    check_keys(t, "/tolerances", {"lambda", "step", "range", "validation_grid", "pconf", "solve"});
    cfg.tol.gds.lambda = number_or(t, "lambda", "/tolerances", cfg.tol.gds.lambda);
    cfg.tol.gds.step = number_or(t, "step", "/tolerances", cfg.tol.gds.step);
    cfg.tol.gds.range = number_or(t, "range", "/tolerances", cfg.tol.gds.range);
    if (t.contains("validation_grid"))
      cfg.tol.gds.validation_grid = integer(t["validation_grid"], "/tolerances/validation_grid");
    cfg.tol.pconf = number_or(t, "pconf", "/tolerances", cfg.tol.pconf);
    cfg.tol.solve = number_or(t, "solve", "/tolerances", cfg.tol.solve);
  }
  if (doc.contains("budgets")) {
    const json& b = doc["budgets"];
    check_keys(b, "/budgets", {"max_points", "m_max", "max_iter", "cycle_len", "samples", "cells"});
    auto get = [&](const char* key, int fallback) {
      return b.contains(key) ? integer(b[key], std::string("/budgets/") + key) : fallback;
    };
    if (b.contains("max_points")) {
      if (!b["max_points"].is_number_integer() || b["max_points"].get<long long>() <= 0)
        throw SchemaError("/budgets/max_points: expected a positive integer");
      cfg.budgets.max_points = b["max_points"].get<std::size_t>();
    }
    cfg.budgets.m_max = get("m_max", cfg.budgets.m_max);
    cfg.budgets.max_iter = get("max_iter", cfg.budgets.max_iter);
    cfg.budgets.cycle_len = get("cycle_len", cfg.budgets.cycle_len);
    cfg.budgets.samples = get("samples", cfg.budgets.samples);
    cfg.budgets.cells = get("cells", cfg.budgets.cells);
  }

  SystemParts parts = parse_system_parts(doc, "", cfg.variable);
  cfg.space = parts.space;
  cfg.maps = std::move(parts.maps);
  cfg.tables = std::move(parts.tables);
  cfg.guiding = std::move(parts.guiding);
  cfg.guiding_nodes = std::move(parts.guiding_nodes);

  if (doc.contains("coeffs"))
    for (std::size_t i = 0; i < array(doc["coeffs"], "/coeffs").size(); ++i)
      cfg.coeffs.emplace_back(parse_expr(doc["coeffs"][i], cfg.variable, child("/coeffs", i)));

  if (doc.contains("problem")) {
    const json& p = doc["problem"];
    if (!p.is_object()) throw SchemaError("/problem: expected an object");
    cfg.kind = text(require(p, "kind", "/problem"), "/problem/kind");
    cfg.problem = parse_problem(p, cfg.kind, cfg.variable, "/problem", cfg.tol.gds);
  }
  return cfg;
}

JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

gds::GuidedSystem JobConfig::system() const {
  if (kind == "pconf") return pconfiguration().system();
  SystemParts parts{space, maps, tables, guiding, guiding_nodes};
  return assemble(parts, tol.gds, coeffs, "");
}

pconf::PConfiguration JobConfig::pconfiguration() const {
  const auto* spec = std::get_if<PconfSpec>(&problem);
  if (!spec) throw SchemaError("/problem: a pconf problem is required");
  if (maps.empty()) throw SchemaError("missing key /maps");
  pconf::PConfiguration pc = pconf::validate_pconfiguration(maps, spec->anchors, tol.pconf);
  pc.tol = tol.gds;
  if (guiding) {
    if (guiding->size() != maps.size()) throw SchemaError("/guiding: one set per map is required");
    // Guiding sets follow the map order of the file; pc.maps keeps that order too.
    pc.guiding = *guiding;
  }
  return pc;
}

}  // namespace guided::config
