#include "guided/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "guided/bvp.hpp"
#include "guided/cauchy.hpp"
#include "guided/config.hpp"
#include "guided/funceq.hpp"
#include "guided/orbit_graph.hpp"
#include "guided/orbits.hpp"
#include "guided/pconf.hpp"

namespace guided::cli {

namespace {

using json = nlohmann::json;
using config::JobConfig;

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::string report;
  std::optional<double> eps;
  std::optional<int> depth;
  std::optional<int> grid;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  bool no_meta = false;

  std::optional<double> x0;
  std::optional<std::string> h;
  std::optional<double> c;
  std::optional<double> mu;
  std::optional<int> cells;
  std::optional<int> max_len;
  std::optional<int> m_max;
  std::optional<int> samples;
  std::optional<int> lattice;
};

// Outcome of a subcommand: the JSON report, an optional CSV/text artifact, and the exit code.
struct Result {
  json report;
  std::optional<std::string> artifact;
  int code = 0;
};

json to_json(const gds::IntervalSet& s) {
  json out = json::array();
  for (const auto& p : s.parts()) out.push_back({p.lo, p.hi});
  return out;
}

json to_json(const std::vector<gds::IntervalSet>& sets) {
  json out = json::array();
  for (const auto& s : sets) out.push_back(to_json(s));
  return out;
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

json to_json(const gds::Orbit& o) { return {{"points", o.points}, {"generators", o.generators}}; }

json to_json(const gds::ContractionResult& c) {
  json ranges = json::array();
  for (const auto& r : c.ranges) ranges.push_back({r.lo, r.hi});
  return {{"certified", c.certified}, {"failed_hypothesis", c.failed_hypothesis}, {"detail", c.detail},
          {"lipschitz", c.lipschitz}, {"ranges", ranges}, {"samples", c.samples}};
}

json to_json(const gds::MinimalityVerdict& v) {
  json j = {{"verdict", gds::to_string(v.kind)}, {"eps", v.eps}, {"depth", v.depth},
            {"worst_coverage", v.worst_coverage}, {"seeds", v.seeds}};
  if (v.kind == gds::MinimalityKind::NotMinimal) {
    j["witness_cells"] = v.witness_cells;
    j["witness_points"] = v.witness_points;
    j["witness_seed"] = v.witness_seed;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

json to_json(const gds::AttractorVerdict& v) {
  json j = {{"verdict", gds::to_string(v.kind)}, {"x0", v.x0}, {"eps", v.eps}, {"depth", v.depth}, {"seeds", v.seeds}};
  if (v.witness_seed) j["witness_seed"] = *v.witness_seed;
  if (v.witness_cell) j["witness_cell"] = *v.witness_cell;
  return j;
}

json to_json(const gds::CycleReport& r) {
  json cycles = json::array();
  for (const auto& c : r.cycles) cycles.push_back(to_json(c));
  return {{"cycles", cycles}, {"count", r.cycles.size()}, {"max_len", r.max_len}, {"seeds", r.seeds}};
}

json to_json(const gds::ConjugacyReport& r) {
  return {{"pass", r.pass},
          {"invertible", r.invertible},
          {"max_defect", r.max_defect},
          {"guiding_defect", r.guiding_defect},
          {"inverse_defect", r.inverse_defect},
          {"properness_violations", r.properness_violations},
          {"orbits_checked", r.orbits_checked},
          {"samples", r.samples}};
}

json to_json(const funceq::ContractionCertificate& c) {
  return {{"certified", c.certified}, {"m", c.m}, {"norm", c.norm}, {"grid", c.grid}, {"history", c.history},
          {"monotonicity_violations", c.monotonicity_violations}};
}

int minimality_code(gds::MinimalityKind k) {
  switch (k) {
    case gds::MinimalityKind::MinimalEvidence: return 0;
    case gds::MinimalityKind::NotMinimal: return 1;
    default: return 3;
  }
}

double default_x0(const gds::GuidedSystem& sys) { return sys.space().lower(); }

RealFn fn(const expr::Expression& e) {
  return [e](double x) { return e.eval(x); };
}

Result cmd_orbit(const JobConfig& cfg, const Options& o) {
  auto sys = cfg.system();
  gds::OrbitOptions opts;
  opts.max_points = cfg.budgets.max_points;
  double x0 = o.x0.value_or(default_x0(sys));
  auto cloud = gds::guided_orbit_set(sys, x0, o.depth.value_or(12), o.eps.value_or(0.01), opts);
  int invalid = 0;
  for (std::size_t k = 0; k < cloud.points.size(); ++k)
    if (gds::first_invalid_step(sys, cloud.path_to(k)) >= 0) ++invalid;
  Result r;
  r.report = {{"x0", x0},
              {"points", cloud.points.size()},
              {"coverage", cloud.coverage},
              {"saturated", cloud.saturated},
              {"partial", cloud.partial},
              {"depth_reached", cloud.depth_reached},
              {"invalid_orbits", invalid}};
  std::ostringstream csv;
  csv << "x,depth,generator\n";
  for (std::size_t k = 0; k < cloud.points.size(); ++k)
    csv << format_double(cloud.points[k]) << ',' << cloud.depth[k] << ',' << cloud.generator[k] << '\n';
  r.artifact = csv.str();
  r.code = invalid == 0 ? 0 : 3;
  return r;
}

Result cmd_probe(const JobConfig& cfg, const Options& o) {
  gds::OrbitOptions opts;
  opts.max_points = cfg.budgets.max_points;
  auto v = gds::probe_minimality(cfg.system(), o.eps.value_or(0.01), o.depth.value_or(100000), opts);
  return {to_json(v), std::nullopt, minimality_code(v.kind)};
}

Result cmd_weak_attractor(const JobConfig& cfg, const Options& o) {
  auto sys = cfg.system();
  gds::OrbitOptions opts;
  opts.max_points = cfg.budgets.max_points;
  auto v = gds::probe_weak_attractor(sys, o.x0.value_or(default_x0(sys)), o.eps.value_or(0.01),
                                     o.depth.value_or(100000), opts);
  int code = v.kind == gds::AttractorKind::Yes ? 0 : v.kind == gds::AttractorKind::No ? 1 : 3;
  return {to_json(v), std::nullopt, code};
}

Result cmd_cycles(const JobConfig& cfg, const Options& o) {
  auto rep = gds::find_guided_cycles(cfg.system(), o.max_len.value_or(cfg.budgets.cycle_len),
                                     o.tol.value_or(1e-9));
  return {to_json(rep), std::nullopt, 0};
}

Result cmd_graph_min(const JobConfig& cfg, const Options& o) {
  auto sys = cfg.system();
  auto g = gds::build_orbit_graph(sys, o.cells.value_or(cfg.budgets.cells));
  auto mins = gds::minimal_subsystems(g);
  json subs = json::array();
  for (const auto& s : mins) {
    json e = {{"nodes", s}};
    if (sys.space().kind() != gds::StateSpace::Kind::FiniteGraph) {
      json cells = json::array();
      for (int k : s)
        cells.push_back({sys.space().lower() + k * g.cell_width, sys.space().lower() + (k + 1) * g.cell_width});
      e["cells"] = cells;
    }
    subs.push_back(e);
  }
  Result r;
  r.report = {{"nodes", g.nodes}, {"edges", g.edges.size()}, {"approximate", g.approximate},
              {"cell_width", g.cell_width}, {"minimal_subsystems", subs}};
  r.artifact = gds::edge_list(g);
  return r;
}

Result cmd_certify(const JobConfig& cfg, const Options& o) {
  auto cert = funceq::certify_contraction(cfg.system(), o.m_max.value_or(cfg.budgets.m_max), o.grid.value_or(1024));
  return {to_json(cert), std::nullopt, cert.certified ? 0 : 1};
}

Result cmd_solve_fe(const JobConfig& cfg, const Options& o) {
  auto sys = cfg.system();
  const auto* spec = std::get_if<config::FunceqSpec>(&cfg.problem);
  std::optional<expr::Expression> h;
  if (o.h)
    h = expr::Expression::parse(*o.h, cfg.variable);
  else if (spec)
    h = spec->h;
  int grid = o.grid.value_or(spec && spec->grid ? *spec->grid : 1024);
  Result r;
  if (h) {
    auto sol = funceq::solve_neumann(sys, GridFunction::sample(sys.space(), grid, fn(*h)),
                                     o.tol.value_or(cfg.tol.solve), cfg.budgets.max_iter, cfg.budgets.m_max);
    r.report = {{"residual", sol.residual}, {"iterations", sol.iterations}, {"grid", grid},
                {"certificate", to_json(sol.certificate)}};
    r.artifact = sol.f.to_csv();
    return r;
  }
  if (spec && spec->f) {
    auto f = GridFunction::sample(sys.space(), grid, fn(*spec->f));
    auto rep = funceq::check_max_principle(sys, f, o.tol.value_or(1e-6));
    r.report = {{"max_principle",
                 {{"pass", rep.pass}, {"residual", rep.residual}, {"max_value", rep.max_value},
                  {"min_value", rep.min_value}, {"argmax", rep.argmax}, {"argmin", rep.argmin},
                  {"worst_gap", rep.worst_gap}, {"cloud_points", rep.cloud_points}}}};
    r.code = rep.pass ? 0 : 1;
    return r;
  }
  throw SchemaError("solve-fe needs --h or a funceq problem with h or f");
}

Result cmd_solve_ivp(const JobConfig& cfg, const Options& o) {
  const auto* spec = std::get_if<config::PconfSpec>(&cfg.problem);
  if (!spec) throw SchemaError("/problem: a pconf problem is required");
  pconf::IvpProblem prob;
  prob.pconf = cfg.pconfiguration();
  expr::Expression h;
  if (o.h)
    h = expr::Expression::parse(*o.h, cfg.variable);
  else if (spec->h)
    h = *spec->h;
  else
    throw SchemaError("solve-ivp needs --h or /problem/h");
  prob.h = fn(h);
  prob.c = o.c.value_or(spec->c);
  prob.mu = o.mu.value_or(spec->mu);
  int grid = o.grid.value_or(1024);
  auto sol = pconf::solve_ivp(prob, grid);
  Result r;
  r.report = {{"residual", sol.residual},
              {"derivative_defect", sol.derivative_defect},
              {"anchor_identity_defect", sol.anchor_identity_defect},
              {"condition_estimate", sol.condition_estimate},
              {"sparse", sol.sparse},
              {"grid", grid},
              {"c", prob.c},
              {"mu", prob.mu}};
  r.artifact = sol.f.to_csv();
  return r;
}

Result cmd_validate_pconf(const JobConfig& cfg, const Options& o) {
  const auto* spec = std::get_if<config::PconfSpec>(&cfg.problem);
  if (!spec) throw SchemaError("/problem: a pconf problem is required");
  auto check = pconf::check_pconfiguration(cfg.maps, spec->anchors, o.tol.value_or(cfg.tol.pconf));
  Result r;
  r.report = {{"valid", check.ok}};
  if (!check.ok) {
    r.report["condition"] = check.condition;
    r.report["witness"] = check.witness;
    r.report["detail"] = check.detail;
    r.code = 1;
    return r;
  }
  auto pc = cfg.pconfiguration();
  r.report["segments"] = pc.segment;
  r.report["guiding"] = to_json(pc.guiding);
  auto mini = pconf::probe_pconf_minimality(pc, o.eps.value_or(0.01), o.depth.value_or(200));
  r.report["minimality"] = {{"verdict", gds::to_string(mini.verdict)},
                            {"route", mini.route},
                            {"agree", mini.agree},
                            {"contraction", to_json(mini.contraction)},
                            {"probe", to_json(mini.probe)},
                            {"attractor", to_json(mini.attractor)},
                            {"diagnostic", mini.diagnostic}};
  return r;
}

Result cmd_overdet(const JobConfig& cfg, const Options& o) {
  const auto* spec = std::get_if<config::OverdetSpec>(&cfg.problem);
  if (!spec) throw SchemaError("/problem: an overdet problem is required");
  const auto& prob = spec->problem;
  auto val = cauchy::validate_overdet(prob, o.samples.value_or(cfg.budgets.samples), o.seed);
  double eps = o.eps.value_or(std::ldexp(1.0, -12) * (prob.b - prob.a));
  auto cloud = cauchy::propagate_values(prob, o.depth.value_or(14), eps, cfg.budgets.max_points);
  auto cons = cauchy::check_consistency(cloud, eps, o.tol.value_or(1e-9));
  double path_defect = 0.0;
  for (std::size_t k = 0; k < cloud.entries.size(); ++k)
    path_defect = std::max(path_defect, std::fabs(cauchy::recompute(prob, cloud, k) - cloud.entries[k].value));
  Result r;
  r.report = {{"validation", {{"contraction", val.contraction}, {"fixed_a", val.fixed_a}, {"fixed_b", val.fixed_b}}},
              {"points", cloud.entries.size()},
              {"coverage", cloud.coverage},
              {"depth_reached", cloud.depth_reached},
              {"partial", cloud.partial},
              {"collisions", cloud.collisions.size()},
              {"path_defect", path_defect},
              {"consistency",
               {{"consistent", cons.consistent}, {"worst_gap", cons.worst_gap}, {"modulus", cons.modulus},
                {"cap", cons.cap}, {"reason", cons.reason}, {"witness", cons.witness}}}};
  for (const auto& c : cloud.collisions)
    if (!(c.gap < o.tol.value_or(1e-9))) {
      r.report["first_conflict"] = {{"point", c.point}, {"depth", c.depth}, {"gap", c.gap}};
      break;
    }
  if (spec->exact) {
    double err = 0.0;
    for (const auto& e : cloud.entries) err = std::max(err, std::fabs(e.value - spec->exact->eval(e.point)));
    r.report["max_error"] = err;
  }
  r.artifact = cloud.to_csv();
  r.code = cons.consistent ? 0 : 1;
  return r;
}

Result cmd_affine(const JobConfig& cfg, const Options& o) {
  Result r;
  int samples = o.samples.value_or(100);
  double tol = o.tol.value_or(1e-12);
  if (const auto* spec = std::get_if<config::AffineSpec>(&cfg.problem)) {
    auto an = cauchy::analyze_affine(spec->a1, spec->a2, spec->b1, spec->b2);
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    Eigen::VectorXd z(spec->b1.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = u(rng);
    r.report = {{"B1", to_json(an.b1)},
                {"B2", to_json(an.b2)},
                {"d1", to_json(an.d1)},
                {"d2", to_json(an.d2)},
                {"dt1", to_json(an.dt1)},
                {"dt2", to_json(an.dt2)},
                {"eig1", an.eig1},
                {"eig2", an.eig2},
                {"gamma", an.gamma},
                {"N", an.n_bound},
                {"iterations", an.iterations},
                {"rate1", cauchy::orbit_rate(an, 1, z, 20)},
                {"rate2", cauchy::orbit_rate(an, 2, z, 20)}};
    if (spec->c) {
      auto chk = cauchy::verify_linear_solution(spec->a1, spec->a2, spec->b1, spec->b2, *spec->c, samples, o.seed);
      r.report["linear_residual"] = chk.residual;
      r.code = chk.residual < tol ? 0 : 1;
    }
    return r;
  }
  if (const auto* spec = std::get_if<config::VectorCauchySpec>(&cfg.problem)) {
    Eigen::VectorXd c = spec->c;
    auto a1 = spec->a1;
    auto a2 = spec->a2;
    auto chk = cauchy::verify_cauchy_solution([c](const Eigen::VectorXd& x) { return c.dot(x); },
                                              [a1](const Eigen::VectorXd& x) { return a1(x); },
                                              [a2](const Eigen::VectorXd& x) { return a2(x); },
                                              static_cast<int>(c.size()), spec->domain, samples, o.seed);
    r.report = {{"linear_residual", chk.residual}, {"samples", chk.samples}, {"c", to_json(c)}};
    r.code = chk.residual < tol ? 0 : 1;
    return r;
  }
  throw SchemaError("/problem: an affine or vector-cauchy problem is required");
}

const bvp::BoundaryProblem& bvp_problem(const JobConfig& cfg) {
  const auto* spec = std::get_if<config::BvpSpec>(&cfg.problem);
  if (!spec) throw SchemaError("/problem: a bvp problem is required");
  return spec->problem;
}

json system_json(const bvp::BoundarySystem& sys) {
  return {{"omega_sets", to_json(std::vector<gds::IntervalSet>{sys.omega1, sys.omega2})},
          {"lambda_sets", to_json(sys.pconf.guiding)},
          {"lambda_defect", sys.lambda_defect},
          {"anchors", sys.pconf.anchors},
          {"conjugacy", to_json(sys.conjugacy)},
          {"flags", sys.flags}};
}

Result cmd_build_bvp(const JobConfig& cfg, const Options& o) {
  auto sys = bvp::build_boundary_system(bvp_problem(cfg), o.seed);
  return {system_json(sys), std::nullopt, sys.conjugacy.pass ? 0 : 1};
}

Result cmd_analyze_bvp(const JobConfig& cfg, const Options& o) {
  auto sys = bvp::build_boundary_system(bvp_problem(cfg), o.seed);
  auto rep = bvp::analyze_solvability(sys, o.eps.value_or(0.01), o.depth.value_or(64),
                                      o.max_len.value_or(cfg.budgets.cycle_len));
  json layers = json::array();
  for (const auto& l : rep.layers) {
    json e = {{"name", l.name}, {"applicable", l.applicable}, {"detail", l.detail}};
    e["outcome"] = l.outcome ? json(bvp::to_string(*l.outcome)) : json(nullptr);
    layers.push_back(e);
  }
  json j = {{"verdict", bvp::to_string(rep.verdict)},
            {"route", rep.route},
            {"layers", layers},
            {"contraction", to_json(rep.contraction)},
            {"cycles", to_json(rep.cycles)},
            {"system", system_json(sys)}};
  if (rep.fp12) j["fixed_point_12"] = {{"t", rep.fp12->t}, {"derivative", rep.fp12->derivative}};
  if (rep.fp21) j["fixed_point_21"] = {{"t", rep.fp21->t}, {"derivative", rep.fp21->derivative}};
  if (rep.probe) j["probe"] = to_json(*rep.probe);
  int code = rep.verdict == bvp::Solvability::Solvable ? 0 : rep.verdict == bvp::Solvability::NotSolvable ? 1 : 3;
  return {j, std::nullopt, code};
}

Result cmd_solve_bvp(const JobConfig& cfg, const Options& o) {
  const auto& prob = bvp_problem(cfg);
  auto sys = bvp::build_boundary_system(prob, o.seed);
  bvp::BvpOptions opts;
  opts.mu = o.mu.value_or(0.0);
  if (o.eps) opts.fd_step = *o.eps;
  int grid = o.grid.value_or(512);
  auto sol = bvp::solve_bvp(prob, sys, grid, opts);
  Result r;
  r.report = {{"grid", grid},
              {"residual", sol.residual},
              {"chi_origin", sol.chi_origin},
              {"boundary_defect", sol.boundary_defect},
              {"pde_residual", sol.pde_residual},
              {"fd_step", opts.fd_step},
              {"lattice_points", sol.lattice_points},
              {"warnings", sol.warnings}};
  r.artifact = bvp::field_csv(sol, o.lattice.value_or(64));
  return r;
}

Result cmd_verify_conjugacy(const JobConfig& cfg, const Options& o) {
  int samples = o.samples.value_or(100);
  double tol = o.tol.value_or(1e-9);
  gds::ConjugacyReport rep;
  if (const auto* b = std::get_if<config::BvpSpec>(&cfg.problem)) {
    auto sys = bvp::build_boundary_system(b->problem, o.seed);
    rep = gds::verify_conjugacy(sys.pconf.system(), sys.gamma, sys.omega_inv, sys.omega, samples, o.seed, tol);
  } else if (const auto* c = std::get_if<config::ConjugacySpec>(&cfg.problem)) {
    rep = gds::verify_conjugacy(cfg.system(), *c->target, ScalarMap(c->phi), ScalarMap(c->phi_inv), samples, o.seed,
                                tol);
  } else {
    throw SchemaError("/problem: a conjugacy or bvp problem is required");
  }
  return {to_json(rep), std::nullopt, rep.pass ? 0 : 1};
}

using Handler = Result (*)(const JobConfig&, const Options&);

struct Command {
  const char* name;
  const char* help;
  Handler handler;
};

const Command kCommands[] = {
    {"orbit", "Lambda-orbit set of a point (CSV cloud)", cmd_orbit},
    {"probe", "minimality probe", cmd_probe},
    {"weak-attractor", "weak-attractor probe at --x0", cmd_weak_attractor},
    {"cycles", "guided cycles inside the guiding sets", cmd_cycles},
    {"graph-min", "cell graph and its terminal components (edge list)", cmd_graph_min},
    {"certify", "contraction certificate for the functional operator", cmd_certify},
    {"solve-fe", "Neumann solve or maximum-principle check", cmd_solve_fe},
    {"solve-ivp", "initial-value problem on a p-configuration (CSV f)", cmd_solve_ivp},
    {"validate-pconf", "p-configuration conditions, guiding sets, minimality", cmd_validate_pconf},
    {"overdet", "value propagation for an overdetermined equation (CSV cloud)", cmd_overdet},
    {"affine-analyze", "affine Cauchy analysis or vector linear-solution check", cmd_affine},
    {"build-bvp", "boundary guided system and its conjugacy", cmd_build_bvp},
    {"analyze-bvp", "layered solvability verdict", cmd_analyze_bvp},
    {"solve-bvp", "boundary-value solve (CSV field)", cmd_solve_bvp},
    {"verify-conjugacy", "conjugacy defect between two guided systems", cmd_verify_conjugacy},
};

std::string timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Verdict: return 1;
    default: return 3;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"guided dynamical systems toolkit", "gds"};
  app.require_subcommand(1);
  Options o;
  for (const auto& cmd : kCommands) {
    CLI::App* sc = app.add_subcommand(cmd.name, cmd.help);
    sc->set_help_flag("--help", "print this help");  // -h would clash with --h
    sc->add_option("--config", o.config, "JSON job config")->required();
    sc->add_option("--out", o.out, "artifact path (CSV for grid commands, JSON otherwise)");
    sc->add_option("--report", o.report, "JSON report path for grid commands");
    sc->add_option("--eps", o.eps, "cell resolution");
    sc->add_option("--depth", o.depth, "search depth");
    sc->add_option("--grid", o.grid, "grid intervals");
    sc->add_option("--tol", o.tol, "tolerance");
    sc->add_option("--seed", o.seed, "seed for all random sampling");
    sc->add_flag("--no-meta", o.no_meta, "omit timestamp and version from reports");
    sc->add_option("--x0", o.x0, "start point");
    sc->add_option("--h", o.h, "right-hand side expression");
    sc->add_option("--c", o.c, "point of the derivative condition");
    sc->add_option("--mu", o.mu, "derivative value");
    sc->add_option("--cells", o.cells, "cells of the orbit graph");
    sc->add_option("--max-len", o.max_len, "longest cycle searched");
    sc->add_option("--m-max", o.m_max, "largest certificate power");
    sc->add_option("--samples", o.samples, "random samples");
    sc->add_option("--lattice", o.lattice, "lattice size of the field CSV");
    sc->callback([&o, name = std::string(cmd.name)] { o.command = name; });
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const Command* cmd = nullptr;
  for (const auto& c : kCommands)
    if (o.command == c.name) cmd = &c;
  try {
    JobConfig cfg = config::load_config(o.config);
    Result r = cmd->handler(cfg, o);
    json report = {{"command", cmd->name}, {"exit_code", r.code}, {"result", r.report}};
    if (!o.no_meta) report["meta"] = {{"version", kVersion}, {"timestamp", timestamp()}, {"config", o.config}};
    std::string report_path = o.report;
    if (r.artifact) {
      if (!o.out.empty())
        write_file(o.out, *r.artifact);
      else if (report_path.empty())
        report["artifact"] = *r.artifact;
    } else if (report_path.empty()) {
      report_path = o.out;
    }
    std::string text = report.dump(2) + "\n";
    if (report_path.empty())
      out << text;
    else
      write_file(report_path, text);
    return r.code;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace guided::cli
