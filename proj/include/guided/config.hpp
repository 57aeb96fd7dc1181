#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "guided/bvp.hpp"
#include "guided/cauchy.hpp"
#include "guided/errors.hpp"
#include "guided/pconf.hpp"
#include "guided/system.hpp"

namespace guided::config {

using json = nlohmann::json;

// Expression syntax error located inside a config document.
class ExpressionError : public Error {
 public:
  ExpressionError(std::string pointer, std::size_t offset, const std::string& detail)
      : Error("SyntaxError", ErrorCategory::Usage, pointer + " offset " + std::to_string(offset) + ": " + detail),
        pointer_(std::move(pointer)),
        offset_(offset) {}
  const std::string& pointer() const { return pointer_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string pointer_;
  std::size_t offset_;
};

struct Budgets {
  std::size_t max_points = 5'000'000;
  int m_max = 64;
  int max_iter = 100'000;
  int cycle_len = 6;
  int samples = 2000;
  int cells = 256;
};

struct Tolerances {
  gds::Tolerances gds;
  double pconf = 1e-9;
  double solve = 1e-12;
};

struct PconfSpec {
  std::vector<double> anchors;
  std::optional<expr::Expression> h;
  double c = 0.0;
  double mu = 0.0;
};

struct FunceqSpec {
  std::optional<expr::Expression> h;  // right-hand side for solve-fe
  std::optional<expr::Expression> f;  // homogeneous candidate for the maximum-principle check
  std::optional<int> grid;
};

struct OverdetSpec {
  cauchy::OverdetProblem problem;
  std::optional<expr::Expression> exact;  // reference solution, reported when present
};

struct AffineSpec {
  Eigen::MatrixXd a1, a2;
  Eigen::VectorXd b1, b2;
  std::optional<Eigen::VectorXd> c;
};

struct VectorCauchySpec {
  std::vector<std::string> variables;
  cauchy::SeparableMap a1, a2;
  Eigen::VectorXd c;
  cauchy::SampleSpec domain;
};

struct BvpSpec {
  bvp::BoundaryProblem problem;
};

struct ConjugacySpec {
  expr::Expression phi;
  expr::Expression phi_inv;
  std::shared_ptr<const gds::GuidedSystem> target;
};

using Problem = std::variant<std::monostate, PconfSpec, FunceqSpec, OverdetSpec, AffineSpec, VectorCauchySpec,
                             BvpSpec, ConjugacySpec>;

struct JobConfig {
  json raw;
  std::string variable = "t";
  std::optional<gds::StateSpace> space;
  std::vector<ScalarMap> maps;
  std::vector<std::vector<int>> tables;  // graph spaces
  std::optional<std::vector<gds::IntervalSet>> guiding;
  std::vector<std::vector<int>> guiding_nodes;
  std::vector<ScalarMap> coeffs;
  Tolerances tol;
  Budgets budgets;
  std::string kind;  // problem kind, empty without a problem section
  Problem problem;

  // The guided system described by space/maps/guiding/coeffs. For a pconf problem the space
  // defaults to [a_0, a_N] and absent guiding sets are extracted from the derivatives.
  gds::GuidedSystem system() const;
  pconf::PConfiguration pconfiguration() const;
};

JobConfig parse_config(const json& doc);
// Throws IoError, SchemaError or ExpressionError.
JobConfig load_config(const std::string& path);

}  // namespace guided::config
