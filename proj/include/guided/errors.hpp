#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace guided {

// Category drives the CLI exit code: usage 2, verdict 1, numeric 3.
enum class ErrorCategory { Usage, Verdict, Numeric };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorCategory category, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)), category_(category) {}

  const std::string& kind() const { return kind_; }
  ErrorCategory category() const { return category_; }

 private:
  std::string kind_;
  ErrorCategory category_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found);

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

// Raised during evaluation; carries the offending subexpression in infix form.
class DomainError : public Error {
 public:
  DomainError(const std::string& subexpression, double argument);
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

#define GUIDED_SIMPLE_ERROR(Name, Category)                                  \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& message)                                \
        : Error(#Name, ErrorCategory::Category, message) {}                  \
  };

GUIDED_SIMPLE_ERROR(SchemaError, Usage)
GUIDED_SIMPLE_ERROR(IoError, Usage)
GUIDED_SIMPLE_ERROR(DataMismatch, Usage)
GUIDED_SIMPLE_ERROR(CornerMismatch, Usage)
GUIDED_SIMPLE_ERROR(DegenerateParametrization, Usage)
GUIDED_SIMPLE_ERROR(HypothesisFailure, Verdict)
GUIDED_SIMPLE_ERROR(NotASolution, Verdict)
GUIDED_SIMPLE_ERROR(NotInvertible, Verdict)
GUIDED_SIMPLE_ERROR(MapEscape, Numeric)
GUIDED_SIMPLE_ERROR(NotCertified, Numeric)
GUIDED_SIMPLE_ERROR(NoConvergence, Numeric)
GUIDED_SIMPLE_ERROR(IllConditioned, Numeric)
GUIDED_SIMPLE_ERROR(NoBracket, Numeric)
GUIDED_SIMPLE_ERROR(BudgetExceeded, Numeric)
GUIDED_SIMPLE_ERROR(InconclusiveError, Numeric)

#undef GUIDED_SIMPLE_ERROR

class PConfigViolation : public Error {
 public:
  PConfigViolation(std::string condition, double witness, const std::string& detail)
      : Error("PConfigViolation", ErrorCategory::Verdict,
              "p-configuration violates " + condition + " at t=" + std::to_string(witness) +
                  (detail.empty() ? "" : ": " + detail)),
        condition_(std::move(condition)),
        witness_(witness) {}

  const std::string& condition() const { return condition_; }
  double witness() const { return witness_; }

 private:
  std::string condition_;
  double witness_;
};

}  // namespace guided
