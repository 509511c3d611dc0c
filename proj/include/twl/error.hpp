#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace twl {

// Base of every error raised by the library. `code()` is a stable
// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidLaw : public Error {
 public:
  explicit InvalidLaw(const std::string& what) : Error("InvalidLaw", what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("ParseError", what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error("InvalidArgument", what) {}
};

class NoPositivePart : public Error {
 public:
  NoPositivePart()
      : Error("NoPositivePart",
              "law has no mass on (0, inf); the exponent equation has no "
              "positive root") {}
};

class NonNegativeDrift : public Error {
 public:
  explicit NonNegativeDrift(double mean)
      : Error("NonNegativeDrift",
              "law has mean " + std::to_string(mean) + " >= 0"),
        mean_(mean) {}
  double mean() const noexcept { return mean_; }

 private:
  double mean_;
};

class ZeroAtom : public Error {
 public:
  ZeroAtom() : Error("ZeroAtom", "law puts positive mass on 0") {}
};

class IdentityViolation : public Error {
 public:
  IdentityViolation(const std::string& identity, double lhs, double rhs)
      : Error("IdentityViolation",
              identity + ": " + std::to_string(lhs) + " vs " +
                  std::to_string(rhs)),
        lhs_(lhs),
        rhs_(rhs) {}
  double lhs() const noexcept { return lhs_; }
  double rhs() const noexcept { return rhs_; }

 private:
  double lhs_;
  double rhs_;
};

// Raised when the tilted construction yields a signed measure. `m_min` is
// the smallest scale index at which every atom mass is nonnegative.
class NegativeMass : public Error {
 public:
  NegativeMass(double atom, double mass, std::uint64_t m, std::uint64_t m_min)
      : Error("NegativeMass",
              "tilted mass at atom " + std::to_string(atom) + " is " +
                  std::to_string(mass) + " for m=" + std::to_string(m) +
                  "; smallest valid m is " + std::to_string(m_min)),
        atom_(atom),
        m_min_(m_min) {}
  double atom() const noexcept { return atom_; }
  std::uint64_t m_min_hint() const noexcept { return m_min_; }

 private:
  double atom_;
  std::uint64_t m_min_;
};

class BoundViolated : public Error {
 public:
  BoundViolated(double lambda, double tail, double bound)
      : Error("BoundViolated",
              "tail estimate " + std::to_string(tail) + " exceeds bound " +
                  std::to_string(bound) + " at lambda=" +
                  std::to_string(lambda)),
        lambda_(lambda) {}
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

class RangeNotMaterialized : public Error {
 public:
  RangeNotMaterialized(std::int64_t site, std::int64_t lo, std::int64_t hi)
      : Error("RangeNotMaterialized",
              "site " + std::to_string(site) + " outside materialized range [" +
                  std::to_string(lo) + ", " + std::to_string(hi) + "]") {}
};

class StepBudgetExceeded : public Error {
 public:
  StepBudgetExceeded(std::uint64_t steps, std::uint64_t budget)
      : Error("StepBudgetExceeded",
              std::to_string(steps) + " steps requested, budget is " +
                  std::to_string(budget)) {}
};

}  // namespace twl
