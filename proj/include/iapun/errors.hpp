#pragma once

#include <stdexcept>
#include <string>

namespace iapun {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

// A derived parameter set fails one of its defining inequalities.
class ConstructionError : public Error {
 public:
  ConstructionError(std::string inequality, const std::string& detail)
      : Error("parameter inequality violated: " + inequality + " (" + detail + ")"),
        inequality_(std::move(inequality)) {}
  const std::string& inequality() const { return inequality_; }

 private:
  std::string inequality_;
};

// An oracle returned NaN or Inf.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap before its certificate fired.
class SolverStall : public Error {
 public:
  SolverStall(const std::string& what, double residual, long iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  long iterations() const { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

// Something that the analysis guarantees did not happen.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace iapun
