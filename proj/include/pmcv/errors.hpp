#ifndef PMCV_ERRORS_HPP
#define PMCV_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace pmcv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or jet layouts do not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Chart point or parameter outside the admissible domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Degenerate induced metric, lightlike normal, or near-lightlike frame vector.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the mathematical input does not hold (e.g. A is not g-self-adjoint).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Input violates an inequality required by a closed-form result.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

/// Imaginary principal curvatures requested for odd dimension.
class ParityError : public Error {
 public:
  using Error::Error;
};

/// Sample points disagree on a discrete property (e.g. minimal at some, not at others).
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Frame ODE coefficient matrix fails to preserve the target Gram matrix.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Root clustering or rank decision is too close to its threshold to be trusted.
class AmbiguityError : public Error {
 public:
  struct Candidate {
    std::string description;
  };

  AmbiguityError(const std::string& what, std::vector<Candidate> candidates)
      : Error(what), candidates_(std::move(candidates)) {}

  const std::vector<Candidate>& candidates() const { return candidates_; }

 private:
  std::vector<Candidate> candidates_;
};

}  // namespace pmcv

#endif  // PMCV_ERRORS_HPP
