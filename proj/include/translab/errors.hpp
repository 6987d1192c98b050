#pragma once

#include <stdexcept>
#include <string>

namespace translab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside its documented range (k > n, a <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain of a formula (sigma_k < 0, z >= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// |Du| >= 1 somewhere a spacelike graph was required.
class SpacelikeViolation : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Adaptive ODE integration could not proceed.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, double at)
      : Error(what + " (r = " + std::to_string(at) + ")"), r_(at) {}
  double r() const noexcept { return r_; }

 private:
  double r_;
};

/// Two routes to the same limit disagree beyond tolerance.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// A stencil was requested on a boundary node.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// Every node of a curvature field failed the admissibility test.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Evaluation was requested beyond the sampled range of a profile.
class ExtrapolationError : public Error {
 public:
  using Error::Error;
};

/// The comparison sandwich was violated beyond its slack.
class ComparisonFailure : public Error {
 public:
  using Error::Error;
};

/// Time step halving exhausted.
class StiffnessFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace translab
