#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace scdopt {

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mapping was evaluated outside its declared domain, or a sampler came back empty.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, Eigen::VectorXd point = {})
      : std::domain_error(what), point_(std::move(point)) {}

  const Eigen::VectorXd& point() const noexcept { return point_; }

 private:
  Eigen::VectorXd point_;
};

/// The y*-block of an adjoint subspace is singular, so no (Z, X, I) representation exists.
class NotRegular : public std::runtime_error {
 public:
  NotRegular(const std::string& what, Eigen::VectorXd point = {})
      : std::runtime_error(what), point_(std::move(point)) {}

  const Eigen::VectorXd& point() const noexcept { return point_; }

 private:
  Eigen::VectorXd point_;
};

/// Chart Jacobian of a graphically Lipschitzian representation is singular.
class SingularChart : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleStart : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scdopt
