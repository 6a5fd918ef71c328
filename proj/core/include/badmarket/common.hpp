#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace badmarket {

/// Commodity-indexed vector. Bads occupy the leading coordinates.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};
class SchemaError : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class IndexError : public Error {
 public:
  using Error::Error;
};
class ZeroWeight : public Error {
 public:
  using Error::Error;
};
class PreconditionError : public Error {
 public:
  using Error::Error;
};
class IOError : public Error {
 public:
  using Error::Error;
};

/// The demand set is empty because utility grows without bound on the budget set.
class UnboundedProblem : public Error {
 public:
  using Error::Error;
};
/// No point of the consumption box is affordable.
class EmptyBudget : public Error {
 public:
  using Error::Error;
};
/// Profit is unbounded on the technology at the given price.
class UnboundedSupply : public Error {
 public:
  using Error::Error;
};

inline double l1_norm(const Vector& v) { return v.cwiseAbs().sum(); }

}  // namespace badmarket
