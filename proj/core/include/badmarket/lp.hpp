#pragma once

#include "badmarket/common.hpp"

namespace badmarket::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  Vector x;
  double objective = 0.0;
};

/// Dense two-phase simplex with Bland's rule:
///   maximize c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
/// Either constraint block may have zero rows. Intended for the handful of
/// variables that appear in feasibility checks, not for large models.
Result maximize(const Vector& c, const Matrix& a_ub, const Vector& b_ub, const Matrix& a_eq,
                const Vector& b_eq, double tol = 1e-10);

/// Feasibility of the same constraint system.
bool feasible(const Matrix& a_ub, const Vector& b_ub, const Matrix& a_eq, const Vector& b_eq,
              Vector* witness = nullptr, double tol = 1e-10);

/// Nonnegative least squares min ||A x - b||_2, x >= 0 (Lawson-Hanson).
Vector nnls(const Matrix& a, const Vector& b, int max_iter = 500);

}  // namespace badmarket::lp
