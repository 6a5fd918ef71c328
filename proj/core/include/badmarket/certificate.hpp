#pragma once

#include <string>
#include <variant>
#include <vector>

#include "badmarket/common.hpp"
#include "badmarket/technology.hpp"

namespace badmarket {

struct Residuals {
  /// Aggregate excess minus the clearing target.
  Vector clearing;
  double worst_budget_violation = 0.0;
  double worst_optimality_gap = 0.0;
  double worst_profit_gap = 0.0;
};

/// Price, allocation and production plan of a candidate equilibrium.
///
/// Prices lie on the l1 unit sphere. `free_disposal` marks certificates whose
/// clearing condition is the inequality excess <= 0.
struct EquilibriumCertificate {
  Vector price;
  std::vector<Vector> bundles;
  std::vector<ActivityVector> activities;
  std::vector<Vector> productions;
  Residuals residuals;
  bool free_disposal = false;
};

/// Returned when no restart produced a verified certificate.
struct NoConvergence {
  double best_residual = kInf;
  Vector best_price;
  int restarts_tried = 0;
  std::string reason;
};

using SolveResult = std::variant<EquilibriumCertificate, NoConvergence>;

/// p / ||p||_1. Throws DomainError for the zero vector.
Vector normalize_price(const Vector& price);

}  // namespace badmarket
