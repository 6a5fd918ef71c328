#pragma once

#include <optional>
#include <vector>

#include "badmarket/config.hpp"
#include "badmarket/economy.hpp"

namespace badmarket {

/// A maximizer of utility over {z in box : p . z <= income}.
///
/// Closed forms are used for all four families; ties are broken toward the
/// lexicographically smallest bundle. Throws UnboundedProblem when utility is
/// unbounded on the budget set and EmptyBudget when no box point is affordable.
Vector demand(const Consumer& consumer, const Vector& price, double income, const Context& ctx,
              const SolverConfig& cfg = {});

/// Projected gradient ascent on the budget-box intersection with backtracking.
/// Works for any differentiable family; slower and only approximate.
Vector demand_projected_gradient(const Consumer& consumer, const Vector& price, double income,
                                 int max_iters = 10000);

/// All optimal vertices of a linear consumer's budget-box problem in
/// lexicographic order; the demand set is their convex hull.
std::vector<Vector> linear_optimal_vertices(const Consumer& consumer, const Vector& price, double income);

/// A box point costing strictly less than income (by more than `strict_margin`),
/// or nothing when the cheapest box point is not strictly cheaper.
std::optional<Vector> cheaper_point(const Consumer& consumer, const Vector& price, double income,
                                    double strict_margin = 1e-12);

/// Budget feasible and no affordable bundle beats it by more than tol.
bool is_quasi_demanded(const Consumer& consumer, const Vector& bundle, const Vector& price,
                       double income, const Context& ctx, double tol);

/// min over the box of p . z (may be -inf).
double cheapest_value(const Vector& bounds, const Vector& price);

/// True for families whose demand is set-valued on open sets of prices
/// (linear utility); the solver carries their bundles as unknowns.
bool has_set_valued_demand(const PreferenceSpec& spec);

}  // namespace badmarket
