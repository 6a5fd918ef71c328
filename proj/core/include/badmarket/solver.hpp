#pragma once

#include <optional>
#include <vector>

#include "badmarket/certificate.hpp"
#include "badmarket/config.hpp"
#include "badmarket/economy.hpp"

namespace badmarket {

/// sum_w mu_w x_w - sum_w mu_w e_w - sum_j y_j.
Vector aggregate_excess(const Economy& econ, const Vector& price, const std::vector<Vector>& bundles,
                        const std::vector<Vector>& productions);

/// Income p . e_w + sum_j theta_wj (p . y_j + firm_extra_j) of every consumer.
std::vector<double> incomes(const Economy& econ, const Vector& price, const std::vector<Vector>& productions,
                            const std::vector<double>& firm_extra = {});

/// Preference context (x, y, p) of an allocation.
Context make_context(const Economy& econ, const Vector& price, const std::vector<Vector>& bundles,
                     const std::vector<Vector>& productions);

/// Options shared by the solver and the verifier for shifted targets.
struct ClearingTarget {
  /// Required value of aggregate_excess (zero for plain equilibria).
  Vector target;
  /// Per-firm income added to the distributed profit (quota rents).
  std::vector<double> firm_extra;
};

/// Searches for a non-free-disposal equilibrium.
///
/// Unknowns are the price (renormalized to the l1 sphere after every step),
/// cone activities, polytope weights with a profit level, and bundle plus
/// budget multiplier for linear-utility consumers. The residual stacks market
/// clearing with Fischer-Burmeister complementarity rows and is driven to zero
/// by damped Gauss-Newton with a forward-difference Jacobian, restarted from
/// `cfg.restarts` initial prices. Only certificates that pass
/// verify_equilibrium at the configured tolerances are returned; the lowest
/// verified restart index wins.
SolveResult solve_equilibrium(const Economy& econ, const SolverConfig& cfg = {});

/// Same search against a shifted clearing target.
SolveResult solve_equilibrium(const Economy& econ, const SolverConfig& cfg, const ClearingTarget& target);

/// Fills `cert.residuals` for the certificate against `target`.
void compute_residuals(const Economy& econ, EquilibriumCertificate& cert, const ClearingTarget& target = {});

/// Per-condition outcome of checking a certificate.
struct VerificationReport {
  bool demand_ok = true;
  bool profit_ok = true;
  bool clearing_ok = true;
  bool promotion_ok = true;
  bool normalization_ok = true;
  bool consistency_ok = true;
  Residuals gaps;
  std::vector<std::string> failing_consumers;
  std::vector<std::string> failing_firms;
  std::vector<std::string> consumers_without_cheaper_point;
  std::vector<std::string> messages;

  bool passed() const {
    return demand_ok && profit_ok && clearing_ok && promotion_ok && normalization_ok && consistency_ok;
  }
};

/// Checks (i) quasi-demand of every bundle, (ii) profit maximization of every
/// firm, (iii) clearing, and the existence of a cheaper point for every
/// consumer, all within `tol`.
VerificationReport verify_equilibrium(const Economy& econ, const EquilibriumCertificate& cert, double tol);

/// Verification against a shifted target with extra firm income.
VerificationReport verify_equilibrium(const Economy& econ, const EquilibriumCertificate& cert, double tol,
                                      const ClearingTarget& target);

/// Separate tolerances for clearing and for the optimality conditions.
struct Tolerances {
  double clearing = 1e-9;
  double optimality = 1e-8;
};

VerificationReport verify_equilibrium(const Economy& econ, const EquilibriumCertificate& cert,
                                      const Tolerances& tol, const ClearingTarget& target = {});

/// One row of an excess-map scan.
struct ScanPoint {
  Vector price;
  double residual = kInf;
};

/// Integer points k with sum |k_i| = resolution, scaled to the l1 sphere.
/// With `signs` given, only points whose nonzero coordinates have the listed
/// signs (+1 or -1; 0 allows either) are kept.
std::vector<Vector> sphere_grid(int ell, int resolution, const std::vector<int>& signs = {});

/// Smallest achievable ||excess||_inf at each price, over all optimal
/// activities and all optimal bundles of linear consumers. Prices at which a
/// ray is profitable or demand is undefined get +inf.
std::vector<ScanPoint> excess_map_scan(const Economy& econ, const std::vector<Vector>& prices);

}  // namespace badmarket
