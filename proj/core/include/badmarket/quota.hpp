#pragma once

#include <variant>
#include <vector>

#include "badmarket/solver.hpp"

namespace badmarket {

/// Emission rights on the first `regulated_count` commodities.
///
/// `government` is the quota of the government firm (a zero technology owned
/// through `government_shares`, default one per consumer); `firm_quotas[j]`
/// belongs to economy firm j. Every quota is a nonpositive t-vector.
struct QuotaScheme {
  int regulated_count = 0;
  Vector government;
  std::vector<Vector> firm_quotas;
  std::vector<double> government_shares;

  /// Scheme with all quotas zero for an economy with `firms` firms.
  static QuotaScheme zero(int regulated_count, int firms);

  /// Sum of all quotas (a t-vector).
  Vector aggregate() const;
};

/// A quota equilibrium: productions are those of the unshifted technologies.
struct QuotaCertificate {
  EquilibriumCertificate base;
  double government_rent = 0.0;
  /// proj_t(p) . m_j per economy firm.
  std::vector<double> firm_rents;
  /// aggregate_excess - E(m).
  Vector compliance_residual;
};

using QuotaResult = std::variant<QuotaCertificate, NoConvergence>;

/// Throws DimensionError or DomainError when the scheme does not fit the economy.
void check_scheme(const Economy& econ, const QuotaScheme& scheme);

/// E(m): the aggregate quota in the first t coordinates, zero elsewhere.
Vector compliance_target(const QuotaScheme& scheme, int ell);

/// E(v) for a single t-vector.
Vector embed_regulated(const Vector& m, int ell);

/// Adds E(m_j) to every firm offset, appends the government firm when its
/// quota is nonzero, and corrects total-production externalities so that
/// preferences still see unshifted productions.
Economy shift_economy(const Economy& econ, const QuotaScheme& scheme);

/// Solves the shifted economy and maps productions back by y_j = y'_j - E(m_j).
QuotaResult solve_quota(const Economy& econ, const QuotaScheme& scheme, const SolverConfig& cfg = {});

/// Checks demand optimality at quota incomes, profit maximization and
/// aggregate_excess = E(m), plus consistency of the stated rents.
VerificationReport verify_quota(const Economy& econ, const QuotaScheme& scheme, const QuotaCertificate& cert,
                                double tol);

/// The certificate of the shifted economy that corresponds to `cert`.
EquilibriumCertificate shifted_certificate(const Economy& econ, const QuotaScheme& scheme,
                                           const EquilibriumCertificate& cert);

}  // namespace badmarket
