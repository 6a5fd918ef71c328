#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "badmarket/solver.hpp"

namespace badmarket {

/// Bundles and productions at a price; the three together form the context
/// each consumer's utility is evaluated in.
struct Allocation {
  std::vector<Vector> bundles;
  std::vector<Vector> productions;
  Vector price;

  static Allocation of(const EquilibriumCertificate& cert);
};

struct AllocationPair {
  Allocation improved;
  Allocation original;
};

/// Per-consumer utilities of two allocations with both dominance verdicts.
struct UtilityComparison {
  std::vector<double> first;
  std::vector<double> second;
  double weighted_first = 0.0;
  double weighted_second = 0.0;
  double unweighted_first = 0.0;
  double unweighted_second = 0.0;
  bool first_dominates = false;
  bool second_dominates = false;
};

/// Utilities of every consumer under `alloc`.
std::vector<double> utilities(const Economy& econ, const Allocation& alloc);

/// a is at least as good for everybody and better by more than 1e-12 for somebody.
bool pareto_dominates(const Economy& econ, const Allocation& a, const Allocation& b);

UtilityComparison compare_allocations(const Economy& econ, const Allocation& a, const Allocation& b);

/// With a free-disposal firm present, whether the price is nonnegative;
/// vacuously true otherwise.
bool check_nonnegative_price_rule(const Economy& econ, const EquilibriumCertificate& cert);

/// Moves the excess supply w of a free-disposal certificate into the disposal
/// activities of the first free-disposal firm (y' = y - w), producing a
/// certificate with exact clearing. Throws PreconditionError naming the
/// violated hypothesis.
EquilibriumCertificate disguise_free_disposal(const Economy& econ, const EquilibriumCertificate& fd_cert,
                                              double tol = 1e-9);

/// Free-disposal equilibrium with transfers of the Hara family, in internal
/// commodity order (bad, good): price (0, 1), transfers
/// T(w) = (2/S)(1/(S w) - 1) and allocation (0, 2 + T(w)).
struct TransferEquilibrium {
  Vector price;
  std::vector<double> transfers;
  std::vector<Vector> allocation;
};

TransferEquilibrium hara_transfer_equilibrium(int n);

/// Randomized search for a feasible allocation (aggregate excess <= 0 after
/// perturbing activities) that Pareto dominates the certificate's. Samples mix
/// Dirichlet redistributions of the available totals with local
/// perturbations of the current bundles; sample i uses its own seeded stream
/// and the lowest improving index is returned.
std::optional<AllocationPair> search_pareto_improvement(const Economy& econ, const EquilibriumCertificate& cert,
                                                        long samples, std::uint64_t seed, int threads = 0);

}  // namespace badmarket
