#pragma once

#include <optional>
#include <string>
#include <vector>

#include "badmarket/config.hpp"
#include "badmarket/solver.hpp"

namespace badmarket {

/// H_n = sum_{s=1}^n 1/s by compensated summation from the smallest term.
double harmonic_number(long n);

/// Closed-form equilibrium of build_hara_economy(n) in internal order:
/// price proportional to (-2/S, 1) and bundles (1/(S w), 2 + (2/S)(1/(S w) - 1))
/// for w = s/n, S = H_n.
EquilibriumCertificate hara_oracle(int n);

/// Continuum equilibrium of the garbage economy.
struct GarbageReference {
  Vector price;
  double aggregate_garbage = 0.0;
  double aggregate_good = 0.0;
  std::vector<Vector> productions;
  Vector activities;

  /// Equilibrium bundle of consumer w in [0, 1].
  Vector demand(double w) const;
};

GarbageReference garbage_oracle();

/// Midpoint-rule integrals over [0, 1] of the garbage and consumption-good
/// pieces of the reference demand with `points` cells.
std::pair<double, double> garbage_quadrature(long points);

/// Allowed distance between aggregates at resolution n and the continuum
/// values. Demand jumps at w = 0.5 and w = 0.6, so the midpoint error is first
/// order in 1/n.
double garbage_aggregate_allowance(int n);

/// a_n = min(n, ceil(n / ln n)) (1 for n = 1).
int ui_cutoff(int n);

/// Share of total bad consumption (first coordinate) held by the consumers
/// with the largest bad consumption who together carry `fraction` of the
/// weight, interpolating within the boundary consumer.
double uniform_integrability_share(const Economy& econ, const EquilibriumCertificate& cert, double fraction);

enum class FamilyKind { Hara, Garbage };

FamilyKind family_kind_from_string(const std::string& name);

struct FamilyRecord {
  int n = 0;
  std::optional<EquilibriumCertificate> certificate;
  bool verified = false;
  /// Largest deviation from the reference: price and bundles for the Hara
  /// family, price and aggregates for the garbage family.
  double oracle_gap = kInf;
  double price_gap = kInf;
  double aggregate_gap = kInf;
  /// Tolerance the gap is judged against at this n.
  double allowance = 0.0;
  double ui_share = 0.0;
  double runtime_ms = 0.0;
  std::string note;
};

/// Builds, solves, verifies and compares each instance. Failures are recorded
/// in the record instead of stopping the run; records follow the order of ns.
std::vector<FamilyRecord> run_family(FamilyKind kind, const std::vector<int>& ns, const SolverConfig& cfg);

/// CSV text: n, verified, price components, oracle_gap, price_gap,
/// aggregate_gap, ui_share, clearing, optimality and profit residuals, and
/// runtime_ms when `with_runtime` is set. Numbers use 17 significant digits.
std::string csv_string(const std::vector<FamilyRecord>& records, bool with_runtime = true);

/// Writes csv_string to `path`; throws IOError.
void emit_csv(const std::vector<FamilyRecord>& records, const std::string& path, bool with_runtime = true);

}  // namespace badmarket
