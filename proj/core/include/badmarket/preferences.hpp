#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "badmarket/common.hpp"

namespace badmarket {

enum class Family {
  QuadraticBad,    ///< u = x_g - c * x_b^2
  LogMinusLinear,  ///< u = ln(x_g) + sigma * x_b
  Linear,          ///< u = a . x
  CobbDouglas,     ///< u = sum_i alpha_i * ln(x_i + eps_i)
};

enum class Statistic { MeanAllocation, TotalProduction, Price };

std::string_view to_string(Family f);
std::string_view to_string(Statistic s);
Family family_from_string(std::string_view name);
Statistic statistic_from_string(std::string_view name);

/// Additive externality term -gamma . statistic(x, y, p).
///
/// `production_correction` is subtracted from the total-production statistic
/// before use. Shifted quota economies set it so that preferences still see
/// the productions of the unshifted economy.
struct Externality {
  Vector gamma;
  Statistic statistic = Statistic::MeanAllocation;
  Vector production_correction;
};

/// A parametric utility family plus an optional externality hook.
///
/// `scale` composes the family with the bundle map x -> x / scale; it is 1
/// except in economies produced by rescale_to_unweighted.
struct PreferenceSpec {
  Family family = Family::Linear;
  int good = 0;
  int bad = 0;
  /// c for QuadraticBad, sigma for LogMinusLinear.
  double coefficient = 0.0;
  /// Linear coefficients, or Cobb-Douglas exponents.
  Vector weights;
  /// Cobb-Douglas shifts.
  Vector shifts;
  double scale = 1.0;
  std::optional<Externality> externality;

  static PreferenceSpec quadratic_bad(int good, int bad, double c);
  static PreferenceSpec log_minus_linear(int good, int bad, double sigma);
  static PreferenceSpec linear(Vector coefficients);
  static PreferenceSpec cobb_douglas(Vector exponents, Vector shifts);
};

/// The (x, y, p) arguments of a consumer's preference map.
struct Context {
  Vector mean_allocation;
  std::vector<Vector> productions;
  Vector total_production;
  Vector price;

  /// Zero allocation, no production, zero price.
  static Context neutral(int ell);
};

/// Utility including the externality term. Returns -inf at the boundary of
/// log families.
double utility(const PreferenceSpec& spec, const Vector& bundle, const Context& ctx);

/// Utility of the family alone (no externality term), in the economy's units.
double own_utility(const PreferenceSpec& spec, const Vector& bundle);

/// Analytic gradient in the own bundle. Throws DomainError where a log family
/// is not differentiable.
Vector utility_gradient(const PreferenceSpec& spec, const Vector& bundle, const Context& ctx);

/// Throws IndexError when family indices do not fit `ell` commodities.
void check_indices(const PreferenceSpec& spec, int ell);

/// True when the family is strictly increasing in commodity `s` everywhere on
/// the nonnegative orthant.
bool strictly_increasing_in(const PreferenceSpec& spec, int s);

/// True when the family uses commodity `i` at all.
bool uses_commodity(const PreferenceSpec& spec, int i);

}  // namespace badmarket
