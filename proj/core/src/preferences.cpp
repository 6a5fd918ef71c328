#include "badmarket/preferences.hpp"

#include <cmath>
#include <string>

namespace badmarket {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::QuadraticBad: return "quadratic_bad";
    case Family::LogMinusLinear: return "log_minus_linear";
    case Family::Linear: return "linear";
    case Family::CobbDouglas: return "cobb_douglas";
  }
  return "unknown";
}

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::MeanAllocation: return "mean_allocation";
    case Statistic::TotalProduction: return "total_production";
    case Statistic::Price: return "price";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "quadratic_bad") return Family::QuadraticBad;
  if (name == "log_minus_linear") return Family::LogMinusLinear;
  if (name == "linear") return Family::Linear;
  if (name == "cobb_douglas") return Family::CobbDouglas;
  throw SchemaError("unknown preference family '" + std::string(name) + "'");
}

Statistic statistic_from_string(std::string_view name) {
  if (name == "mean_allocation") return Statistic::MeanAllocation;
  if (name == "total_production") return Statistic::TotalProduction;
  if (name == "price") return Statistic::Price;
  throw SchemaError("unknown externality statistic '" + std::string(name) + "'");
}

PreferenceSpec PreferenceSpec::quadratic_bad(int good, int bad, double c) {
  PreferenceSpec s;
  s.family = Family::QuadraticBad;
  s.good = good;
  s.bad = bad;
  s.coefficient = c;
  return s;
}

PreferenceSpec PreferenceSpec::log_minus_linear(int good, int bad, double sigma) {
  PreferenceSpec s;
  s.family = Family::LogMinusLinear;
  s.good = good;
  s.bad = bad;
  s.coefficient = sigma;
  return s;
}

PreferenceSpec PreferenceSpec::linear(Vector coefficients) {
  PreferenceSpec s;
  s.family = Family::Linear;
  s.weights = std::move(coefficients);
  return s;
}

PreferenceSpec PreferenceSpec::cobb_douglas(Vector exponents, Vector shifts) {
  PreferenceSpec s;
  s.family = Family::CobbDouglas;
  s.weights = std::move(exponents);
  s.shifts = std::move(shifts);
  return s;
}

Context Context::neutral(int ell) {
  Context c;
  c.mean_allocation = Vector::Zero(ell);
  c.total_production = Vector::Zero(ell);
  c.price = Vector::Zero(ell);
  return c;
}

void check_indices(const PreferenceSpec& spec, int ell) {
  switch (spec.family) {
    case Family::QuadraticBad:
    case Family::LogMinusLinear:
      if (spec.good < 0 || spec.good >= ell || spec.bad < 0 || spec.bad >= ell)
        throw IndexError("preference indices (good=" + std::to_string(spec.good) +
                         ", bad=" + std::to_string(spec.bad) + ") exceed " +
                         std::to_string(ell) + " commodities");
      if (spec.good == spec.bad) throw IndexError("good and bad index coincide");
      break;
    case Family::Linear:
      if (spec.weights.size() != ell)
        throw IndexError("linear coefficients have " + std::to_string(spec.weights.size()) +
                         " entries, expected " + std::to_string(ell));
      break;
    case Family::CobbDouglas:
      if (spec.weights.size() != ell || spec.shifts.size() != ell)
        throw IndexError("cobb_douglas exponents/shifts must have " + std::to_string(ell) +
                         " entries");
      break;
  }
  if (spec.externality && spec.externality->gamma.size() != ell)
    throw IndexError("externality gamma must have " + std::to_string(ell) + " entries");
}

namespace {

double externality_term(const PreferenceSpec& spec, const Context& ctx) {
  if (!spec.externality) return 0.0;
  const Externality& ext = *spec.externality;
  switch (ext.statistic) {
    case Statistic::MeanAllocation:
      return -ext.gamma.dot(ctx.mean_allocation);
    case Statistic::TotalProduction: {
      Vector total = ctx.total_production;
      if (ext.production_correction.size() == total.size()) total -= ext.production_correction;
      return -ext.gamma.dot(total);
    }
    case Statistic::Price:
      return -ext.gamma.dot(ctx.price);
  }
  return 0.0;
}

}  // namespace

double own_utility(const PreferenceSpec& spec, const Vector& bundle) {
  const Vector x = bundle / spec.scale;
  switch (spec.family) {
    case Family::QuadraticBad:
      return x[spec.good] - spec.coefficient * x[spec.bad] * x[spec.bad];
    case Family::LogMinusLinear: {
      const double g = x[spec.good];
      if (!(g > 0.0)) return -kInf;
      return std::log(g) + spec.coefficient * x[spec.bad];
    }
    case Family::Linear:
      return spec.weights.dot(x);
    case Family::CobbDouglas: {
      double u = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (spec.weights[i] == 0.0) continue;
        const double arg = x[i] + spec.shifts[i];
        if (!(arg > 0.0)) return -kInf;
        u += spec.weights[i] * std::log(arg);
      }
      return u;
    }
  }
  return 0.0;
}

double utility(const PreferenceSpec& spec, const Vector& bundle, const Context& ctx) {
  check_indices(spec, static_cast<int>(bundle.size()));
  return own_utility(spec, bundle) + externality_term(spec, ctx);
}

Vector utility_gradient(const PreferenceSpec& spec, const Vector& bundle, const Context&) {
  const auto ell = static_cast<int>(bundle.size());
  check_indices(spec, ell);
  const double s = spec.scale;
  const Vector x = bundle / s;
  Vector grad = Vector::Zero(ell);
  switch (spec.family) {
    case Family::QuadraticBad:
      grad[spec.good] = 1.0;
      grad[spec.bad] = -2.0 * spec.coefficient * x[spec.bad];
      break;
    case Family::LogMinusLinear:
      if (!(x[spec.good] > 0.0))
        throw DomainError("log family is not differentiable at a zero good coordinate");
      grad[spec.good] = 1.0 / x[spec.good];
      grad[spec.bad] = spec.coefficient;
      break;
    case Family::Linear:
      grad = spec.weights;
      break;
    case Family::CobbDouglas:
      for (int i = 0; i < ell; ++i) {
        if (spec.weights[i] == 0.0) continue;
        const double arg = x[i] + spec.shifts[i];
        if (!(arg > 0.0))
          throw DomainError("cobb_douglas is not differentiable where x_i + eps_i = 0");
        grad[i] = spec.weights[i] / arg;
      }
      break;
  }
  return grad / s;
}

bool strictly_increasing_in(const PreferenceSpec& spec, int s) {
  switch (spec.family) {
    case Family::QuadraticBad:
      return s == spec.good || (s == spec.bad && spec.coefficient < 0.0);
    case Family::LogMinusLinear:
      return s == spec.good || (s == spec.bad && spec.coefficient > 0.0);
    case Family::Linear:
      return s < spec.weights.size() && spec.weights[s] > 0.0;
    case Family::CobbDouglas:
      return s < spec.weights.size() && spec.weights[s] > 0.0;
  }
  return false;
}

bool uses_commodity(const PreferenceSpec& spec, int i) {
  switch (spec.family) {
    case Family::QuadraticBad:
      return i == spec.good || (i == spec.bad && spec.coefficient != 0.0);
    case Family::LogMinusLinear:
      return i == spec.good || (i == spec.bad && spec.coefficient != 0.0);
    case Family::Linear:
      return spec.weights[i] != 0.0;
    case Family::CobbDouglas:
      return spec.weights[i] != 0.0;
  }
  return false;
}

}  // namespace badmarket
