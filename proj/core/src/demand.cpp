#include "badmarket/demand.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace badmarket {

void SolverConfig::validate() const {
  if (!(clearing_tol > 0.0) || !(optimality_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
  if (max_outer_iters < 1 || max_inner_iters < 1) throw DomainError("iteration limits must be positive");
  if (restarts < 0) throw DomainError("restarts must be nonnegative");
  if (threads < 0) throw DomainError("threads must be nonnegative");
}

bool has_set_valued_demand(const PreferenceSpec& spec) { return spec.family == Family::Linear; }

double cheapest_value(const Vector& bounds, const Vector& price) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < price.size(); ++i) {
    if (price[i] < 0.0) {
      if (!std::isfinite(bounds[i])) return -kInf;
      v += price[i] * bounds[i];
    }
  }
  return v;
}

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Keeps the best candidate; exact ties (or ties within `tie_eps` relative) go to
// the lexicographically smallest bundle.
struct Selector {
  explicit Selector(const PreferenceSpec& s, double eps = 0.0) : spec(s), tie_eps(eps) {}

  const PreferenceSpec& spec;
  double tie_eps = 0.0;
  bool have = false;
  double best_u = -kInf;
  Vector best;

  void offer(const Vector& z) {
    const double u = own_utility(spec, z);
    if (!have) {
      have = true;
      best_u = u;
      best = z;
      return;
    }
    const double eps = tie_eps * (1.0 + std::abs(best_u));
    if (u > best_u + eps || (u >= best_u - eps && lex_less(z, best))) {
      if (u > best_u) best_u = u;
      best = z;
    }
  }
};

// Utility-neutral coordinates: free or costly ones stay at zero, paid ones are
// taken up to the bound (extra income never hurts a nonsatiated consumer).
double fill_neutral(const PreferenceSpec& spec, const Vector& price, const Vector& bounds, Vector& z) {
  double spent = 0.0;
  for (Eigen::Index i = 0; i < price.size(); ++i) {
    if (uses_commodity(spec, static_cast<int>(i))) continue;
    if (price[i] < 0.0) {
      if (!std::isfinite(bounds[i]))
        throw UnboundedProblem("commodity " + std::to_string(i) +
                               " is paid for, unbounded and utility-neutral");
      z[i] = bounds[i];
      spent += price[i] * bounds[i];
    }
  }
  return spent;
}

struct Interval {
  double lo = 0.0;
  double hi = kInf;
  bool empty() const { return lo > hi; }
};

// {x in [0, cap] : coef * x <= rhs}
Interval budget_interval(double cap, double coef, double rhs) {
  Interval iv{0.0, cap};
  if (coef > 0.0) iv.hi = std::min(iv.hi, rhs / coef);
  else if (coef < 0.0) iv.lo = std::max(iv.lo, rhs / coef);
  else if (rhs < 0.0) iv.lo = kInf;
  return iv;
}

// QuadraticBad and LogMinusLinear: utility v(x_g) + w(x_b) with v increasing.
Vector two_coordinate_demand(const PreferenceSpec& spec, const Vector& price, double income,
                             const Vector& bounds, Vector base) {
  const int g = spec.good, b = spec.bad;
  const double pg = price[g], pb = price[b];
  const double bg = bounds[g], bb = bounds[b];
  const bool quadratic = spec.family == Family::QuadraticBad;
  const double coef = spec.coefficient;
  // w increasing in x_b (bad-loving) or flat.
  const bool w_increasing = quadratic ? coef < 0.0 : coef > 0.0;
  const bool w_flat = coef == 0.0;

  Selector sel{spec};
  auto offer = [&](double xg, double xb) {
    Vector z = base;
    z[g] = std::clamp(xg, 0.0, bg);
    z[b] = std::clamp(xb, 0.0, bb);
    sel.offer(z);
  };
  // Maximizes w over an interval with x_g fixed.
  auto offer_fixed_good = [&](double xg, Interval iv) {
    if (iv.empty()) return;
    if (!std::isfinite(iv.hi) && w_increasing)
      throw UnboundedProblem("bad-loving utility with an unbounded affordable bad");
    offer(xg, iv.lo);
    if (std::isfinite(iv.hi) && !w_flat) offer(xg, iv.hi);
    if (quadratic && coef > 0.0) offer(xg, std::clamp(0.0, iv.lo, iv.hi));
  };

  if (!(pg > 0.0)) {
    if (!std::isfinite(bg))
      throw UnboundedProblem("good " + std::to_string(g) + " is free or paid for and unbounded");
    offer_fixed_good(bg, budget_interval(bb, pb, income - pg * bg));
    if (!sel.have) throw EmptyBudget("no affordable bundle");
    return sel.best;
  }

  // Region where the good absorbs the budget residue: x_g = (I - pb x_b) / pg <= bg.
  Interval iv = budget_interval(bb, pb, income);
  if (std::isfinite(bg)) {
    const double k = income - pg * bg;  // pb x_b >= k keeps x_g <= bg
    if (pb > 0.0) iv.lo = std::max(iv.lo, k / pb);
    else if (pb < 0.0) iv.hi = std::min(iv.hi, k / pb);
    else if (k > 0.0) iv.lo = kInf;
  }
  if (!iv.empty()) {
    auto xg_of = [&](double xb) { return (income - pb * xb) / pg; };
    if (!std::isfinite(iv.hi)) {
      // pb <= 0 here; check whether utility keeps rising along x_b.
      bool unbounded = false;
      if (quadratic) unbounded = coef < 0.0 || (coef == 0.0 && pb < 0.0);
      else unbounded = (pb < 0.0 && coef >= 0.0) || (pb == 0.0 && coef > 0.0);
      if (unbounded) throw UnboundedProblem("utility is unbounded along the affordable bad direction");
    }
    offer(xg_of(iv.lo), iv.lo);
    if (std::isfinite(iv.hi)) offer(xg_of(iv.hi), iv.hi);
    if (quadratic) {
      if (coef > 0.0) {
        const double xs = std::clamp(-pb / (2.0 * coef * pg), iv.lo, iv.hi);
        offer(xg_of(xs), xs);
      }
    } else if (pb != 0.0 && coef != 0.0) {
      // d/dx [ln((I - pb x)/pg) + sigma x] = 0  <=>  I - pb x = pb / sigma
      if (pb / coef > 0.0) {
        const double xs = std::clamp(income / pb - 1.0 / coef, iv.lo, iv.hi);
        offer(xg_of(xs), xs);
      }
    }
  }
  if (std::isfinite(bg)) offer_fixed_good(bg, budget_interval(bb, pb, income - pg * bg));
  if (!sel.have) throw EmptyBudget("no affordable bundle");
  return sel.best;
}

Vector cobb_douglas_demand(const PreferenceSpec& spec, const Vector& price, double income,
                           const Vector& bounds, Vector z) {
  const auto ell = price.size();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < ell; ++i) {
    if (spec.weights[i] <= 0.0) continue;
    if (price[i] <= 0.0) {
      if (!std::isfinite(bounds[i]))
        throw UnboundedProblem("commodity " + std::to_string(i) + " is desired, unbounded and not costly");
      z[i] = bounds[i];
      income -= price[i] * bounds[i];
    } else {
      active.push_back(i);
    }
  }
  if (active.empty()) return z;
  if (income <= 0.0) {
    if (income < -1e-12 * (1.0 + std::abs(income))) throw EmptyBudget("no affordable bundle");
    for (auto i : active) z[i] = 0.0;
    return z;
  }

  auto coord = [&](Eigen::Index i, double lam) {
    return std::clamp(spec.weights[i] / (lam * price[i]) - spec.shifts[i], 0.0, bounds[i]);
  };
  auto spend = [&](double lam) {
    double s = 0.0;
    for (auto i : active) s += price[i] * coord(i, lam);
    return s;
  };

  double full = 0.0;
  for (auto i : active) full += price[i] * bounds[i];
  if (full <= income) {
    for (auto i : active) z[i] = bounds[i];
    return z;
  }

  std::vector<double> breaks;
  for (auto i : active) {
    if (spec.shifts[i] > 0.0) breaks.push_back(spec.weights[i] / (price[i] * spec.shifts[i]));
    if (std::isfinite(bounds[i])) breaks.push_back(spec.weights[i] / (price[i] * (bounds[i] + spec.shifts[i])));
  }
  std::sort(breaks.begin(), breaks.end());
  double left = 0.0, right = kInf;
  for (double bp : breaks) {
    if (spend(bp) <= income) {
      right = bp;
      break;
    }
    left = bp;
  }
  const double mid = left == 0.0 ? (std::isfinite(right) ? 0.5 * right : 1.0)
                                 : (std::isfinite(right) ? 0.5 * (left + right) : 2.0 * left);
  double a = 0.0, c = 0.0;
  std::vector<bool> interior(static_cast<std::size_t>(ell), false);
  for (auto i : active) {
    const double raw = spec.weights[i] / (mid * price[i]) - spec.shifts[i];
    if (raw <= 0.0) continue;
    if (raw >= bounds[i]) {
      c += price[i] * bounds[i];
    } else {
      a += spec.weights[i];
      c -= price[i] * spec.shifts[i];
      interior[static_cast<std::size_t>(i)] = true;
    }
  }
  const double lam = a / (income - c);
  for (auto i : active) {
    if (interior[static_cast<std::size_t>(i)])
      z[i] = std::clamp(spec.weights[i] / (lam * price[i]) - spec.shifts[i], 0.0, bounds[i]);
    else
      z[i] = coord(i, mid);
  }
  return z;
}

// Vertices of the budget-box polytope, with every coordinate at a bound except
// at most one that makes the budget bind.
std::vector<Vector> linear_candidates(const PreferenceSpec& spec, const Vector& price, double income,
                                      const Vector& bounds) {
  const int ell = static_cast<int>(price.size());
  if (ell > 20) throw DomainError("linear demand enumerates vertices and supports at most 20 commodities");
  const Vector& a = spec.weights;
  // Recession directions of the budget-box set.
  for (int i = 0; i < ell; ++i) {
    if (std::isfinite(bounds[i])) continue;
    if (price[i] <= 0.0 && a[i] > 0.0)
      throw UnboundedProblem("linear utility is unbounded along commodity " + std::to_string(i));
    for (int j = 0; j < ell; ++j) {
      if (std::isfinite(bounds[j]) || !(price[i] < 0.0 && price[j] > 0.0)) continue;
      if (price[j] * a[i] - price[i] * a[j] > 0.0)
        throw UnboundedProblem("linear utility is unbounded along a paid-for direction");
    }
  }

  std::vector<int> finite_idx;
  for (int i = 0; i < ell; ++i)
    if (std::isfinite(bounds[i])) finite_idx.push_back(i);
  const auto f = finite_idx.size();
  const double slack = 1e-12 * (1.0 + std::abs(income));

  std::vector<Vector> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << f); ++mask) {
    Vector z = Vector::Zero(ell);
    for (std::size_t k = 0; k < f; ++k)
      if (mask & (std::uint64_t{1} << k)) z[finite_idx[k]] = bounds[finite_idx[k]];
    const double value = price.dot(z);
    if (value <= income + slack) out.push_back(z);
    for (int i = 0; i < ell; ++i) {
      if (price[i] == 0.0) continue;
      const double rest = value - price[i] * z[i];
      const double zi = (income - rest) / price[i];
      if (zi < -1e-12 || zi > bounds[i] + 1e-12) continue;
      Vector w = z;
      w[i] = std::clamp(zi, 0.0, bounds[i]);
      out.push_back(w);
    }
  }
  if (out.empty()) throw EmptyBudget("no affordable bundle");
  return out;
}

Vector linear_demand(const PreferenceSpec& spec, const Vector& price, double income, const Vector& bounds) {
  Selector sel{spec, 1e-13};
  for (const Vector& z : linear_candidates(spec, price, income, bounds)) sel.offer(z);
  return sel.best;
}

Vector project_budget_box(const Vector& y, const Vector& price, double income, const Vector& bounds) {
  auto at = [&](double t) {
    Vector z = y - t * price;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], 0.0, bounds[i]);
    return z;
  };
  Vector z = at(0.0);
  if (price.dot(z) <= income) return z;
  double lo = 0.0, hi = 1.0;
  while (price.dot(at(hi)) > income) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw EmptyBudget("no affordable bundle");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (price.dot(at(mid)) > income) lo = mid;
    else hi = mid;
  }
  return at(hi);
}

}  // namespace

Vector demand_projected_gradient(const Consumer& consumer, const Vector& price, double income, int max_iters) {
  const PreferenceSpec& spec = consumer.preference;
  check_indices(spec, static_cast<int>(price.size()));
  const double s = spec.scale;
  PreferenceSpec unit = spec;
  unit.scale = 1.0;
  unit.externality.reset();
  const Vector bounds = consumer.bounds / s;
  const double pn = price.cwiseAbs().sum();
  if (!(pn > 0.0)) throw DomainError("price must be nonzero");
  const Vector price_n = price / pn;
  const double inc = income / s / pn;
  if (inc < cheapest_value(bounds, price_n) - 1e-12) throw EmptyBudget("no affordable bundle");

  const Context ctx = Context::neutral(static_cast<int>(price.size()));
  Vector y = bounds.cwiseMin(1.0) * 0.5;
  Vector z = project_budget_box(y, price_n, inc, bounds);
  double u = own_utility(unit, z);
  if (!std::isfinite(u)) {
    // Move into the domain of log families along the cheapest direction.
    for (Eigen::Index i = 0; i < z.size() && !std::isfinite(u); ++i) {
      Vector w = z;
      w[i] = std::min(bounds[i], w[i] + 1e-3);
      w = project_budget_box(w, price_n, inc, bounds);
      const double uw = own_utility(unit, w);
      if (uw > u) {
        z = w;
        u = uw;
      }
    }
  }
  // Projection of g onto the tangent cone of the budget-box set at `at`.
  auto face_direction = [&](const Vector& at, const Vector& g) {
    const Eigen::Index n = at.size();
    const bool budget = price_n.dot(at) >= inc - 1e-9 * (1.0 + std::abs(inc));
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    Vector d = g;
    for (Eigen::Index round = 0; round < 2 * n + 2; ++round) {
      double mu = 0.0;
      if (budget) {
        double gp = 0.0, pp = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
          if (!fixed[static_cast<std::size_t>(i)]) {
            gp += g[i] * price_n[i];
            pp += price_n[i] * price_n[i];
          }
        if (pp > 0.0) mu = std::max(0.0, gp / pp);
      }
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double di = g[i] - mu * price_n[i];
        const bool outward = (at[i] <= 0.0 && di < 0.0) || (at[i] >= bounds[i] && di > 0.0);
        char& f = fixed[static_cast<std::size_t>(i)];
        if (outward != static_cast<bool>(f)) {
          f = outward;
          changed = true;
        }
        d[i] = outward ? 0.0 : di;
      }
      if (!changed) break;
    }
    return d;
  };
  // Slope of u along the projected path at z + t * dir; -inf outside the domain.
  auto slope = [&](const Vector& dir, double t, Vector& trial) {
    trial = project_budget_box(z + t * dir, price_n, inc, bounds);
    if (!std::isfinite(own_utility(unit, trial))) return -kInf;
    try {
      const Vector g = utility_gradient(unit, trial, ctx);
      const double v = g.dot(face_direction(trial, dir));
      return v > 1e-13 * g.norm() * dir.norm() ? v : std::min(v, 0.0);
    } catch (const DomainError&) {
      return -kInf;
    }
  };
  double step = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector grad;
    try {
      grad = utility_gradient(unit, z, ctx);
    } catch (const DomainError&) {
      break;
    }
    const Vector dir = face_direction(z, grad);
    if (dir.norm() <= 1e-300) break;
    Vector trial;
    double lo = 0.0, hi = step;
    while (slope(dir, hi, trial) > 0.0 && hi < 1e12) {
      lo = hi;
      hi *= 2.0;
    }
    for (int bs = 0; bs < 100 && hi - lo > 1e-17 * hi; ++bs) {
      const double mid = 0.5 * (lo + hi);
      if (slope(dir, mid, trial) > 0.0) lo = mid;
      else hi = mid;
    }
    if (lo <= 0.0) break;
    trial = project_budget_box(z + lo * dir, price_n, inc, bounds);
    const double ut = own_utility(unit, trial);
    if (!std::isfinite(ut) || ut < u - 1e-12 * (1.0 + std::abs(u))) break;
    const double change = (trial - z).norm();
    z = trial;
    u = ut;
    step = std::max(lo, 1e-12);
    if (z.norm() > 1e12) throw UnboundedProblem("projected gradient ascent diverged");
    if (change <= 1e-15 * (1.0 + z.norm())) break;
  }
  return s * z;
}

Vector demand(const Consumer& consumer, const Vector& price, double income, const Context&,
              const SolverConfig& cfg) {
  const auto ell = price.size();
  if (consumer.bounds.size() != ell) throw DimensionError("price and consumer dimensions differ");
  if (!std::isfinite(income)) throw DomainError("income must be finite");
  const PreferenceSpec& spec = consumer.preference;
  check_indices(spec, static_cast<int>(ell));

  const double s = spec.scale;
  PreferenceSpec unit = spec;
  unit.scale = 1.0;
  unit.externality.reset();
  const Vector bounds = consumer.bounds / s;
  double inc = income / s;
  const double floor = cheapest_value(bounds, price);
  if (inc < floor - 1e-12 * (1.0 + std::abs(floor))) throw EmptyBudget("income below the cheapest box point");

  if (cfg.force_fallback_demand) return demand_projected_gradient(consumer, price, income);

  if (spec.family == Family::Linear) return s * linear_demand(unit, price, inc, bounds);

  Vector z = Vector::Zero(ell);
  inc -= fill_neutral(unit, price, bounds, z);
  switch (spec.family) {
    case Family::QuadraticBad:
    case Family::LogMinusLinear:
      z = two_coordinate_demand(unit, price, inc, bounds, z);
      break;
    case Family::CobbDouglas:
      z = cobb_douglas_demand(unit, price, inc, bounds, z);
      break;
    case Family::Linear:
      break;
  }
  return s * z;
}

std::vector<Vector> linear_optimal_vertices(const Consumer& consumer, const Vector& price, double income) {
  const PreferenceSpec& spec = consumer.preference;
  if (spec.family != Family::Linear) throw DomainError("optimal vertices are defined for linear utility only");
  check_indices(spec, static_cast<int>(price.size()));
  const double s = spec.scale;
  PreferenceSpec unit = spec;
  unit.scale = 1.0;
  const std::vector<Vector> cand = linear_candidates(unit, price, income / s, consumer.bounds / s);
  double best = -kInf;
  for (const Vector& z : cand) best = std::max(best, own_utility(unit, z));
  std::vector<Vector> out;
  for (const Vector& z : cand) {
    if (own_utility(unit, z) < best - 1e-12 * (1.0 + std::abs(best))) continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Vector& v) { return (v - s * z).norm() <= 1e-14; });
    if (!seen) out.push_back(s * z);
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

std::optional<Vector> cheaper_point(const Consumer& consumer, const Vector& price, double income,
                                    double strict_margin) {
  const auto ell = price.size();
  Vector z = Vector::Zero(ell);
  double value = 0.0;
  Eigen::Index open = -1;
  for (Eigen::Index i = 0; i < ell; ++i) {
    if (!(price[i] < 0.0)) continue;
    if (std::isfinite(consumer.bounds[i])) {
      z[i] = consumer.bounds[i];
      value += price[i] * z[i];
    } else if (open < 0) {
      open = i;
    }
  }
  if (open >= 0) {
    z[open] = std::max(0.0, (income - 1.0 - value) / price[open]);
    value += price[open] * z[open];
  }
  if (value < income - strict_margin) return z;
  return std::nullopt;
}

bool is_quasi_demanded(const Consumer& consumer, const Vector& bundle, const Vector& price, double income,
                       const Context& ctx, double tol) {
  if (bundle.size() != price.size()) throw DimensionError("bundle and price dimensions differ");
  for (Eigen::Index i = 0; i < bundle.size(); ++i)
    if (bundle[i] < -tol || bundle[i] > consumer.bounds[i] + tol) return false;
  if (price.dot(bundle) > income + tol) return false;
  const Vector best = demand(consumer, price, income, ctx);
  return utility(consumer.preference, best, ctx) <= utility(consumer.preference, bundle, ctx) + tol;
}

}  // namespace badmarket
