#include "badmarket/solver.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>

#include "badmarket/demand.hpp"
#include "badmarket/lp.hpp"
#include "badmarket/parallel.hpp"
#include "random.hpp"

namespace badmarket {

Vector normalize_price(const Vector& price) {
  const double s = l1_norm(price);
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("price cannot be normalized");
  return price / s;
}

Vector aggregate_excess(const Economy& econ, const Vector& price, const std::vector<Vector>& bundles,
                        const std::vector<Vector>& productions) {
  const int ell = econ.ell();
  if (price.size() != ell) throw DimensionError("price dimension differs from ell");
  if (bundles.size() != econ.consumers.size()) throw DimensionError("one bundle per consumer is required");
  if (productions.size() != econ.firms.size()) throw DimensionError("one production per firm is required");
  Vector z = Vector::Zero(ell);
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const Consumer& c = econ.consumers[i];
    if (bundles[i].size() != ell) throw DimensionError("bundle dimension differs from ell");
    z += c.weight * (bundles[i] - c.endowment);
  }
  for (const Vector& y : productions) {
    if (y.size() != ell) throw DimensionError("production dimension differs from ell");
    z -= y;
  }
  return z;
}

std::vector<double> incomes(const Economy& econ, const Vector& price, const std::vector<Vector>& productions,
                            const std::vector<double>& firm_extra) {
  std::vector<double> profit(econ.firms.size(), 0.0);
  for (std::size_t j = 0; j < econ.firms.size(); ++j) {
    profit[j] = price.dot(productions[j]);
    if (j < firm_extra.size()) profit[j] += firm_extra[j];
  }
  std::vector<double> out;
  out.reserve(econ.consumers.size());
  for (const Consumer& c : econ.consumers) {
    double w = price.dot(c.endowment);
    for (std::size_t j = 0; j < profit.size(); ++j) w += c.shares[static_cast<Eigen::Index>(j)] * profit[j];
    out.push_back(w);
  }
  return out;
}

Context make_context(const Economy& econ, const Vector& price, const std::vector<Vector>& bundles,
                     const std::vector<Vector>& productions) {
  Context ctx = Context::neutral(econ.ell());
  for (std::size_t i = 0; i < bundles.size(); ++i) ctx.mean_allocation += econ.consumers[i].weight * bundles[i];
  ctx.productions = productions;
  for (const Vector& y : productions) ctx.total_production += y;
  ctx.price = price;
  return ctx;
}

namespace {

double fischer_burmeister(double a, double b) { return a + b - std::hypot(a, b); }

struct Layout {
  int ell = 0;
  std::vector<int> act_off;
  std::vector<int> act_n;
  std::vector<int> profit_idx;
  std::vector<int> lin_off;
  int size = 0;
  int rows = 0;
};

class Problem {
 public:
  Problem(const Economy& econ, const SolverConfig& cfg, const ClearingTarget& target, Context ctx)
      : econ_(econ), cfg_(cfg), ctx_(std::move(ctx)) {
    const int ell = econ.ell();
    target_ = target.target.size() == ell ? target.target : Vector::Zero(ell);
    firm_extra_ = target.firm_extra;
    firm_extra_.resize(econ.firms.size(), 0.0);
    lay_.ell = ell;
    int pos = ell;
    int rows = ell;
    for (const Technology& t : econ.firms) {
      gens_.push_back(effective_generators(t));
      const int na = static_cast<int>(gens_.back().size());
      lay_.act_off.push_back(pos);
      lay_.act_n.push_back(na);
      pos += na;
      rows += na;
      if (t.kind == TechnologyKind::Polytope) {
        lay_.profit_idx.push_back(pos++);
        rows += 1;
      } else {
        lay_.profit_idx.push_back(-1);
      }
    }
    for (const Consumer& c : econ.consumers) {
      if (has_set_valued_demand(c.preference)) {
        lay_.lin_off.push_back(pos);
        pos += ell + 1;
        rows += ell + 1;
      } else {
        lay_.lin_off.push_back(-1);
      }
    }
    lay_.size = pos;
    lay_.rows = rows;
  }

  const Layout& layout() const { return lay_; }

  // Keeps the price on the l1 sphere; multipliers and profit levels follow the
  // price scale so that the residual is unchanged.
  bool normalize(Vector& z) const {
    const double s = l1_norm(z.head(lay_.ell));
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    z.head(lay_.ell) /= s;
    for (int idx : lay_.profit_idx)
      if (idx >= 0) z[idx] /= s;
    for (int off : lay_.lin_off)
      if (off >= 0) z[off + lay_.ell] *= s;
    return true;
  }

  std::vector<Vector> productions(const Vector& z) const {
    std::vector<Vector> ys;
    for (std::size_t j = 0; j < econ_.firms.size(); ++j) {
      const Technology& t = econ_.firms[j];
      Vector y = t.offset;
      for (int r = 0; r < lay_.act_n[j]; ++r) y += z[lay_.act_off[j] + r] * gens_[j][static_cast<std::size_t>(r)];
      ys.push_back(std::move(y));
    }
    return ys;
  }

  // Income with profits replaced by their values under complementarity.
  std::vector<double> solver_incomes(const Vector& z) const {
    const Vector p = z.head(lay_.ell);
    std::vector<double> profit(econ_.firms.size());
    for (std::size_t j = 0; j < econ_.firms.size(); ++j) {
      const int idx = lay_.profit_idx[j];
      profit[j] = (idx >= 0 ? z[idx] : p.dot(econ_.firms[j].offset)) + firm_extra_[j];
    }
    std::vector<double> out;
    for (const Consumer& c : econ_.consumers) {
      double w = p.dot(c.endowment);
      for (std::size_t j = 0; j < profit.size(); ++j) w += c.shares[static_cast<Eigen::Index>(j)] * profit[j];
      out.push_back(w);
    }
    return out;
  }

  bool bundles(const Vector& z, const std::vector<double>& inc, std::vector<Vector>& xs) const {
    const Vector p = z.head(lay_.ell);
    xs.resize(econ_.consumers.size());
    for (std::size_t i = 0; i < econ_.consumers.size(); ++i) {
      const int off = lay_.lin_off[i];
      if (off >= 0) {
        xs[i] = z.segment(off, lay_.ell);
        continue;
      }
      try {
        xs[i] = demand(econ_.consumers[i], p, inc[i], ctx_, cfg_);
      } catch (const Error&) {
        return false;
      }
    }
    return true;
  }

  // Returns false where the residual is undefined (empty demand set or budget).
  bool residual(const Vector& z, Vector& f) const {
    const int ell = lay_.ell;
    const Vector p = z.head(ell);
    const std::vector<double> inc = solver_incomes(z);
    std::vector<Vector> xs;
    if (!bundles(z, inc, xs)) return false;
    f.resize(lay_.rows);
    Vector ex = -target_;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Consumer& c = econ_.consumers[i];
      ex += c.weight * (xs[i] - c.endowment);
    }
    const std::vector<Vector> ys = productions(z);
    for (const Vector& y : ys) ex -= y;
    f.head(ell) = ex;
    int row = ell;
    for (std::size_t j = 0; j < econ_.firms.size(); ++j) {
      const Technology& t = econ_.firms[j];
      const int idx = lay_.profit_idx[j];
      double wsum = 0.0;
      for (int r = 0; r < lay_.act_n[j]; ++r) {
        const double level = z[lay_.act_off[j] + r];
        const double value = p.dot(gens_[j][static_cast<std::size_t>(r)]);
        if (idx >= 0) {
          f[row++] = fischer_burmeister(z[idx] - p.dot(t.offset) - value, level);
          wsum += level;
        } else {
          f[row++] = fischer_burmeister(-value, level);
        }
      }
      if (idx >= 0) f[row++] = wsum - 1.0;
    }
    for (std::size_t i = 0; i < econ_.consumers.size(); ++i) {
      const int off = lay_.lin_off[i];
      if (off < 0) continue;
      const Consumer& c = econ_.consumers[i];
      const Vector x = z.segment(off, ell);
      const double lambda = z[off + ell];
      const Vector grad = c.preference.weights / c.preference.scale;
      Vector step = x + grad - lambda * p;
      for (int k = 0; k < ell; ++k) step[k] = std::clamp(step[k], 0.0, c.bounds[k]);
      f.segment(row, ell) = x - step;
      row += ell;
      f[row++] = fischer_burmeister(lambda, inc[i] - p.dot(x));
    }
    return f.allFinite();
  }

  // Initial unknowns for a price: demands at the price, activities fitted to
  // the implied excess, linear multipliers fitted to the gradient.
  Vector initial_point(const Vector& price) const {
    const int ell = lay_.ell;
    Vector z = Vector::Zero(lay_.size);
    z.head(ell) = normalize_price(price);
    const Vector p = z.head(ell);
    for (std::size_t j = 0; j < econ_.firms.size(); ++j) {
      const int idx = lay_.profit_idx[j];
      if (idx < 0) continue;
      for (int r = 0; r < lay_.act_n[j]; ++r) z[lay_.act_off[j] + r] = 1.0 / lay_.act_n[j];
      z[idx] = max_profit(econ_.firms[j], p);
    }
    const std::vector<double> inc = solver_incomes(z);
    Vector ex = -target_;
    for (std::size_t i = 0; i < econ_.consumers.size(); ++i) {
      const Consumer& c = econ_.consumers[i];
      Vector x = c.endowment.cwiseMin(c.bounds);
      try {
        x = demand(c, p, inc[i], ctx_, cfg_);
      } catch (const Error&) {
      }
      const int off = lay_.lin_off[i];
      if (off >= 0) {
        z.segment(off, ell) = x;
        const Vector grad = c.preference.weights / c.preference.scale;
        z[off + ell] = std::max(0.0, grad.dot(p) / p.squaredNorm());
      }
      ex += c.weight * (x - c.endowment);
    }
    std::vector<std::pair<int, Vector>> cols;
    for (std::size_t j = 0; j < econ_.firms.size(); ++j) {
      ex -= econ_.firms[j].offset;
      if (lay_.profit_idx[j] >= 0) {
        for (int r = 0; r < lay_.act_n[j]; ++r)
          ex -= z[lay_.act_off[j] + r] * gens_[j][static_cast<std::size_t>(r)];
        continue;
      }
      for (int r = 0; r < lay_.act_n[j]; ++r) cols.emplace_back(lay_.act_off[j] + r, gens_[j][static_cast<std::size_t>(r)]);
    }
    if (!cols.empty() && ex.allFinite()) {
      Matrix g(ell, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) g.col(static_cast<Eigen::Index>(k)) = cols[k].second;
      const Vector a = lp::nnls(g, ex);
      for (std::size_t k = 0; k < cols.size(); ++k) z[cols[k].first] = a[static_cast<Eigen::Index>(k)];
    }
    return z;
  }

  struct Outcome {
    Vector z;
    double norm = kInf;
    bool converged = false;
  };

  Outcome gauss_newton(Vector z) const {
    Outcome out;
    Vector f;
    if (!normalize(z) || !residual(z, f)) return out;
    const double polish = 1e-3 * cfg_.clearing_tol;
    double fn = f.norm();
    Matrix jac(lay_.rows, lay_.size);
    Vector fp;
    for (int it = 0; it < cfg_.max_inner_iters; ++it) {
      if (f.lpNorm<Eigen::Infinity>() <= polish) break;
      for (int k = 0; k < lay_.size; ++k) {
        const double h = 1e-7 * std::max(1.0, std::abs(z[k]));
        Vector zp = z;
        zp[k] += h;
        if (residual(zp, fp)) {
          jac.col(k) = (fp - f) / h;
          continue;
        }
        zp[k] = z[k] - h;
        if (residual(zp, fp)) jac.col(k) = (f - fp) / h;
        else jac.col(k).setZero();
      }
      // Gauss-Newton direction with a rank cutoff above finite-difference noise,
      // then Levenberg-Marquardt directions of increasing damping.
      bool accepted = false;
      auto try_direction = [&](const Vector& d, int halvings) {
        if (!d.allFinite()) return false;
        double t = 1.0;
        for (int half = 0; half < halvings; ++half, t *= 0.5) {
          Vector zt = z + t * d;
          if (!normalize(zt) || !residual(zt, fp)) continue;
          const double tn = fp.norm();
          if (tn < fn) {
            z = std::move(zt);
            f = fp;
            fn = tn;
            return true;
          }
        }
        return false;
      };
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(jac.rows(), jac.cols());
      cod.setThreshold(1e-6);
      cod.compute(jac);
      accepted = try_direction(-cod.solve(f), 30);
      if (!accepted) {
        const Matrix jtj = jac.transpose() * jac;
        const Vector g = jac.transpose() * f;
        const double diag = std::max(jtj.diagonal().maxCoeff(), 1e-300);
        for (double mu = 1e-8; mu <= 1e4 && !accepted; mu *= 100.0) {
          Matrix m = jtj;
          m.diagonal().array() += mu * diag;
          accepted = try_direction(-m.ldlt().solve(g), 4);
        }
      }
      if (!accepted) break;
    }
    out.z = z;
    out.norm = f.lpNorm<Eigen::Infinity>();
    out.converged = out.norm <= cfg_.clearing_tol;
    return out;
  }

  EquilibriumCertificate certificate(const Vector& z) const {
    const int ell = lay_.ell;
    EquilibriumCertificate cert;
    cert.price = z.head(ell);
    for (std::size_t j = 0; j < econ_.firms.size(); ++j) {
      Vector a = z.segment(lay_.act_off[j], lay_.act_n[j]).cwiseMax(0.0);
      if (lay_.profit_idx[j] >= 0 && a.sum() > 0.0) a /= a.sum();
      cert.activities.push_back(a);
      cert.productions.push_back(production_from_activities(econ_.firms[j], a));
    }
    const std::vector<double> inc = solver_incomes(z);
    bundles(z, inc, cert.bundles);
    for (std::size_t i = 0; i < econ_.consumers.size(); ++i) {
      if (lay_.lin_off[i] < 0) continue;
      const Vector& b = econ_.consumers[i].bounds;
      for (int k = 0; k < ell; ++k) cert.bundles[i][k] = std::clamp(cert.bundles[i][k], 0.0, b[k]);
    }
    return cert;
  }

 private:
  const Economy& econ_;
  const SolverConfig& cfg_;
  Context ctx_;
  Vector target_;
  std::vector<double> firm_extra_;
  Layout lay_;
  std::vector<std::vector<Vector>> gens_;
};

Vector restart_price(const Economy& econ, const SolverConfig& cfg, int r) {
  const int ell = econ.ell();
  Vector p(ell);
  if (r == 0) {
    for (int i = 0; i < ell; ++i) p[i] = i < econ.commodities.bad_count ? -1.0 : 1.0;
    return normalize_price(p);
  }
  std::mt19937_64 rng = detail::stream(cfg.seed, static_cast<std::uint64_t>(r));
  do {
    for (int i = 0; i < ell; ++i) p[i] = 2.0 * detail::unit_uniform(rng) - 1.0;
  } while (l1_norm(p) < 1e-3);
  return normalize_price(p);
}

struct Attempt {
  bool verified = false;
  EquilibriumCertificate cert;
  Vector z;
  double norm = kInf;
  Vector price;
};

struct InnerResult {
  std::optional<Attempt> found;
  NoConvergence failure;
};

InnerResult solve_inner(const Economy& econ, const SolverConfig& cfg, const ClearingTarget& target,
                        const Context& ctx, const std::optional<Vector>& warm) {
  const Problem prob(econ, cfg, target, ctx);
  const int threads = resolve_threads(cfg.threads);
  InnerResult res;
  res.failure.restarts_tried = 0;
  const int total = cfg.restarts;
  for (int start = 0; start < total; start += threads) {
    const int count = std::min(threads, total - start);
    std::vector<Attempt> batch(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t k) {
      const int r = start + static_cast<int>(k);
      Attempt& a = batch[k];
      Vector z0 = (r == 0 && warm && warm->size() == prob.layout().size)
                      ? *warm
                      : prob.initial_point(restart_price(econ, cfg, r));
      a.price = z0.head(econ.ell());
      const Problem::Outcome o = prob.gauss_newton(std::move(z0));
      a.norm = o.norm;
      if (o.z.size() == 0) return;
      a.z = o.z;
      a.price = o.z.head(econ.ell());
      if (!o.converged) return;
      const Tolerances tol{cfg.clearing_tol, cfg.optimality_tol};
      a.cert = prob.certificate(o.z);
      compute_residuals(econ, a.cert, target);
      a.verified = verify_equilibrium(econ, a.cert, tol, target).passed();
      // Price coordinates at rounding level are snapped to exact zeros when the
      // snapped certificate still verifies.
      Vector zs = o.z;
      bool snapped = false;
      for (int i = 0; i < econ.ell(); ++i)
        if (zs[i] != 0.0 && std::abs(zs[i]) <= 1e-12) {
          zs[i] = 0.0;
          snapped = true;
        }
      if (a.verified && snapped) {
        zs.head(econ.ell()) = normalize_price(zs.head(econ.ell()));
        EquilibriumCertificate c = prob.certificate(zs);
        compute_residuals(econ, c, target);
        if (verify_equilibrium(econ, c, tol, target).passed()) a.cert = std::move(c);
      }
    });
    res.failure.restarts_tried += count;
    for (Attempt& a : batch) {
      if (a.verified) {
        res.found = std::move(a);
        return res;
      }
      if (a.norm < res.failure.best_residual) {
        res.failure.best_residual = a.norm;
        res.failure.best_price = a.price;
      }
    }
  }
  res.failure.reason = total == 0 ? "no restarts configured" : "no restart reached a verified equilibrium";
  return res;
}

bool has_externality(const Economy& econ) {
  return std::any_of(econ.consumers.begin(), econ.consumers.end(),
                     [](const Consumer& c) { return c.preference.externality.has_value(); });
}

}  // namespace

void compute_residuals(const Economy& econ, EquilibriumCertificate& cert, const ClearingTarget& target) {
  const int ell = econ.ell();
  Vector t = target.target.size() == ell ? target.target : Vector::Zero(ell);
  cert.residuals.clearing = aggregate_excess(econ, cert.price, cert.bundles, cert.productions) - t;
  const std::vector<double> inc = incomes(econ, cert.price, cert.productions, target.firm_extra);
  const Context ctx = make_context(econ, cert.price, cert.bundles, cert.productions);
  double budget = 0.0, gap = 0.0, profit = 0.0;
  for (std::size_t i = 0; i < econ.consumers.size(); ++i) {
    const Consumer& c = econ.consumers[i];
    budget = std::max(budget, cert.price.dot(cert.bundles[i]) - inc[i]);
    try {
      const Vector d = demand(c, cert.price, inc[i], ctx);
      gap = std::max(gap, utility(c.preference, d, ctx) - utility(c.preference, cert.bundles[i], ctx));
    } catch (const Error&) {
      gap = kInf;
    }
  }
  constexpr double ray_tol = 1e-12;
  for (std::size_t j = 0; j < econ.firms.size(); ++j)
    profit = std::max(profit, max_profit(econ.firms[j], cert.price, ray_tol) - cert.price.dot(cert.productions[j]));
  cert.residuals.worst_budget_violation = budget;
  cert.residuals.worst_optimality_gap = gap;
  cert.residuals.worst_profit_gap = profit;
}

SolveResult solve_equilibrium(const Economy& econ, const SolverConfig& cfg) {
  return solve_equilibrium(econ, cfg, ClearingTarget{});
}

SolveResult solve_equilibrium(const Economy& econ, const SolverConfig& cfg, const ClearingTarget& target) {
  cfg.validate();
  check_dimensions(econ);
  if (cfg.restarts == 0) {
    NoConvergence nc;
    nc.reason = "no restarts configured";
    return nc;
  }
  const int ell = econ.ell();
  Context ctx = Context::neutral(ell);
  if (!has_externality(econ)) {
    InnerResult r = solve_inner(econ, cfg, target, ctx, std::nullopt);
    if (r.found) return std::move(r.found->cert);
    return r.failure;
  }

  std::optional<Vector> warm;
  std::vector<Vector> alloc;
  NoConvergence last;
  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    InnerResult r = solve_inner(econ, cfg, target, ctx, warm);
    if (!r.found) return r.failure;
    EquilibriumCertificate& cert = r.found->cert;
    double change = alloc.empty() ? kInf : 0.0;
    for (std::size_t i = 0; i < alloc.size(); ++i)
      change += econ.consumers[i].weight * (cert.bundles[i] - alloc[i]).lpNorm<1>();
    if (change < cfg.clearing_tol) return std::move(cert);
    const Context next = make_context(econ, cert.price, cert.bundles, cert.productions);
    const double d = cfg.damping;
    ctx.mean_allocation = (1.0 - d) * ctx.mean_allocation + d * next.mean_allocation;
    ctx.total_production = (1.0 - d) * ctx.total_production + d * next.total_production;
    ctx.price = (1.0 - d) * ctx.price + d * next.price;
    ctx.productions = next.productions;
    alloc = cert.bundles;
    warm = r.found->z;
    last.best_residual = r.found->norm;
    last.best_price = cert.price;
    last.restarts_tried += r.failure.restarts_tried;
  }
  last.reason = "externality fixed point did not settle";
  return last;
}

}  // namespace badmarket
