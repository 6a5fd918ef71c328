#include <algorithm>
#include <cmath>
#include <sstream>

#include "badmarket/demand.hpp"
#include "badmarket/solver.hpp"

namespace badmarket {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

VerificationReport verify_equilibrium(const Economy& econ, const EquilibriumCertificate& cert, double tol) {
  return verify_equilibrium(econ, cert, Tolerances{tol, tol}, ClearingTarget{});
}

VerificationReport verify_equilibrium(const Economy& econ, const EquilibriumCertificate& cert, double tol,
                                      const ClearingTarget& target) {
  return verify_equilibrium(econ, cert, Tolerances{tol, tol}, target);
}

VerificationReport verify_equilibrium(const Economy& econ, const EquilibriumCertificate& cert,
                                      const Tolerances& tol, const ClearingTarget& target) {
  VerificationReport rep;
  const int ell = econ.ell();
  const Vector& p = cert.price;
  if (p.size() != ell || cert.bundles.size() != econ.consumers.size() ||
      cert.productions.size() != econ.firms.size() || cert.activities.size() != econ.firms.size()) {
    rep.consistency_ok = false;
    rep.demand_ok = rep.profit_ok = rep.clearing_ok = rep.promotion_ok = false;
    rep.messages.push_back("certificate dimensions do not match the economy");
    return rep;
  }
  for (const Vector& x : cert.bundles) {
    if (x.size() != ell) {
      rep.consistency_ok = rep.demand_ok = rep.clearing_ok = rep.promotion_ok = false;
      rep.messages.push_back("bundle dimension differs from ell");
      return rep;
    }
  }
  if (!p.allFinite() || std::abs(l1_norm(p) - 1.0) > 1e-12) {
    rep.normalization_ok = false;
    rep.messages.push_back("price is not on the l1 unit sphere (norm " + num(l1_norm(p)) + ")");
  }

  // Productions must come from the stated activities.
  for (std::size_t j = 0; j < econ.firms.size(); ++j) {
    const Technology& t = econ.firms[j];
    try {
      const Vector y = production_from_activities(t, cert.activities[j]);
      const double scale = 1.0 + y.lpNorm<Eigen::Infinity>();
      if ((y - cert.productions[j]).lpNorm<Eigen::Infinity>() > tol.optimality * scale ||
          (cert.activities[j].size() > 0 && cert.activities[j].minCoeff() < -tol.optimality)) {
        rep.consistency_ok = false;
        rep.messages.push_back("firm '" + t.id + "': production does not match its activities");
      }
      if (t.kind == TechnologyKind::Polytope && std::abs(cert.activities[j].sum() - 1.0) > tol.optimality) {
        rep.consistency_ok = false;
        rep.messages.push_back("firm '" + t.id + "': vertex weights do not sum to one");
      }
    } catch (const Error& e) {
      rep.consistency_ok = false;
      rep.messages.push_back("firm '" + t.id + "': " + e.what());
    }
  }

  // (ii) profit maximization
  double worst_profit = 0.0;
  for (std::size_t j = 0; j < econ.firms.size(); ++j) {
    const Technology& t = econ.firms[j];
    const double best = max_profit(t, p, tol.optimality);
    const double gap = best - p.dot(cert.productions[j]);
    worst_profit = std::max(worst_profit, gap);
    if (!std::isfinite(best) || gap > tol.optimality) {
      rep.profit_ok = false;
      rep.failing_firms.push_back(t.id);
      rep.messages.push_back("firm '" + t.id + "': profit gap " + (std::isfinite(best) ? num(gap) : "inf"));
    }
  }

  // (i) quasi-demand
  const std::vector<double> inc = incomes(econ, p, cert.productions, target.firm_extra);
  const Context ctx = make_context(econ, p, cert.bundles, cert.productions);
  double worst_budget = 0.0, worst_gap = 0.0;
  for (std::size_t i = 0; i < econ.consumers.size(); ++i) {
    const Consumer& c = econ.consumers[i];
    const Vector& x = cert.bundles[i];
    std::string why;
    for (int k = 0; k < ell && why.empty(); ++k)
      if (!(x[k] >= -tol.optimality && x[k] <= c.bounds[k] + tol.optimality)) why = "bundle leaves the consumption box";
    const double over = p.dot(x) - inc[i];
    worst_budget = std::max(worst_budget, over);
    if (why.empty() && over > tol.optimality) why = "budget exceeded by " + num(over);
    if (why.empty()) {
      try {
        const Vector d = demand(c, p, inc[i], ctx);
        const double gap = utility(c.preference, d, ctx) - utility(c.preference, x, ctx);
        worst_gap = std::max(worst_gap, gap);
        if (!(gap <= tol.optimality)) why = "an affordable bundle is better by " + num(gap);
      } catch (const Error& e) {
        worst_gap = kInf;
        why = e.what();
      }
    }
    if (!why.empty()) {
      rep.demand_ok = false;
      rep.failing_consumers.push_back(c.id);
      if (rep.failing_consumers.size() <= 5) rep.messages.push_back("consumer '" + c.id + "': " + why);
    }
  }

  // (iii) clearing
  Vector t = target.target.size() == ell ? target.target : Vector::Zero(ell);
  const Vector ex = aggregate_excess(econ, p, cert.bundles, cert.productions) - t;
  if (cert.free_disposal) {
    if (ex.maxCoeff() > tol.clearing) {
      rep.clearing_ok = false;
      rep.messages.push_back("excess demand " + num(ex.maxCoeff()) + " in free-disposal mode");
    }
    if (p.minCoeff() < -tol.clearing) {
      rep.clearing_ok = false;
      rep.messages.push_back("negative price in free-disposal mode");
    }
  } else if (ex.lpNorm<Eigen::Infinity>() > tol.clearing) {
    rep.clearing_ok = false;
    rep.messages.push_back("markets do not clear: max excess " + num(ex.lpNorm<Eigen::Infinity>()));
  }

  // promotion from quasi-equilibrium
  for (std::size_t i = 0; i < econ.consumers.size(); ++i) {
    if (!cheaper_point(econ.consumers[i], p, inc[i])) {
      rep.promotion_ok = false;
      rep.consumers_without_cheaper_point.push_back(econ.consumers[i].id);
    }
  }
  if (!rep.promotion_ok)
    rep.messages.push_back(std::to_string(rep.consumers_without_cheaper_point.size()) +
                           " consumer(s) have no strictly cheaper point");

  rep.gaps.clearing = ex;
  rep.gaps.worst_budget_violation = worst_budget;
  rep.gaps.worst_optimality_gap = worst_gap;
  rep.gaps.worst_profit_gap = worst_profit;
  return rep;
}

}  // namespace badmarket
