#include "badmarket/economy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "badmarket/lp.hpp"

namespace badmarket {

Vector Economy::mean_endowment() const {
  Vector total = Vector::Zero(ell());
  for (const Consumer& c : consumers) total += c.weight * c.endowment;
  return total;
}

int Economy::consumer_index(const std::string& id) const {
  for (std::size_t i = 0; i < consumers.size(); ++i)
    if (consumers[i].id == id) return static_cast<int>(i);
  return -1;
}

Vector Economy::to_source_order(const Vector& internal) const {
  if (source_order.empty()) return internal;
  Vector out(internal.size());
  for (Eigen::Index i = 0; i < internal.size(); ++i) out[source_order[static_cast<std::size_t>(i)]] = internal[i];
  return out;
}

Vector Economy::from_source_order(const Vector& source) const {
  if (source_order.empty()) return source;
  Vector out(source.size());
  for (Eigen::Index i = 0; i < source.size(); ++i) out[i] = source[source_order[static_cast<std::size_t>(i)]];
  return out;
}

void ValidationReport::add(std::string rule, Severity severity, std::string message) {
  if (severity == Severity::Error) passed = false;
  findings.push_back({std::move(rule), severity, std::move(message)});
}

bool ValidationReport::has_rule(std::string_view rule) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const Finding& f) { return f.rule == rule; });
}

int ValidationReport::error_count() const {
  return static_cast<int>(std::count_if(findings.begin(), findings.end(),
                                        [](const Finding& f) { return f.severity == Severity::Error; }));
}

void check_dimensions(const Economy& econ) {
  const int ell = econ.ell();
  const auto& cs = econ.commodities;
  if (ell <= 0) throw SchemaError("ell must be positive");
  if (cs.bad_count < 0 || cs.bad_count > ell) throw SchemaError("bad_count outside [0, ell]");
  if (cs.regulated_count < 0 || cs.regulated_count > ell)
    throw SchemaError("regulated_count outside [0, ell]");
  if (!cs.labels.empty() && static_cast<int>(cs.labels.size()) != ell)
    throw SchemaError("labels must list ell names");
  for (const Consumer& c : econ.consumers) {
    if (c.endowment.size() != ell) throw SchemaError("consumer '" + c.id + "': endowment dimension");
    if (c.bounds.size() != ell) throw SchemaError("consumer '" + c.id + "': bounds dimension");
    if (c.shares.size() != econ.firm_count())
      throw SchemaError("consumer '" + c.id + "': shares must list one entry per firm");
    try {
      check_indices(c.preference, ell);
    } catch (const IndexError& e) {
      throw SchemaError("consumer '" + c.id + "': " + e.what());
    }
  }
  for (const Technology& t : econ.firms) {
    if (t.offset.size() != ell) throw SchemaError("firm '" + t.id + "': offset dimension");
    for (const Vector& g : t.generators)
      if (g.size() != ell) throw SchemaError("firm '" + t.id + "': generator dimension");
  }
  if (!econ.source_order.empty()) {
    std::vector<int> sorted = econ.source_order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < ell; ++i)
      if (static_cast<int>(sorted.size()) != ell || sorted[static_cast<std::size_t>(i)] != i)
        throw SchemaError("source_order must be a permutation of 0..ell-1");
  }
}

namespace {

constexpr double kSumTol = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Whether e + sum_j theta_j y_j lies in the box for some production plan.
bool survives(const Economy& econ, const Consumer& c) {
  const int ell = econ.ell();
  Vector base = c.endowment;
  std::vector<int> firm_cols;
  int cols = 0;
  bool has_polytope = false;
  for (int j = 0; j < econ.firm_count(); ++j) {
    const Technology& t = econ.firms[static_cast<std::size_t>(j)];
    const double th = c.shares[j];
    base += th * t.offset;
    firm_cols.push_back(cols);
    if (th != 0.0) {
      cols += activity_count(t);
      has_polytope = has_polytope || t.kind == TechnologyKind::Polytope;
    }
  }
  auto in_box = [&](const Vector& x) {
    for (int i = 0; i < ell; ++i)
      if (x[i] < -1e-12 || x[i] > c.bounds[i] + 1e-12) return false;
    return true;
  };
  if (!has_polytope && in_box(base)) return true;
  if (cols == 0) return in_box(base);

  // Columns: activities of the firms this consumer owns.
  Matrix g = Matrix::Zero(ell, cols);
  std::vector<std::pair<int, int>> simplex_blocks;
  for (int j = 0; j < econ.firm_count(); ++j) {
    const Technology& t = econ.firms[static_cast<std::size_t>(j)];
    const double th = c.shares[j];
    if (th == 0.0) continue;
    const auto gens = effective_generators(t);
    for (std::size_t r = 0; r < gens.size(); ++r)
      g.col(firm_cols[static_cast<std::size_t>(j)] + static_cast<int>(r)) = th * gens[r];
    if (t.kind == TechnologyKind::Polytope)
      simplex_blocks.emplace_back(firm_cols[static_cast<std::size_t>(j)], static_cast<int>(gens.size()));
  }
  std::vector<int> upper_rows;
  for (int i = 0; i < ell; ++i)
    if (std::isfinite(c.bounds[i])) upper_rows.push_back(i);
  const int m_ub = ell + static_cast<int>(upper_rows.size());
  Matrix a_ub(m_ub, cols);
  Vector b_ub(m_ub);
  a_ub.topRows(ell) = -g;
  b_ub.head(ell) = base;
  for (std::size_t k = 0; k < upper_rows.size(); ++k) {
    const int i = upper_rows[k];
    a_ub.row(ell + static_cast<int>(k)) = g.row(i);
    b_ub[ell + static_cast<int>(k)] = c.bounds[i] - base[i];
  }
  Matrix a_eq = Matrix::Zero(static_cast<Eigen::Index>(simplex_blocks.size()), cols);
  Vector b_eq = Vector::Ones(static_cast<Eigen::Index>(simplex_blocks.size()));
  for (std::size_t k = 0; k < simplex_blocks.size(); ++k)
    a_eq.row(static_cast<Eigen::Index>(k)).segment(simplex_blocks[k].first, simplex_blocks[k].second).setOnes();
  return lp::feasible(a_ub, b_ub, a_eq, b_eq);
}

}  // namespace

ValidationReport validate_economy(const Economy& econ) {
  ValidationReport report;
  try {
    check_dimensions(econ);
  } catch (const Error& e) {
    report.add("dimensions", Severity::Error, e.what());
    return report;
  }
  const int ell = econ.ell();
  const int k = econ.commodities.bad_count;
  if (econ.consumers.empty()) report.add("consumers", Severity::Error, "economy has no consumers");

  double weight_sum = 0.0;
  for (const Consumer& c : econ.consumers) {
    if (!(c.weight >= 0.0)) report.add("weights-nonnegative", Severity::Error, "consumer '" + c.id + "' has negative weight");
    weight_sum += c.weight;
    if ((c.endowment.array() < 0.0).any())
      report.add("endowment-nonnegative", Severity::Error, "consumer '" + c.id + "' has a negative endowment");
    if ((c.shares.array() < 0.0).any())
      report.add("shares-nonnegative", Severity::Error, "consumer '" + c.id + "' has a negative share");
    if ((c.bounds.array() < 0.0).any())
      report.add("bounds-nonnegative", Severity::Error, "consumer '" + c.id + "' has a negative consumption bound");
    for (int i = 0; i < k; ++i) {
      if (!std::isfinite(c.bounds[i]))
        report.add("bad-bounds-finite", Severity::Error,
                   "consumer '" + c.id + "' has an unbounded consumption set in bad " + std::to_string(i));
    }
  }
  if (std::abs(weight_sum - 1.0) > kSumTol)
    report.add("weights-sum", Severity::Error, "consumer weights sum to " + fmt(weight_sum) + ", expected 1");

  for (int j = 0; j < econ.firm_count(); ++j) {
    double s = 0.0;
    for (const Consumer& c : econ.consumers) s += c.weight * c.shares[j];
    if (std::abs(s - 1.0) > kSumTol)
      report.add("shares-sum", Severity::Error,
                 "weighted shares of firm '" + econ.firms[static_cast<std::size_t>(j)].id + "' sum to " + fmt(s) +
                     ", expected 1");
  }

  // Strong monotonicity witnesses for every good.
  for (int s = k; s < ell; ++s) {
    auto it = econ.monotone_witnesses.find(s);
    if (it == econ.monotone_witnesses.end() || it->second.empty()) {
      report.add("monotone-witness", Severity::Error,
                 "good " + std::to_string(s) + " has no declared strongly monotone consumers");
      continue;
    }
    bool any_monotone = false;
    for (const std::string& id : it->second) {
      const int idx = econ.consumer_index(id);
      if (idx < 0) {
        report.add("monotone-witness", Severity::Error,
                   "good " + std::to_string(s) + " names unknown consumer '" + id + "'");
        continue;
      }
      const Consumer& c = econ.consumers[static_cast<std::size_t>(idx)];
      if (strictly_increasing_in(c.preference, s) && c.weight > 0.0) any_monotone = true;
    }
    if (!any_monotone)
      report.add("monotone-witness-family", Severity::Warning,
                 "no declared witness for good " + std::to_string(s) +
                     " has a utility family strictly increasing in it");
  }

  // Cone pointedness: necessary conditions only.
  std::vector<Vector> all_rays;
  bool has_cone = false, has_polytope = false;
  for (const Technology& t : econ.firms) {
    if (t.kind == TechnologyKind::ZeroFirm && t.offset.cwiseAbs().maxCoeff() > 0.0)
      report.add("zero-firm-offset", Severity::Warning, "zero firm '" + t.id + "' carries a nonzero offset");
    if (t.kind == TechnologyKind::Polytope) {
      has_polytope = true;
      for (const Vector& v : t.generators) {
        const Vector y = t.offset + v;
        if ((y.array() >= 0.0).all() && y.cwiseAbs().maxCoeff() > 0.0)
          report.add("polytope-orthant", Severity::Warning,
                     "polytope firm '" + t.id + "' has a nonnegative nonzero vertex (partial check)");
      }
    }
    if (t.kind != TechnologyKind::ConeRays) continue;
    has_cone = true;
    for (const Vector& g : effective_generators(t)) {
      if ((g.array() >= 0.0).all() && g.cwiseAbs().maxCoeff() > 0.0)
        report.add("cone-pointed", Severity::Error,
                   "aggregate cone meets positive orthant: firm '" + t.id + "' has a nonnegative ray (partial check)");
      all_rays.push_back(g);
    }
  }
  for (std::size_t a = 0; a < all_rays.size(); ++a) {
    for (std::size_t b = a + 1; b < all_rays.size(); ++b) {
      const Vector& g = all_rays[a];
      const Vector& h = all_rays[b];
      const double gn = g.norm(), hn = h.norm();
      if (gn == 0.0 || hn == 0.0) continue;
      if ((g / gn + h / hn).norm() <= 1e-12)
        report.add("cone-pointed", Severity::Error,
                   "aggregate cone contains a line: two rays are opposite (partial check)");
    }
  }
  if (has_cone && has_polytope)
    report.add("aggregate-closedness", Severity::Warning,
               "closedness and convexity of the aggregate production set are not verified for cone/polytope mixtures");

  // Survival: the endowment must be reachable from the box through owned production.
  std::vector<std::string> failing;
  for (const Consumer& c : econ.consumers)
    if (!survives(econ, c)) failing.push_back(c.id);
  if (!econ.consumers.empty()) {
    if (failing.size() == econ.consumers.size()) {
      report.add("survival", Severity::Error, "no consumer can survive on endowment and owned production");
    } else if (!failing.empty()) {
      std::string msg = std::to_string(failing.size()) + " consumer(s) fail the survival check, first '" +
                        failing.front() + "'";
      report.add("survival", Severity::Warning, msg);
    }
  }
  return report;
}

std::vector<double> rescale_factors(const Economy& econ) {
  const double n = static_cast<double>(econ.consumers.size());
  std::vector<double> f;
  f.reserve(econ.consumers.size());
  for (const Consumer& c : econ.consumers) {
    if (!(c.weight > 0.0)) throw ZeroWeight("consumer '" + c.id + "' has zero weight");
    f.push_back(n * c.weight);
  }
  return f;
}

Economy rescale_to_unweighted(const Economy& econ) {
  const std::vector<double> f = rescale_factors(econ);
  Economy out = econ;
  const double n = static_cast<double>(econ.consumers.size());
  for (std::size_t i = 0; i < out.consumers.size(); ++i) {
    Consumer& c = out.consumers[i];
    c.weight = 1.0 / n;
    c.bounds *= f[i];
    c.endowment *= f[i];
    c.shares *= f[i];
    c.preference.scale *= f[i];
  }
  return out;
}

}  // namespace badmarket
