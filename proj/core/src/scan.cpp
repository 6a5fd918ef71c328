#include <cmath>
#include <cstdlib>

#include "badmarket/demand.hpp"
#include "badmarket/lp.hpp"
#include "badmarket/solver.hpp"

namespace badmarket {

namespace {

void grid_rec(int ell, int pos, int remaining, std::vector<int>& k, const std::vector<int>& signs, int resolution,
              std::vector<Vector>& out) {
  if (pos == ell - 1) {
    for (int sgn : {1, -1}) {
      if (remaining == 0 && sgn == -1) break;
      k[static_cast<std::size_t>(pos)] = sgn * remaining;
      bool ok = true;
      for (int i = 0; i < ell && ok && !signs.empty(); ++i) {
        const int want = signs[static_cast<std::size_t>(i)];
        const int have = k[static_cast<std::size_t>(i)];
        if (want != 0 && have != 0 && (have > 0) != (want > 0)) ok = false;
      }
      if (ok) {
        Vector p(ell);
        for (int i = 0; i < ell; ++i) p[i] = static_cast<double>(k[static_cast<std::size_t>(i)]) / resolution;
        out.push_back(std::move(p));
      }
    }
    return;
  }
  for (int v = -remaining; v <= remaining; ++v) {
    k[static_cast<std::size_t>(pos)] = v;
    grid_rec(ell, pos + 1, remaining - std::abs(v), k, signs, resolution, out);
  }
}

double scan_point(const Economy& econ, const Vector& p) {
  constexpr double ray_tol = 1e-9;
  const int ell = econ.ell();
  Vector base = Vector::Zero(ell);
  std::vector<Vector> cols;
  // Each group of columns carries convex weights (sum to one).
  std::vector<std::pair<int, int>> groups;
  std::vector<double> profit(econ.firms.size(), 0.0);

  for (std::size_t j = 0; j < econ.firms.size(); ++j) {
    const Technology& t = econ.firms[j];
    const double best = max_profit(t, p, ray_tol);
    if (!std::isfinite(best)) return kInf;
    profit[j] = best;
    base -= t.offset;
    if (t.kind == TechnologyKind::ConeRays) {
      for (const Vector& g : effective_generators(t))
        if (std::abs(p.dot(g)) <= ray_tol) cols.push_back(-g);
    } else if (t.kind == TechnologyKind::Polytope) {
      const int first = static_cast<int>(cols.size());
      for (int v : supply_active_set(t, p, ray_tol)) cols.push_back(-t.generators[static_cast<std::size_t>(v)]);
      groups.emplace_back(first, static_cast<int>(cols.size()) - first);
    }
  }
  const Context ctx = Context::neutral(ell);
  for (const Consumer& c : econ.consumers) {
    double inc = p.dot(c.endowment);
    for (std::size_t j = 0; j < profit.size(); ++j) inc += c.shares[static_cast<Eigen::Index>(j)] * profit[j];
    base -= c.weight * c.endowment;
    try {
      if (has_set_valued_demand(c.preference)) {
        const std::vector<Vector> verts = linear_optimal_vertices(c, p, inc);
        const int first = static_cast<int>(cols.size());
        for (const Vector& v : verts) cols.push_back(c.weight * v);
        groups.emplace_back(first, static_cast<int>(verts.size()));
      } else {
        base += c.weight * demand(c, p, inc, ctx);
      }
    } catch (const Error&) {
      return kInf;
    }
  }
  if (cols.empty()) return base.lpNorm<Eigen::Infinity>();

  // min || base + C w || with w >= 0 and group sums pinned by heavy rows.
  constexpr double pin = 1e6;
  const auto ng = static_cast<Eigen::Index>(groups.size());
  Matrix a = Matrix::Zero(ell + ng, static_cast<Eigen::Index>(cols.size()));
  Vector b = Vector::Zero(ell + ng);
  for (std::size_t k = 0; k < cols.size(); ++k) a.col(static_cast<Eigen::Index>(k)).head(ell) = cols[k];
  b.head(ell) = -base;
  for (Eigen::Index g = 0; g < ng; ++g) {
    a.row(ell + g).segment(groups[static_cast<std::size_t>(g)].first, groups[static_cast<std::size_t>(g)].second).setConstant(pin);
    b[ell + g] = pin;
  }
  Vector w = lp::nnls(a, b);
  for (const auto& [first, len] : groups) {
    const double s = w.segment(first, len).sum();
    if (s > 0.0) w.segment(first, len) /= s;
  }
  Vector ex = base;
  for (std::size_t k = 0; k < cols.size(); ++k) ex += w[static_cast<Eigen::Index>(k)] * cols[k];
  return ex.lpNorm<Eigen::Infinity>();
}

}  // namespace

std::vector<Vector> sphere_grid(int ell, int resolution, const std::vector<int>& signs) {
  if (ell < 1 || resolution < 1) throw DomainError("sphere grid needs ell >= 1 and resolution >= 1");
  if (!signs.empty() && static_cast<int>(signs.size()) != ell) throw DimensionError("sign pattern length differs from ell");
  std::vector<Vector> out;
  std::vector<int> k(static_cast<std::size_t>(ell), 0);
  grid_rec(ell, 0, resolution, k, signs, resolution, out);
  return out;
}

std::vector<ScanPoint> excess_map_scan(const Economy& econ, const std::vector<Vector>& prices) {
  check_dimensions(econ);
  std::vector<ScanPoint> out;
  out.reserve(prices.size());
  for (const Vector& p : prices) {
    if (p.size() != econ.ell()) throw DimensionError("scan price dimension differs from ell");
    out.push_back({p, scan_point(econ, p)});
  }
  return out;
}

}  // namespace badmarket
