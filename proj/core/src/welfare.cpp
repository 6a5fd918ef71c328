#include "badmarket/welfare.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "badmarket/experiments.hpp"
#include "badmarket/parallel.hpp"
#include "random.hpp"

namespace badmarket {

Allocation Allocation::of(const EquilibriumCertificate& cert) {
  return {cert.bundles, cert.productions, cert.price};
}

std::vector<double> utilities(const Economy& econ, const Allocation& alloc) {
  if (alloc.bundles.size() != econ.consumers.size()) throw DimensionError("one bundle per consumer is required");
  const Vector price = alloc.price.size() == econ.ell() ? alloc.price : Vector::Zero(econ.ell());
  const Context ctx = make_context(econ, price, alloc.bundles, alloc.productions);
  std::vector<double> u;
  u.reserve(alloc.bundles.size());
  for (std::size_t i = 0; i < alloc.bundles.size(); ++i)
    u.push_back(utility(econ.consumers[i].preference, alloc.bundles[i], ctx));
  return u;
}

namespace {

constexpr double kStrictMargin = 1e-12;

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] >= b[i])) return false;
    if (a[i] > b[i] + kStrictMargin) strict = true;
  }
  return strict;
}

}  // namespace

bool pareto_dominates(const Economy& econ, const Allocation& a, const Allocation& b) {
  return dominates(utilities(econ, a), utilities(econ, b));
}

UtilityComparison compare_allocations(const Economy& econ, const Allocation& a, const Allocation& b) {
  UtilityComparison cmp;
  cmp.first = utilities(econ, a);
  cmp.second = utilities(econ, b);
  for (std::size_t i = 0; i < cmp.first.size(); ++i) {
    const double mu = econ.consumers[i].weight;
    cmp.weighted_first += mu * cmp.first[i];
    cmp.weighted_second += mu * cmp.second[i];
    cmp.unweighted_first += cmp.first[i];
    cmp.unweighted_second += cmp.second[i];
  }
  cmp.first_dominates = dominates(cmp.first, cmp.second);
  cmp.second_dominates = dominates(cmp.second, cmp.first);
  return cmp;
}

bool check_nonnegative_price_rule(const Economy& econ, const EquilibriumCertificate& cert) {
  const bool any_fd = std::any_of(econ.firms.begin(), econ.firms.end(),
                                  [](const Technology& t) { return t.has_free_disposal(); });
  if (!any_fd) return true;
  return cert.price.size() > 0 && cert.price.minCoeff() >= 0.0;
}

EquilibriumCertificate disguise_free_disposal(const Economy& econ, const EquilibriumCertificate& fd_cert,
                                              double tol) {
  int fd = -1;
  for (int j = 0; j < econ.firm_count() && fd < 0; ++j)
    if (econ.firms[static_cast<std::size_t>(j)].has_free_disposal()) fd = j;
  if (fd < 0) throw PreconditionError("free-disposal-firm: no firm has free disposal");
  for (const Consumer& c : econ.consumers)
    if (c.preference.externality && c.preference.externality->statistic == Statistic::TotalProduction)
      throw PreconditionError("production-independent-preferences: consumer '" + c.id +
                              "' depends on productions");
  if (fd_cert.activities.size() != econ.firms.size())
    throw PreconditionError("certificate-shape: one activity vector per firm is required");
  const Vector w = -aggregate_excess(econ, fd_cert.price, fd_cert.bundles, fd_cert.productions);
  if (w.minCoeff() < -tol) throw PreconditionError("excess-supply-nonnegative: demand exceeds supply");
  const double value = fd_cert.price.dot(w);
  if (std::abs(value) > tol)
    throw PreconditionError("value-of-excess-supply: p . w = " + std::to_string(value) + " is not zero");

  const Technology& t = econ.firms[static_cast<std::size_t>(fd)];
  EquilibriumCertificate out = fd_cert;
  out.free_disposal = false;
  const Eigen::Index explicit_rays = static_cast<Eigen::Index>(t.generators.size());
  Vector& a = out.activities[static_cast<std::size_t>(fd)];
  for (Eigen::Index i = 0; i < w.size(); ++i) a[explicit_rays + i] += std::max(w[i], 0.0);
  out.productions[static_cast<std::size_t>(fd)] = fd_cert.productions[static_cast<std::size_t>(fd)] - w;
  compute_residuals(econ, out);
  return out;
}

TransferEquilibrium hara_transfer_equilibrium(int n) {
  if (n < 1) throw DomainError("transfer equilibrium needs n >= 1");
  const double S = harmonic_number(n);
  TransferEquilibrium te;
  te.price = Vector(2);
  te.price << 0.0, 1.0;
  for (int s = 1; s <= n; ++s) {
    const double w = static_cast<double>(s) / n;
    const double t = (2.0 / S) * (1.0 / (S * w) - 1.0);
    te.transfers.push_back(t);
    Vector x(2);
    x << 0.0, 2.0 + t;
    te.allocation.push_back(x);
  }
  return te;
}

namespace {

// One random candidate; returns nothing when the draw is infeasible.
std::optional<Allocation> draw_candidate(const Economy& econ, const EquilibriumCertificate& cert,
                                         std::mt19937_64& rng) {
  const int ell = econ.ell();
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * detail::unit_uniform(rng); };
  Allocation cand;
  cand.price = cert.price;

  Vector supply = econ.mean_endowment();
  for (std::size_t j = 0; j < econ.firms.size(); ++j) {
    const Technology& t = econ.firms[j];
    Vector a = cert.activities.size() == econ.firms.size() ? cert.activities[j] : Vector();
    if (a.size() != activity_count(t)) a = Vector::Zero(activity_count(t));
    for (Eigen::Index r = 0; r < a.size(); ++r) a[r] = std::max(0.0, a[r] + uniform(-0.1, 0.1) * (1.0 + a[r]));
    if (t.kind == TechnologyKind::Polytope) {
      const double s = a.sum();
      a = s > 0.0 ? Vector(a / s) : Vector::Constant(a.size(), 1.0 / static_cast<double>(a.size()));
    }
    cand.productions.push_back(production_from_activities(t, a));
    supply += cand.productions.back();
  }

  const std::size_t n = econ.consumers.size();
  cand.bundles.assign(n, Vector::Zero(ell));
  const bool redistribute = (rng() & 1U) == 0U;
  if (redistribute) {
    // Dirichlet(1, ..., 1) shares of each commodity's total.
    for (int k = 0; k < ell; ++k) {
      std::vector<double> g(n);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = -std::log(1.0 - detail::unit_uniform(rng));
        sum += g[i];
      }
      const double total = std::max(supply[k], 0.0) * uniform(0.5, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double mu = econ.consumers[i].weight;
        cand.bundles[i][k] = mu > 0.0 ? total * g[i] / sum / mu : 0.0;
      }
    }
  } else {
    const double scale = std::pow(10.0, uniform(-4.0, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < ell; ++k)
        cand.bundles[i][k] = cert.bundles[i][k] + scale * uniform(-1.0, 1.0) * (1.0 + std::abs(cert.bundles[i][k]));
  }

  // Project: clamp to boxes, then scale each overdrawn commodity down.
  for (std::size_t i = 0; i < n; ++i)
    cand.bundles[i] = cand.bundles[i].cwiseMax(0.0).cwiseMin(econ.consumers[i].bounds);
  for (int k = 0; k < ell; ++k) {
    double used = 0.0;
    for (std::size_t i = 0; i < n; ++i) used += econ.consumers[i].weight * cand.bundles[i][k];
    if (used <= supply[k]) continue;
    if (supply[k] < 0.0) return std::nullopt;
    const double f = supply[k] / used;
    for (std::size_t i = 0; i < n; ++i) cand.bundles[i][k] *= f;
  }
  for (int k = 0; k < ell; ++k) {
    double used = 0.0;
    for (std::size_t i = 0; i < n; ++i) used += econ.consumers[i].weight * cand.bundles[i][k];
    if (used > supply[k]) return std::nullopt;
  }
  return cand;
}

}  // namespace

std::optional<AllocationPair> search_pareto_improvement(const Economy& econ, const EquilibriumCertificate& cert,
                                                        long samples, std::uint64_t seed, int threads) {
  if (samples <= 0) return std::nullopt;
  const Allocation original = Allocation::of(cert);
  const std::vector<double> base = utilities(econ, original);
  const int workers = resolve_threads(threads);
  constexpr long kChunk = 4096;
  for (long start = 0; start < samples; start += kChunk) {
    const long count = std::min(kChunk, samples - start);
    std::atomic<long> found{count};
    std::vector<std::optional<Allocation>> hits(static_cast<std::size_t>(workers));
    std::vector<long> hit_index(static_cast<std::size_t>(workers), count);
    const long per = (count + workers - 1) / workers;
    parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
      const long lo = static_cast<long>(w) * per;
      const long hi = std::min(count, lo + per);
      for (long k = lo; k < hi && k < found.load(); ++k) {
        std::mt19937_64 rng = detail::stream(seed, static_cast<std::uint64_t>(start + k));
        std::optional<Allocation> cand = draw_candidate(econ, cert, rng);
        if (!cand) continue;
        if (!dominates(utilities(econ, *cand), base)) continue;
        hits[w] = std::move(cand);
        hit_index[w] = k;
        long cur = found.load();
        while (k < cur && !found.compare_exchange_weak(cur, k)) {
        }
        break;
      }
    });
    std::size_t best = hits.size();
    for (std::size_t w = 0; w < hits.size(); ++w)
      if (hits[w] && (best == hits.size() || hit_index[w] < hit_index[best])) best = w;
    if (best < hits.size()) {
      Allocation improved = std::move(*hits[best]);
      if (pareto_dominates(econ, improved, original)) return AllocationPair{std::move(improved), original};
    }
  }
  return std::nullopt;
}

}  // namespace badmarket
