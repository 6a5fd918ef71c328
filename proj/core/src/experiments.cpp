#include "badmarket/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "badmarket/builders.hpp"
#include "badmarket/parallel.hpp"

namespace badmarket {

double harmonic_number(long n) {
  if (n < 0) throw DomainError("harmonic number of a negative index");
  double sum = 0.0, comp = 0.0;
  for (long s = n; s >= 1; --s) {
    const double term = 1.0 / static_cast<double>(s);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

EquilibriumCertificate hara_oracle(int n) {
  if (n < 1) throw DomainError("hara oracle needs n >= 1");
  const double S = harmonic_number(n);
  EquilibriumCertificate cert;
  cert.price = Vector(2);
  cert.price << -2.0 / S, 1.0;
  cert.price /= 1.0 + 2.0 / S;
  for (int s = 1; s <= n; ++s) {
    const double w = static_cast<double>(s) / n;
    const double bad = 1.0 / (S * w);
    Vector x(2);
    x << bad, 2.0 + (2.0 / S) * (bad - 1.0);
    cert.bundles.push_back(x);
  }
  compute_residuals(build_hara_economy(n), cert);
  return cert;
}

Vector GarbageReference::demand(double w) const {
  Vector x = Vector::Zero(3);
  if (w <= 1.0 / 3.0) {
    x << w, 0.0, 1.5 * w;
  } else if (w <= 0.5) {
    x << 1.0 - 2.0 * w, 0.0, 0.5;
  } else if (w < 0.6) {
    x << w, 0.0, 1.5 * w;
  } else {
    x << 0.0, 0.0, w;
  }
  return x;
}

GarbageReference garbage_oracle() {
  GarbageReference ref;
  ref.price = Vector(3);
  ref.price << -0.25, 0.25, 0.5;
  ref.aggregate_garbage = 83.0 / 600.0;
  ref.aggregate_good = 683.0 / 1200.0;
  Vector y1(3), y2(3);
  y1 << 683.0 / 1200.0, -683.0 / 1200.0, 683.0 / 1200.0;
  y2 << -517.0 / 1200.0, -517.0 / 1200.0, 0.0;
  ref.productions = {y1, y2};
  ref.activities = Vector(2);
  ref.activities << 683.0 / 1200.0, 517.0 / 1200.0;
  return ref;
}

std::pair<double, double> garbage_quadrature(long points) {
  if (points < 1) throw DomainError("quadrature needs at least one point");
  const GarbageReference ref = garbage_oracle();
  double g = 0.0, c = 0.0, gc = 0.0, cc = 0.0;
  auto add = [](double& sum, double& comp, double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  const double h = 1.0 / static_cast<double>(points);
  for (long k = 0; k < points; ++k) {
    const Vector x = ref.demand((static_cast<double>(k) + 0.5) * h);
    add(g, gc, x[0]);
    add(c, cc, x[2]);
  }
  return {g * h, c * h};
}

double garbage_aggregate_allowance(int n) { return 1.0 / n; }

int ui_cutoff(int n) {
  if (n < 1) throw DomainError("ui cutoff needs n >= 1");
  if (n == 1) return 1;
  const int a = static_cast<int>(std::ceil(n / std::log(static_cast<double>(n))));
  return std::min(a, n);
}

double uniform_integrability_share(const Economy& econ, const EquilibriumCertificate& cert, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("fraction must lie in (0, 1]");
  if (cert.bundles.size() != econ.consumers.size()) throw DimensionError("one bundle per consumer is required");
  std::vector<std::size_t> order(cert.bundles.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cert.bundles[a][0] > cert.bundles[b][0]; });
  double total = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) total += econ.consumers[i].weight * cert.bundles[i][0];
  if (!(total > 0.0)) return 1.0;
  double weight = 0.0, captured = 0.0;
  for (std::size_t i : order) {
    const double mu = econ.consumers[i].weight;
    const double bad = cert.bundles[i][0];
    if (weight + mu >= fraction) {
      if (mu > 0.0) captured += (fraction - weight) * bad;
      break;
    }
    weight += mu;
    captured += mu * bad;
  }
  return captured / total;
}

FamilyKind family_kind_from_string(const std::string& name) {
  if (name == "hara") return FamilyKind::Hara;
  if (name == "garbage") return FamilyKind::Garbage;
  throw DomainError("unknown family '" + name + "' (expected hara or garbage)");
}

namespace {

FamilyRecord run_one(FamilyKind kind, int n, const SolverConfig& cfg) {
  FamilyRecord rec;
  rec.n = n;
  const auto t0 = std::chrono::steady_clock::now();
  const Economy econ = kind == FamilyKind::Hara ? build_hara_economy(n) : build_garbage_economy(n);
  SolveResult res = solve_equilibrium(econ, cfg);
  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (auto* nc = std::get_if<NoConvergence>(&res)) {
    rec.note = "no convergence: " + nc->reason;
    return rec;
  }
  EquilibriumCertificate cert = std::get<EquilibriumCertificate>(std::move(res));
  rec.verified = verify_equilibrium(econ, cert, Tolerances{cfg.clearing_tol, cfg.optimality_tol}).passed();
  const double frac = static_cast<double>(ui_cutoff(n)) / n;
  rec.ui_share = uniform_integrability_share(econ, cert, frac);
  if (kind == FamilyKind::Hara) {
    const EquilibriumCertificate ref = hara_oracle(n);
    rec.price_gap = (cert.price - ref.price).lpNorm<Eigen::Infinity>();
    double bundle_gap = 0.0;
    for (std::size_t i = 0; i < ref.bundles.size(); ++i)
      bundle_gap = std::max(bundle_gap, (cert.bundles[i] - ref.bundles[i]).lpNorm<Eigen::Infinity>());
    rec.aggregate_gap = bundle_gap;
    rec.oracle_gap = std::max(rec.price_gap, bundle_gap);
    rec.allowance = 1e-8;
  } else {
    const GarbageReference ref = garbage_oracle();
    rec.price_gap = (cert.price - ref.price).lpNorm<Eigen::Infinity>();
    Vector agg = Vector::Zero(3);
    for (std::size_t i = 0; i < cert.bundles.size(); ++i) agg += econ.consumers[i].weight * cert.bundles[i];
    rec.aggregate_gap = std::max(std::abs(agg[0] - ref.aggregate_garbage), std::abs(agg[2] - ref.aggregate_good));
    rec.oracle_gap = std::max(rec.price_gap, rec.aggregate_gap);
    rec.allowance = garbage_aggregate_allowance(n);
  }
  rec.certificate = std::move(cert);
  if (!rec.verified) rec.note = "certificate failed verification";
  return rec;
}

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<FamilyRecord> run_family(FamilyKind kind, const std::vector<int>& ns, const SolverConfig& cfg) {
  if (ns.empty()) throw DomainError("family run needs at least one n");
  for (int n : ns)
    if (n < 1) throw DomainError("family sizes must be positive");
  const int threads = resolve_threads(cfg.threads);
  SolverConfig inner = cfg;
  if (threads > 1) inner.threads = 1;
  std::vector<FamilyRecord> out(ns.size());
  parallel_for(ns.size(), threads, [&](std::size_t k) {
    try {
      out[k] = run_one(kind, ns[k], inner);
    } catch (const Error& e) {
      out[k] = FamilyRecord{};
      out[k].n = ns[k];
      out[k].note = e.what();
    }
  });
  return out;
}

std::string csv_string(const std::vector<FamilyRecord>& records, bool with_runtime) {
  Eigen::Index ell = 0;
  for (const FamilyRecord& r : records)
    if (r.certificate) ell = std::max(ell, r.certificate->price.size());
  std::string out = "n,verified";
  for (Eigen::Index i = 0; i < ell; ++i) out += ",p" + std::to_string(i);
  out += ",oracle_gap,price_gap,aggregate_gap,ui_share,clearing_residual,optimality_gap,profit_gap";
  if (with_runtime) out += ",runtime_ms";
  out += "\n";
  for (const FamilyRecord& r : records) {
    out += std::to_string(r.n) + "," + (r.verified ? "1" : "0");
    for (Eigen::Index i = 0; i < ell; ++i)
      out += "," + (r.certificate && i < r.certificate->price.size() ? num17(r.certificate->price[i]) : std::string());
    if (r.certificate) {
      const Residuals& res = r.certificate->residuals;
      out += "," + num17(r.oracle_gap) + "," + num17(r.price_gap) + "," + num17(r.aggregate_gap) + "," +
             num17(r.ui_share) + "," + num17(res.clearing.size() ? res.clearing.lpNorm<Eigen::Infinity>() : 0.0) +
             "," + num17(res.worst_optimality_gap) + "," + num17(res.worst_profit_gap);
    } else {
      out += ",,,,,,,";
    }
    if (with_runtime) out += "," + num17(r.runtime_ms);
    out += "\n";
  }
  return out;
}

void emit_csv(const std::vector<FamilyRecord>& records, const std::string& path, bool with_runtime) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IOError("cannot open '" + path + "' for writing");
  f << csv_string(records, with_runtime);
  if (!f) throw IOError("failed writing '" + path + "'");
}

}  // namespace badmarket
