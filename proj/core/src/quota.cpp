#include "badmarket/quota.hpp"

#include <cmath>

namespace badmarket {

QuotaScheme QuotaScheme::zero(int regulated_count, int firms) {
  QuotaScheme s;
  s.regulated_count = regulated_count;
  s.government = Vector::Zero(regulated_count);
  s.firm_quotas.assign(static_cast<std::size_t>(firms), Vector::Zero(regulated_count));
  return s;
}

Vector QuotaScheme::aggregate() const {
  Vector m = government.size() == regulated_count ? government : Vector::Zero(regulated_count);
  for (const Vector& q : firm_quotas) m += q;
  return m;
}

void check_scheme(const Economy& econ, const QuotaScheme& s) {
  const int t = s.regulated_count;
  if (t < 0 || t > econ.ell()) throw DimensionError("regulated_count must lie in [0, ell]");
  if (s.government.size() != 0 && s.government.size() != t)
    throw DimensionError("government quota must have regulated_count entries");
  if (static_cast<int>(s.firm_quotas.size()) != econ.firm_count())
    throw DimensionError("one quota per economy firm is required");
  for (const Vector& q : s.firm_quotas) {
    if (q.size() != t) throw DimensionError("firm quota must have regulated_count entries");
    if ((q.array() > 0.0).any()) throw DomainError("quotas must be nonpositive");
  }
  if ((s.government.array() > 0.0).any()) throw DomainError("quotas must be nonpositive");
  if (!s.government_shares.empty() && s.government_shares.size() != econ.consumers.size())
    throw DimensionError("government shares must list one entry per consumer");
}

Vector embed_regulated(const Vector& m, int ell) {
  if (m.size() > ell) throw DimensionError("quota longer than the commodity space");
  Vector e = Vector::Zero(ell);
  e.head(m.size()) = m;
  return e;
}

Vector compliance_target(const QuotaScheme& scheme, int ell) {
  if (scheme.regulated_count < 0 || scheme.regulated_count > ell)
    throw DimensionError("regulated_count must lie in [0, ell]");
  return embed_regulated(scheme.aggregate(), ell);
}

namespace {

bool government_active(const QuotaScheme& s) { return s.government.size() > 0 && (s.government.array() != 0.0).any(); }

}  // namespace

Economy shift_economy(const Economy& econ, const QuotaScheme& scheme) {
  check_scheme(econ, scheme);
  const int ell = econ.ell();
  Economy out = econ;
  for (std::size_t j = 0; j < out.firms.size(); ++j) out.firms[j].offset += embed_regulated(scheme.firm_quotas[j], ell);
  if (government_active(scheme)) {
    Technology gov = Technology::zero_firm(ell, "government");
    gov.offset = embed_regulated(scheme.government, ell);
    out.firms.push_back(std::move(gov));
    for (std::size_t i = 0; i < out.consumers.size(); ++i) {
      Consumer& c = out.consumers[i];
      Vector shares(c.shares.size() + 1);
      shares.head(c.shares.size()) = c.shares;
      shares[c.shares.size()] = scheme.government_shares.empty() ? 1.0 : scheme.government_shares[i];
      c.shares = shares;
    }
  }
  const Vector target = compliance_target(scheme, ell);
  for (Consumer& c : out.consumers)
    if (c.preference.externality) c.preference.externality->production_correction = target;
  return out;
}

EquilibriumCertificate shifted_certificate(const Economy& econ, const QuotaScheme& scheme,
                                           const EquilibriumCertificate& cert) {
  const int ell = econ.ell();
  EquilibriumCertificate out = cert;
  for (std::size_t j = 0; j < out.productions.size() && j < scheme.firm_quotas.size(); ++j)
    out.productions[j] += embed_regulated(scheme.firm_quotas[j], ell);
  if (government_active(scheme)) {
    out.productions.push_back(embed_regulated(scheme.government, ell));
    out.activities.emplace_back(0);
  }
  return out;
}

QuotaResult solve_quota(const Economy& econ, const QuotaScheme& scheme, const SolverConfig& cfg) {
  const Economy shifted = shift_economy(econ, scheme);
  SolveResult res = solve_equilibrium(shifted, cfg);
  if (auto* nc = std::get_if<NoConvergence>(&res)) return *nc;
  EquilibriumCertificate cert = std::get<EquilibriumCertificate>(std::move(res));
  const int ell = econ.ell();
  const int t = scheme.regulated_count;
  QuotaCertificate q;
  cert.productions.resize(econ.firms.size());
  cert.activities.resize(econ.firms.size());
  for (std::size_t j = 0; j < econ.firms.size(); ++j) {
    cert.productions[j] -= embed_regulated(scheme.firm_quotas[j], ell);
    q.firm_rents.push_back(cert.price.head(t).dot(scheme.firm_quotas[j]));
  }
  q.government_rent = scheme.government.size() == t ? cert.price.head(t).dot(scheme.government) : 0.0;
  q.compliance_residual = aggregate_excess(econ, cert.price, cert.bundles, cert.productions) -
                          compliance_target(scheme, ell);
  q.base = std::move(cert);
  return q;
}

VerificationReport verify_quota(const Economy& econ, const QuotaScheme& scheme, const QuotaCertificate& cert,
                                double tol) {
  VerificationReport rep;
  Economy shifted;
  try {
    shifted = shift_economy(econ, scheme);
    if (cert.base.productions.size() != econ.firms.size() || cert.base.price.size() != econ.ell())
      throw DimensionError("certificate does not match the economy");
  } catch (const Error& e) {
    rep.consistency_ok = rep.demand_ok = rep.profit_ok = rep.clearing_ok = rep.promotion_ok = false;
    rep.messages.push_back(e.what());
    return rep;
  }
  rep = verify_equilibrium(shifted, shifted_certificate(econ, scheme, cert.base), tol);
  const int t = scheme.regulated_count;
  const Vector pt = cert.base.price.head(t);
  bool rents_ok = cert.firm_rents.size() == scheme.firm_quotas.size();
  for (std::size_t j = 0; rents_ok && j < cert.firm_rents.size(); ++j)
    rents_ok = std::abs(cert.firm_rents[j] - pt.dot(scheme.firm_quotas[j])) <= tol;
  const double gov = scheme.government.size() == t ? pt.dot(scheme.government) : 0.0;
  rents_ok = rents_ok && std::abs(cert.government_rent - gov) <= tol;
  if (!rents_ok) {
    rep.consistency_ok = false;
    rep.messages.push_back("stated rents differ from proj_t(p) . m");
  }
  if (!rep.clearing_ok) rep.messages.push_back("allocation is not quota-compliant");
  return rep;
}

}  // namespace badmarket
