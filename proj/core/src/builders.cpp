#include "badmarket/builders.hpp"

#include <string>

namespace badmarket {

namespace {

std::vector<std::string> all_ids(const Economy& econ) {
  std::vector<std::string> ids;
  for (const Consumer& c : econ.consumers) ids.push_back(c.id);
  return ids;
}

}  // namespace

Economy build_hara_economy(int n) {
  if (n < 1) throw DomainError("hara economy needs n >= 1");
  Economy econ;
  econ.name = "hara-" + std::to_string(n);
  econ.commodities = {2, 1, 1, {"bad", "good"}};
  econ.source_order = {1, 0};
  const double dn = static_cast<double>(n);
  for (int s = 1; s <= n; ++s) {
    Consumer c;
    c.id = std::to_string(s);
    c.weight = 1.0 / dn;
    c.endowment = Vector(2);
    c.endowment << 1.0, 2.0;
    c.shares = Vector(0);
    c.bounds = Vector(2);
    c.bounds << 10.0 * dn, kInf;
    c.preference = PreferenceSpec::quadratic_bad(1, 0, static_cast<double>(s) / dn);
    econ.consumers.push_back(std::move(c));
  }
  econ.monotone_witnesses[1] = all_ids(econ);
  return econ;
}

Economy build_garbage_economy(int n) {
  if (n < 1) throw DomainError("garbage economy needs n >= 1");
  Economy econ;
  econ.name = "garbage-" + std::to_string(n);
  econ.commodities = {3, 1, 1, {"garbage", "human capital", "consumption good"}};
  const double dn = static_cast<double>(n);
  for (int s = 0; s < n; ++s) {
    const double w = (static_cast<double>(s) + 0.5) / dn;
    Consumer c;
    c.id = std::to_string(s + 1);
    c.weight = 1.0 / dn;
    c.endowment = Vector(3);
    c.endowment << 0.0, 2.0 * w, 0.0;
    c.shares = Vector::Ones(2);
    c.bounds = Vector(3);
    c.bounds << w, kInf, kInf;
    const double sigma = (w > 0.5 && w < 0.6) ? 1.0 : -1.0;
    c.preference = PreferenceSpec::log_minus_linear(2, 0, sigma);
    econ.consumers.push_back(std::move(c));
  }
  Vector r1(3), r2(3);
  r1 << 1.0, -1.0, 1.0;
  r2 << -1.0, -1.0, 0.0;
  econ.firms.push_back(Technology::cone({r1}, "1"));
  econ.firms.push_back(Technology::cone({r2}, "2"));
  // Nobody is monotone in human capital; the witness list still names everybody.
  econ.monotone_witnesses[1] = all_ids(econ);
  econ.monotone_witnesses[2] = all_ids(econ);
  return econ;
}

Economy build_one_agent_economy() {
  Economy econ;
  econ.name = "one-agent";
  econ.commodities = {2, 1, 1, {"bad", "good"}};
  econ.source_order = {1, 0};
  Consumer c;
  c.id = "1";
  c.weight = 1.0;
  c.endowment = Vector::Ones(2);
  c.shares = Vector(0);
  c.bounds = Vector(2);
  c.bounds << 2.0, kInf;
  Vector a(2);
  a << -1.0, 1.0;
  c.preference = PreferenceSpec::linear(a);
  econ.consumers.push_back(std::move(c));
  econ.monotone_witnesses[1] = {"1"};
  return econ;
}

}  // namespace badmarket
