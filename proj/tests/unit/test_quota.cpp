#include "badmarket/builders.hpp"
#include "badmarket/io.hpp"
#include "badmarket/quota.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace badmarket;
using testing::vec;

namespace {

QuotaCertificate solved_quota(const Economy& econ, const QuotaScheme& scheme, const SolverConfig& cfg = {}) {
  QuotaResult r = solve_quota(econ, scheme, cfg);
  if (auto* nc = std::get_if<NoConvergence>(&r)) FAIL("no convergence: " << nc->reason);
  return std::get<QuotaCertificate>(std::move(r));
}

EquilibriumCertificate solved(const Economy& econ, const SolverConfig& cfg = {}) {
  SolveResult r = solve_equilibrium(econ, cfg);
  if (auto* nc = std::get_if<NoConvergence>(&r)) FAIL("no convergence: " << nc->reason);
  return std::get<EquilibriumCertificate>(std::move(r));
}

QuotaScheme garbage_scheme() {
  QuotaScheme s = QuotaScheme::zero(1, 2);
  s.firm_quotas[0] = vec({-0.06});
  s.firm_quotas[1] = vec({-0.04});
  return s;
}

QuotaScheme government_scheme(double m) {
  QuotaScheme s = QuotaScheme::zero(1, 0);
  s.government = vec({m});
  return s;
}

}  // namespace

TEST_CASE("compliance target") {
  QuotaScheme s = QuotaScheme::zero(1, 3);
  s.firm_quotas = {vec({-0.05}), vec({-0.03}), vec({-0.02})};
  CHECK(testing::max_abs_diff(compliance_target(s, 3), vec({-0.10, 0.0, 0.0})) <= 1e-15);
  CHECK(compliance_target(QuotaScheme::zero(0, 3), 3) == Vector::Zero(3));
  CHECK(compliance_target(government_scheme(-1.0), 2) == vec({-1.0, 0.0}));
  CHECK_THROWS_AS(compliance_target(QuotaScheme::zero(4, 0), 3), DimensionError);
}

TEST_CASE("scheme checks") {
  const Economy e = build_garbage_economy(10);
  QuotaScheme s = garbage_scheme();
  CHECK_NOTHROW(check_scheme(e, s));
  s.firm_quotas[0] = vec({0.01});
  CHECK_THROWS_AS(check_scheme(e, s), DomainError);
  s.firm_quotas[0] = vec({-0.01, -0.01});
  CHECK_THROWS_AS(check_scheme(e, s), DimensionError);
  s = garbage_scheme();
  s.firm_quotas.pop_back();
  CHECK_THROWS_AS(check_scheme(e, s), DimensionError);
  s = garbage_scheme();
  s.government = vec({0.5});
  CHECK_THROWS_AS(check_scheme(e, s), DomainError);
}

TEST_CASE("shift economy") {
  const Economy e = build_garbage_economy(10);
  SUBCASE("zero quotas leave the economy unchanged") {
    const Economy shifted = shift_economy(e, QuotaScheme::zero(1, 2));
    CHECK(serialize_economy(shifted) == serialize_economy(e));
  }
  SUBCASE("government quota adds an offset zero firm") {
    QuotaScheme s = QuotaScheme::zero(1, 2);
    s.government = vec({-0.1});
    const Economy shifted = shift_economy(e, s);
    REQUIRE(shifted.firms.size() == 3);
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(shifted.firms[j].offset == e.firms[j].offset);
      CHECK(shifted.firms[j].generators == e.firms[j].generators);
    }
    CHECK(shifted.firms[2].id == "government");
    CHECK(shifted.firms[2].offset == vec({-0.1, 0.0, 0.0}));
    CHECK(max_profit(shifted.firms[2], vec({-0.25, 0.25, 0.5})) == doctest::Approx(0.025));
    for (const Consumer& c : shifted.consumers) CHECK(c.shares.size() == 3);
  }
  SUBCASE("firm quotas move firm offsets") {
    const Economy shifted = shift_economy(e, garbage_scheme());
    REQUIRE(shifted.firms.size() == 2);
    CHECK(shifted.firms[0].offset == vec({-0.06, 0.0, 0.0}));
    CHECK(shifted.firms[1].offset == vec({-0.04, 0.0, 0.0}));
  }
}

TEST_CASE("zero quotas reproduce the plain equilibrium bit for bit") {
  const Economy e = build_garbage_economy(120);
  const QuotaCertificate q = solved_quota(e, QuotaScheme::zero(0, 2));
  const EquilibriumCertificate plain = solved(e);
  CHECK(serialize_certificate(e, q.base) == serialize_certificate(e, plain));
  CHECK(q.government_rent == 0.0);
  for (double r : q.firm_rents) CHECK(r == 0.0);
}

TEST_CASE("garbage economy with regulated garbage") {
  const Economy e = build_garbage_economy(120);
  const QuotaScheme s = garbage_scheme();
  const QuotaCertificate q = solved_quota(e, s);
  CHECK(q.compliance_residual.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(verify_quota(e, s, q, 1e-8).passed());

  SUBCASE("round trip through the shifted economy") {
    const Economy shifted = shift_economy(e, s);
    const EquilibriumCertificate direct = solved(shifted);
    CHECK(q.base.price == direct.price);
    CHECK(q.base.bundles == direct.bundles);
    for (std::size_t j = 0; j < e.firms.size(); ++j) {
      const Vector m = embed_regulated(s.firm_quotas[j], e.ell());
      CHECK(q.base.productions[j] == direct.productions[j] - m);
      CHECK(testing::max_abs_diff(direct.productions[j] - q.base.productions[j], m) <= 1e-15);
    }
  }
  SUBCASE("rent accounting") {
    const double pt = q.base.price[0];
    CHECK(q.firm_rents[0] == doctest::Approx(pt * -0.06));
    CHECK(q.firm_rents[1] == doctest::Approx(pt * -0.04));
    const std::vector<double> inc = incomes(e, q.base.price, q.base.productions, q.firm_rents);
    double lhs = 0.0;
    for (std::size_t i = 0; i < e.consumers.size(); ++i)
      lhs += e.consumers[i].weight * (inc[i] - q.base.price.dot(e.consumers[i].endowment));
    double rhs = 0.0;
    for (std::size_t j = 0; j < e.firms.size(); ++j) rhs += q.base.price.dot(q.base.productions[j]) + q.firm_rents[j];
    CHECK(std::abs(lhs - rhs) <= 1e-9);
  }
  SUBCASE("a different split of the same total is a different scheme") {
    QuotaScheme other = QuotaScheme::zero(1, 2);
    other.firm_quotas[0] = vec({-0.1});
    other.firm_quotas[1] = vec({0.0});
    const VerificationReport rep = verify_quota(e, other, q, 1e-8);
    CHECK_FALSE(rep.passed());
    CHECK_FALSE(rep.consistency_ok);
  }
  SUBCASE("a different total fails compliance") {
    QuotaScheme other = garbage_scheme();
    other.firm_quotas[1] = vec({-0.14});
    QuotaCertificate tampered = q;
    tampered.firm_rents[1] = q.base.price[0] * -0.14;
    const VerificationReport rep = verify_quota(e, other, tampered, 1e-8);
    CHECK_FALSE(rep.clearing_ok);
  }
  SUBCASE("tampered rents") {
    QuotaCertificate tampered = q;
    tampered.firm_rents[0] += 1e-3;
    CHECK_FALSE(verify_quota(e, s, tampered, 1e-8).consistency_ok);
  }
}

TEST_CASE("one-agent economy with a government quota") {
  const Economy e = build_one_agent_economy();
  const QuotaScheme s = government_scheme(-0.5);
  const QuotaCertificate q = solved_quota(e, s);
  CHECK(testing::max_abs_diff(q.base.price, vec({-0.5, 0.5})) <= 1e-10);
  CHECK(q.government_rent == doctest::Approx(0.25));
  CHECK(testing::max_abs_diff(aggregate_excess(e, q.base.price, q.base.bundles, q.base.productions),
                              vec({-0.5, 0.0})) <= 1e-9);
  CHECK(testing::max_abs_diff(q.base.bundles[0], vec({0.5, 1.0})) <= 1e-9);
  CHECK(verify_quota(e, s, q, 1e-8).passed());

  SUBCASE("brute-force scan of the shifted economy") {
    const Economy shifted = shift_economy(e, s);
    const auto scan = excess_map_scan(shifted, sphere_grid(2, 1000));
    const auto best = std::min_element(scan.begin(), scan.end(),
                                       [](const ScanPoint& a, const ScanPoint& b) { return a.residual < b.residual; });
    CHECK(best->residual <= 1e-9);
    CHECK(testing::max_abs_diff(best->price, q.base.price) <= 1e-3);
    int zeros = 0;
    for (const ScanPoint& sp : scan) zeros += sp.residual <= 1e-9;
    CHECK(zeros == 1);
  }
  SUBCASE("rents left out of income break demand optimality") {
    ClearingTarget target;
    target.target = vec({-0.5, 0.0});
    const VerificationReport rep = verify_equilibrium(e, q.base, 1e-8, target);
    CHECK_FALSE(rep.demand_ok);
  }
}

TEST_CASE("quota certificate serialization") {
  const Economy e = build_one_agent_economy();
  const QuotaScheme s = government_scheme(-0.5);
  const QuotaCertificate q = solved_quota(e, s);
  const QuotaCertificate back = load_quota_certificate(e, serialize_quota_certificate(e, q));
  CHECK(back.base.price == q.base.price);
  CHECK(back.government_rent == q.government_rent);
  CHECK(verify_quota(e, s, back, 1e-8).passed());
  const QuotaScheme loaded = load_quota(e, read_text_file(testing::data_path("one_agent_quota.json")));
  CHECK(loaded.government == s.government);
  CHECK(loaded.regulated_count == 1);
}
