#include <cmath>
#include <string>

#include "badmarket/builders.hpp"
#include "badmarket/economy.hpp"
#include "badmarket/io.hpp"
#include "badmarket/solver.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace badmarket;
using testing::vec;

namespace {

const char* kMinimal = R"({
  "commodities": {"ell": 2, "bad_count": 1, "regulated_count": 0, "labels": ["bad", "good"]},
  "consumers": [
    {"id": "a", "endowment": [1, 2], "bounds": [5, null],
     "preference": {"family": "quadratic_bad", "params": {"good": 1, "bad": 0, "c": 1.0}}}
  ],
  "monotone_witnesses": {"1": ["a"]}
})";

// Hand-written garbage document for n cells, independent of the builder.
std::string garbage_document(int n) {
  std::string consumers;
  for (int s = 0; s < n; ++s) {
    const double w = (s + 0.5) / n;
    const double sigma = (w > 0.5 && w < 0.6) ? 1.0 : -1.0;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  R"({"id": "%d", "weight": %.17g, "endowment": [0, %.17g, 0], "shares": [1, 1],
                      "bounds": [%.17g, null, null],
                      "preference": {"family": "log_minus_linear", "params": {"good": 2, "bad": 0, "sigma": %g}}})",
                  s + 1, 1.0 / n, 2.0 * w, w, sigma);
    if (s) consumers += ",";
    consumers += buf;
  }
  std::string ids;
  for (int s = 1; s <= n; ++s) ids += (s > 1 ? ",\"" : "\"") + std::to_string(s) + "\"";
  return R"({"commodities": {"ell": 3, "bad_count": 1, "regulated_count": 1},
             "firms": [{"id": "1", "kind": "cone", "generators": [[1, -1, 1]]},
                       {"id": "2", "kind": "cone", "generators": [[-1, -1, 0]]}],
             "consumers": [)" +
         consumers + R"(], "monotone_witnesses": {"1": [)" + ids + "], \"2\": [" + ids + "]}}";
}

void require_same_economy(const Economy& a, const Economy& b) {
  REQUIRE(a.ell() == b.ell());
  CHECK(a.commodities.bad_count == b.commodities.bad_count);
  CHECK(a.commodities.regulated_count == b.commodities.regulated_count);
  REQUIRE(a.consumers.size() == b.consumers.size());
  for (std::size_t i = 0; i < a.consumers.size(); ++i) {
    const Consumer& x = a.consumers[i];
    const Consumer& y = b.consumers[i];
    CHECK(x.id == y.id);
    CHECK(x.weight == y.weight);
    CHECK(x.endowment == y.endowment);
    CHECK(x.shares == y.shares);
    CHECK(x.bounds == y.bounds);
    CHECK(x.preference.family == y.preference.family);
    CHECK(x.preference.good == y.preference.good);
    CHECK(x.preference.bad == y.preference.bad);
    CHECK(x.preference.coefficient == y.preference.coefficient);
    CHECK(x.preference.weights == y.preference.weights);
    CHECK(x.preference.shifts == y.preference.shifts);
    CHECK(x.preference.scale == y.preference.scale);
    REQUIRE(x.preference.externality.has_value() == y.preference.externality.has_value());
    if (x.preference.externality) {
      CHECK(x.preference.externality->gamma == y.preference.externality->gamma);
      CHECK(x.preference.externality->statistic == y.preference.externality->statistic);
    }
  }
  REQUIRE(a.firms.size() == b.firms.size());
  for (std::size_t j = 0; j < a.firms.size(); ++j) {
    CHECK(a.firms[j].id == b.firms[j].id);
    CHECK(a.firms[j].kind == b.firms[j].kind);
    CHECK(a.firms[j].offset == b.firms[j].offset);
    CHECK(a.firms[j].free_disposal == b.firms[j].free_disposal);
    REQUIRE(a.firms[j].generators.size() == b.firms[j].generators.size());
    for (std::size_t r = 0; r < a.firms[j].generators.size(); ++r)
      CHECK(a.firms[j].generators[r] == b.firms[j].generators[r]);
  }
  CHECK(a.monotone_witnesses == b.monotone_witnesses);
}

Economy mixed_economy() {
  Economy e;
  e.name = "mixed";
  e.commodities = {3, 1, 1, {"smoke", "bread", "wine"}};
  Consumer a;
  a.id = "a";
  a.weight = 0.25;
  a.endowment = vec({0.0, 1.0, 2.0});
  a.shares = vec({2.0, 0.0, 1.0});
  a.bounds = vec({3.0, kInf, 7.5});
  a.preference = PreferenceSpec::cobb_douglas(vec({0.0, 0.4, 0.6}), vec({0.0, 0.1, 0.0}));
  Externality ext;
  ext.gamma = vec({0.3, 0.0, 0.0});
  ext.statistic = Statistic::TotalProduction;
  a.preference.externality = ext;
  Consumer b;
  b.id = "b";
  b.weight = 0.75;
  b.endowment = vec({0.5, 0.25, 0.0});
  b.shares = vec({2.0 / 3.0, 4.0 / 3.0, 1.0});
  b.bounds = vec({1.0, 4.0, kInf});
  b.preference = PreferenceSpec::linear(vec({-1.0, 0.5, 0.5}));
  e.consumers = {a, b};
  Technology cone = Technology::cone({vec({1.0, -1.0, 0.0})}, "c", true);
  Technology poly = Technology::polytope({vec({0.0, 0.0, 0.0}), vec({0.5, -1.0, 0.25})}, "p");
  poly.offset = vec({-0.1, 0.0, 0.0});
  e.firms = {cone, poly, Technology::zero_firm(3, "g")};
  e.monotone_witnesses[1] = {"a", "b"};
  e.monotone_witnesses[2] = {"a"};
  return e;
}

}  // namespace

TEST_CASE("minimal document loads with defaults") {
  const Economy e = load_economy(kMinimal);
  CHECK(e.ell() == 2);
  CHECK(e.consumer_count() == 1);
  CHECK(e.consumers[0].weight == 1.0);
  CHECK(e.consumers[0].endowment == vec({1.0, 2.0}));
  CHECK(std::isinf(e.consumers[0].bounds[1]));
  CHECK(e.consumers[0].preference.family == Family::QuadraticBad);
  CHECK(validate_economy(e).passed);
}

TEST_CASE("garbage document matches the builder") {
  for (int n : {1, 4, 10}) {
    const Economy doc = load_economy(garbage_document(n));
    Economy built = build_garbage_economy(n);
    require_same_economy(doc, built);
  }
}

TEST_CASE("malformed and inconsistent documents") {
  CHECK_THROWS_AS(load_economy("{not json"), ParseError);
  CHECK_THROWS_AS(load_economy(R"({"consumers": []})"), SchemaError);
  CHECK_THROWS_AS(load_economy(R"({"commodities": {"ell": 2}, "consumers": [
      {"endowment": [1, 2, 3], "preference": {"family": "linear", "params": {"coefficients": [1, 1]}}}]})"),
                  SchemaError);
  CHECK_THROWS_AS(load_economy(R"({"commodities": {"ell": 2}, "consumers": [
      {"endowment": [1, 2], "preference": {"family": "quadratic_bad", "params": {"good": 5, "bad": 0, "c": 1}}}]})"),
                  SchemaError);
  CHECK_THROWS_AS(load_economy(R"({"commodities": {"ell": 2}, "consumers": [
      {"endowment": [1, 2], "preference": {"family": "nonesuch"}}]})"),
                  SchemaError);
}

TEST_CASE("shares summing to 0.9 load but fail validation") {
  const char* doc = R"({
    "commodities": {"ell": 2, "bad_count": 0},
    "firms": [{"id": "f", "kind": "cone", "generators": [[-1, 1]]}],
    "consumers": [
      {"id": "a", "endowment": [1, 1], "shares": [0.9], "preference": {"family": "linear", "params": {"coefficients": [1, 1]}}},
      {"id": "b", "endowment": [1, 1], "shares": [0.9], "preference": {"family": "linear", "params": {"coefficients": [1, 1]}}}
    ],
    "monotone_witnesses": {"0": ["a"], "1": ["b"]}
  })";
  const Economy e = load_economy(doc);
  const ValidationReport rep = validate_economy(e);
  CHECK_FALSE(rep.passed);
  CHECK(rep.has_rule("shares-sum"));
}

TEST_CASE("validator rules") {
  SUBCASE("nonnegative generator") {
    Economy e = build_garbage_economy(5);
    e.firms[0].generators[0] = vec({1.0, 1.0, 0.0});
    const ValidationReport rep = validate_economy(e);
    CHECK_FALSE(rep.passed);
    CHECK(rep.has_rule("cone-pointed"));
  }
  SUBCASE("opposite rays") {
    Economy e = build_garbage_economy(5);
    e.firms[1].generators[0] = vec({-1.0, 1.0, -1.0});
    CHECK(validate_economy(e).has_rule("cone-pointed"));
  }
  SUBCASE("empty witness set") {
    Economy e = build_hara_economy(3);
    e.monotone_witnesses[1].clear();
    const ValidationReport rep = validate_economy(e);
    CHECK_FALSE(rep.passed);
    CHECK(rep.has_rule("monotone-witness"));
  }
  SUBCASE("unbounded bad") {
    Economy e = build_hara_economy(3);
    e.consumers[1].bounds[0] = kInf;
    CHECK(validate_economy(e).has_rule("bad-bounds-finite"));
  }
  SUBCASE("weights") {
    Economy e = build_hara_economy(4);
    e.consumers[0].weight = 0.5;
    CHECK(validate_economy(e).has_rule("weights-sum"));
  }
  SUBCASE("survival") {
    Economy e = build_one_agent_economy();
    e.consumers[0].bounds[1] = 0.5;
    const ValidationReport rep = validate_economy(e);
    CHECK_FALSE(rep.passed);
    CHECK(rep.has_rule("survival"));
  }
  SUBCASE("never throws on broken dimensions") {
    Economy e = build_hara_economy(2);
    e.consumers[0].endowment = vec({1.0});
    const ValidationReport rep = validate_economy(e);
    CHECK_FALSE(rep.passed);
    CHECK(rep.has_rule("dimensions"));
  }
}

TEST_CASE("builders validate for every n up to 1000") {
  for (int n = 1; n <= 1000; ++n) {
    const ValidationReport h = validate_economy(build_hara_economy(n));
    REQUIRE_MESSAGE(h.passed, "hara n=" << n);
  }
  for (int n : {1, 2, 3, 7, 10, 100, 333, 1000}) {
    const ValidationReport g = validate_economy(build_garbage_economy(n));
    REQUIRE_MESSAGE(g.passed, "garbage n=" << n);
  }
  CHECK(validate_economy(build_one_agent_economy()).passed);
}

TEST_CASE("hara builder") {
  CHECK_THROWS_AS(build_hara_economy(0), DomainError);
  const Economy one = build_hara_economy(1);
  REQUIRE(one.consumer_count() == 1);
  CHECK(one.consumers[0].preference.coefficient == 1.0);
  const Economy two = build_hara_economy(2);
  REQUIRE(two.consumer_count() == 2);
  CHECK(two.consumers[0].preference.coefficient == 0.5);
  CHECK(two.consumers[1].preference.coefficient == 1.0);
  for (const Consumer& c : two.consumers) {
    CHECK(c.weight == 0.5);
    // Good-first order in the reference model is (2, 1).
    CHECK(two.to_source_order(c.endowment) == vec({2.0, 1.0}));
    CHECK(c.bounds[0] == 20.0);
  }
  CHECK(two.firms.empty());
}

TEST_CASE("garbage builder") {
  CHECK_THROWS_AS(build_garbage_economy(0), DomainError);
  const Economy ten = build_garbage_economy(10);
  for (int s = 0; s < 10; ++s) CHECK(ten.consumers[static_cast<std::size_t>(s)].bounds[0] == doctest::Approx(0.05 + 0.1 * s));
  const Economy big = build_garbage_economy(1200);
  int hoarders = 0;
  for (const Consumer& c : big.consumers)
    if (c.preference.coefficient > 0.0) ++hoarders;
  CHECK(hoarders == 120);
  REQUIRE(big.firms.size() == 2);
  REQUIRE(big.firms[0].generators.size() == 1);
  REQUIRE(big.firms[1].generators.size() == 1);
  CHECK(big.firms[0].generators[0] == vec({1.0, -1.0, 1.0}));
  CHECK(big.firms[1].generators[0] == vec({-1.0, -1.0, 0.0}));
  CHECK(big.consumers[0].shares == vec({1.0, 1.0}));
}

TEST_CASE("one-agent builder") {
  const Economy e = build_one_agent_economy();
  CHECK(e.consumer_count() == 1);
  CHECK(e.ell() == 2);
  CHECK(e.consumers[0].endowment == vec({1.0, 1.0}));
  CHECK(e.consumers[0].bounds[0] >= 1.0);
}

TEST_CASE("economy round-trip") {
  for (const Economy& e : {build_hara_economy(7), build_garbage_economy(9), build_one_agent_economy(), mixed_economy()}) {
    const std::string text = serialize_economy(e);
    const Economy back = load_economy(text);
    require_same_economy(e, back);
    CHECK(back.source_order == e.source_order);
    CHECK(serialize_economy(back) == text);
  }
}

TEST_CASE("source order permutation") {
  const Economy e = build_hara_economy(3);
  const Vector internal = vec({-0.25, 0.75});
  CHECK(e.to_source_order(internal) == vec({0.75, -0.25}));
  CHECK(e.from_source_order(e.to_source_order(internal)) == internal);
}

TEST_CASE("rescaling") {
  SUBCASE("uniform weights are a fixed point") {
    const Economy e = build_hara_economy(4);
    const Economy r = rescale_to_unweighted(e);
    for (std::size_t i = 0; i < e.consumers.size(); ++i) {
      CHECK(r.consumers[i].endowment == e.consumers[i].endowment);
      CHECK(r.consumers[i].bounds == e.consumers[i].bounds);
      CHECK(r.consumers[i].weight == e.consumers[i].weight);
    }
  }
  SUBCASE("weights 0.75 and 0.25") {
    Economy e = build_hara_economy(2);
    e.consumers[0].weight = 0.75;
    e.consumers[1].weight = 0.25;
    const Economy r = rescale_to_unweighted(e);
    CHECK(testing::max_abs_diff(r.consumers[0].endowment, 1.5 * e.consumers[0].endowment) == 0.0);
    CHECK(testing::max_abs_diff(r.consumers[1].endowment, 0.5 * e.consumers[1].endowment) == 0.0);
    CHECK(r.consumers[0].weight == 0.5);
    CHECK(r.consumers[1].weight == 0.5);
  }
  SUBCASE("zero weight is rejected") {
    Economy e = build_hara_economy(2);
    e.consumers[0].weight = 0.0;
    e.consumers[1].weight = 1.0;
    CHECK_THROWS_AS(rescale_to_unweighted(e), ZeroWeight);
  }
}

TEST_CASE("rescaled economy has the same equilibrium price") {
  Economy e = build_hara_economy(2);
  e.consumers[0].weight = 0.75;
  e.consumers[1].weight = 0.25;
  const Economy r = rescale_to_unweighted(e);
  const SolveResult direct = solve_equilibrium(e);
  const SolveResult via = solve_equilibrium(r);
  REQUIRE(std::holds_alternative<EquilibriumCertificate>(direct));
  REQUIRE(std::holds_alternative<EquilibriumCertificate>(via));
  const auto& cd = std::get<EquilibriumCertificate>(direct);
  const auto& cv = std::get<EquilibriumCertificate>(via);
  CHECK(testing::max_abs_diff(cd.price, cv.price) <= 1e-9);

  // Map the rescaled certificate back and verify it on the original.
  EquilibriumCertificate back = cv;
  const std::vector<double> f = rescale_factors(e);
  for (std::size_t i = 0; i < back.bundles.size(); ++i) back.bundles[i] /= f[i];
  const double tau = 1e-9;
  const double c = *std::max_element(f.begin(), f.end());
  CHECK(verify_equilibrium(r, cv, tau).passed());
  CHECK(verify_equilibrium(e, back, c * tau).passed());
}
