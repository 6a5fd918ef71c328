#include <cmath>
#include <random>

#include "badmarket/demand.hpp"
#include "badmarket/preferences.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace badmarket;
using testing::vec;

namespace {

Consumer make_consumer(PreferenceSpec pref, Vector bounds) {
  Consumer c;
  c.id = "c";
  c.weight = 1.0;
  c.endowment = Vector::Zero(bounds.size());
  c.shares = Vector(0);
  c.bounds = std::move(bounds);
  c.preference = std::move(pref);
  return c;
}

const Context kNeutral2 = Context::neutral(2);
const Context kNeutral3 = Context::neutral(3);

// Example 3 reference bundle of consumer w at the equilibrium price.
Vector garbage_piece(double w) {
  if (w <= 1.0 / 3.0) return vec({w, 0.0, 1.5 * w});
  if (w <= 0.5) return vec({1.0 - 2.0 * w, 0.0, 0.5});
  if (w < 0.6) return vec({w, 0.0, 1.5 * w});
  return vec({0.0, 0.0, w});
}

Consumer garbage_consumer(double w) {
  const double sigma = (w > 0.5 && w < 0.6) ? 1.0 : -1.0;
  return make_consumer(PreferenceSpec::log_minus_linear(2, 0, sigma), vec({w, kInf, kInf}));
}

std::vector<Consumer> family_samples() {
  return {make_consumer(PreferenceSpec::quadratic_bad(1, 0, 0.7), vec({4.0, kInf})),
          make_consumer(PreferenceSpec::log_minus_linear(1, 0, -1.0), vec({3.0, kInf})),
          make_consumer(PreferenceSpec::linear(vec({-1.0, 2.0})), vec({2.0, 5.0})),
          make_consumer(PreferenceSpec::cobb_douglas(vec({0.3, 0.7}), vec({0.0, 0.0})), vec({1.5, kInf}))};
}

}  // namespace

TEST_CASE("utility values") {
  CHECK(utility(PreferenceSpec::quadratic_bad(1, 0, 1.0), vec({1.0, 2.0}), kNeutral2) == 1.0);
  CHECK(utility(PreferenceSpec::log_minus_linear(2, 0, -1.0), vec({0.0, 0.0, 1.0}), kNeutral3) == 0.0);
  CHECK(utility(PreferenceSpec::linear(vec({1.0, -1.0})), vec({1.0, 1.0}), kNeutral2) == 0.0);
  CHECK(std::isinf(utility(PreferenceSpec::log_minus_linear(1, 0, -1.0), vec({0.0, 0.0}), kNeutral2)));
  CHECK(utility(PreferenceSpec::cobb_douglas(vec({0.5, 0.5}), vec({0.0, 0.0})), vec({std::exp(2.0), 1.0}),
                kNeutral2) == doctest::Approx(1.0));
}

TEST_CASE("indices beyond ell") {
  CHECK_THROWS_AS(utility(PreferenceSpec::quadratic_bad(5, 0, 1.0), vec({1.0, 1.0}), kNeutral2), IndexError);
  CHECK_THROWS_AS(check_indices(PreferenceSpec::log_minus_linear(1, 3, 1.0), 2), IndexError);
}

TEST_CASE("externality term") {
  PreferenceSpec s = PreferenceSpec::quadratic_bad(1, 0, 1.0);
  Externality ext;
  ext.gamma = vec({2.0, 0.0});
  ext.statistic = Statistic::MeanAllocation;
  s.externality = ext;
  Context ctx = Context::neutral(2);
  ctx.mean_allocation = vec({0.25, 3.0});
  CHECK(utility(s, vec({1.0, 2.0}), ctx) == doctest::Approx(1.0 - 0.5));
  CHECK(own_utility(s, vec({1.0, 2.0})) == 1.0);
}

TEST_CASE("gradients") {
  const Vector g1 = utility_gradient(PreferenceSpec::quadratic_bad(1, 0, 0.5), vec({2.0, 1.0}), kNeutral2);
  CHECK(g1[0] == -2.0);
  CHECK(g1[1] == 1.0);
  const Vector a = vec({0.3, -1.5, 2.0});
  CHECK(utility_gradient(PreferenceSpec::linear(a), vec({1.0, 4.0, 0.0}), kNeutral3) == a);
  const Vector g3 = utility_gradient(PreferenceSpec::log_minus_linear(1, 0, 1.0), vec({0.7, 2.0}), kNeutral2);
  CHECK(g3[1] == 0.5);
  CHECK(g3[0] == 1.0);
  CHECK_THROWS_AS(utility_gradient(PreferenceSpec::log_minus_linear(1, 0, 1.0), vec({0.7, 0.0}), kNeutral2),
                  DomainError);
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(20231);
  const std::vector<PreferenceSpec> specs = {
      PreferenceSpec::quadratic_bad(2, 0, 1.3), PreferenceSpec::log_minus_linear(2, 1, -1.0),
      PreferenceSpec::linear(vec({-0.5, 1.0, 2.5})), PreferenceSpec::cobb_douglas(vec({0.2, 0.3, 0.5}), vec({0.0, 0.1, 0.0}))};
  const double h = 1e-6;
  for (const PreferenceSpec& s : specs) {
    for (int k = 0; k < 100; ++k) {
      Vector x(3);
      for (int i = 0; i < 3; ++i) x[i] = testing::uniform(rng, 0.2, 4.0);
      const Vector g = utility_gradient(s, x, kNeutral3);
      Vector fd(3);
      for (int i = 0; i < 3; ++i) {
        Vector up = x, dn = x;
        up[i] += h;
        dn[i] -= h;
        fd[i] = (utility(s, up, kNeutral3) - utility(s, dn, kNeutral3)) / (2 * h);
      }
      const double rel = (fd - g).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff());
      REQUIRE(rel <= 1e-5);
    }
  }
}

TEST_CASE("quadratic-bad demand follows the first-order condition") {
  for (double w : {0.1, 0.5, 1.0}) {
    for (double p2 : {-0.05, -0.4, -1.5}) {
      for (double income : {0.5, 2.0}) {
        const double bound = 10.0;
        const Consumer c = make_consumer(PreferenceSpec::quadratic_bad(1, 0, w), vec({bound, kInf}));
        const Vector x = demand(c, vec({p2, 1.0}), income, kNeutral2);
        const double bad = std::min(-p2 / (2.0 * w), bound);
        CHECK(x[0] == doctest::Approx(bad).epsilon(1e-14));
        CHECK(x[1] == doctest::Approx(income - p2 * bad).epsilon(1e-14));
      }
    }
  }
  const Consumer tight = make_consumer(PreferenceSpec::quadratic_bad(1, 0, 0.01), vec({2.0, kInf}));
  const Vector x = demand(tight, vec({-1.0, 1.0}), 1.0, kNeutral2);
  CHECK(x[0] == 2.0);
  CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("garbage consumer at 0.2") {
  const Vector p = vec({-0.25, 0.25, 0.5});
  const Vector x = demand(garbage_consumer(0.2), p, 0.25 * 2 * 0.2, kNeutral3);
  CHECK(testing::max_abs_diff(x, vec({0.2, 0.0, 0.3})) <= 1e-15);
}

TEST_CASE("garbage demand oracle on a 1000-point grid") {
  const Vector p = vec({-0.25, 0.25, 0.5});
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double w = (k + 0.5) / 1000.0;
    const Vector x = demand(garbage_consumer(w), p, 0.5 * w, kNeutral3);
    worst = std::max(worst, testing::max_abs_diff(x, garbage_piece(w)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("linear demand with a continuum of maximizers") {
  // u = x_good - x_bad at reference price (0.5, -0.5), income 0, box [0, 1]^2.
  const Consumer c = make_consumer(PreferenceSpec::linear(vec({-1.0, 1.0})), vec({1.0, 1.0}));
  const Vector p = vec({-0.5, 0.5});
  const Vector x = demand(c, p, 0.0, kNeutral2);
  const Vector reference = vec({1.0, 1.0});
  CHECK(p.dot(x) <= 1e-15);
  CHECK(utility(c.preference, x, kNeutral2) == doctest::Approx(utility(c.preference, reference, kNeutral2)));
  CHECK(is_quasi_demanded(c, reference, p, 0.0, kNeutral2, 1e-12));
  const std::vector<Vector> verts = linear_optimal_vertices(c, p, 0.0);
  bool has_reference = false;
  for (const Vector& v : verts) has_reference = has_reference || v == reference;
  CHECK(has_reference);
  // Lexicographically smallest maximizer.
  CHECK(x == vec({0.0, 0.0}));
}

TEST_CASE("cobb-douglas demand") {
  const Consumer c = make_consumer(PreferenceSpec::cobb_douglas(vec({0.5, 0.5}), vec({0.0, 0.0})), vec({kInf, kInf}));
  CHECK(testing::max_abs_diff(demand(c, vec({0.5, 0.5}), 1.0, kNeutral2), vec({1.0, 1.0})) <= 1e-14);
  const Consumer clamp = make_consumer(PreferenceSpec::cobb_douglas(vec({0.5, 0.5}), vec({0.0, 0.0})), vec({0.5, kInf}));
  CHECK(testing::max_abs_diff(demand(clamp, vec({0.5, 0.5}), 1.0, kNeutral2), vec({0.5, 1.5})) <= 1e-14);
}

TEST_CASE("demand errors") {
  const Consumer lin = make_consumer(PreferenceSpec::linear(vec({0.0, 1.0})), vec({1.0, kInf}));
  CHECK_THROWS_AS(demand(lin, vec({1.0, 0.0}), 1.0, kNeutral2), UnboundedProblem);
  CHECK_THROWS_AS(demand(lin, vec({0.5, 0.5}), -0.1, kNeutral2), EmptyBudget);
}

TEST_CASE("cheaper points") {
  const Consumer pos = make_consumer(PreferenceSpec::linear(vec({1.0, 1.0, 1.0})), vec({1.0, 1.0, 1.0}));
  const auto z = cheaper_point(pos, vec({0.2, 0.3, 0.5}), 1.0);
  REQUIRE(z.has_value());
  CHECK(*z == Vector::Zero(3));
  CHECK_FALSE(cheaper_point(pos, vec({0.2, 0.3, 0.5}), 0.0).has_value());
  const Consumer g = garbage_consumer(0.5);
  const auto b = cheaper_point(g, vec({-0.25, 0.25, 0.5}), 0.0);
  REQUIRE(b.has_value());
  CHECK((*b)[0] == 0.5);
  CHECK(vec({-0.25, 0.25, 0.5}).dot(*b) == doctest::Approx(-0.125));
}

TEST_CASE("quasi-demand membership") {
  const Consumer c = make_consumer(PreferenceSpec::quadratic_bad(1, 0, 0.5), vec({10.0, kInf}));
  const Vector p = vec({-0.4, 0.6});
  const double income = 1.0;
  const Vector x = demand(c, p, income, kNeutral2);
  CHECK(is_quasi_demanded(c, x, p, income, kNeutral2, 1e-10));
  Vector no_bad = vec({0.0, income / 0.6});
  CHECK_FALSE(is_quasi_demanded(c, no_bad, p, income, kNeutral2, 1e-10));
  const double tol = 1e-9;
  Vector over = x;
  over[1] += 2 * tol / p[1];
  CHECK_FALSE(is_quasi_demanded(c, over, p, income, kNeutral2, tol));
}

TEST_CASE("demand is homogeneous of degree zero") {
  std::mt19937_64 rng(77);
  const std::vector<Consumer> cs = family_samples();
  for (const Consumer& c : cs) {
    for (int k = 0; k < 50; ++k) {
      Vector p = vec({testing::uniform(rng, -1.0, -0.05), testing::uniform(rng, 0.1, 1.0)});
      const double income = testing::uniform(rng, 0.1, 2.0);
      Vector x;
      try {
        x = demand(c, p, income, kNeutral2);
      } catch (const Error&) {
        continue;
      }
      for (double lambda : {0.25, 2.0, 1024.0}) CHECK(demand(c, lambda * p, lambda * income, kNeutral2) == x);
      const double lambda = testing::uniform(rng, 0.1, 10.0);
      CHECK(testing::max_abs_diff(demand(c, lambda * p, lambda * income, kNeutral2), x) <= 1e-8 * (1.0 + x.norm()));
    }
  }
}

TEST_CASE("fallback demand is homogeneous and agrees with the closed forms") {
  SolverConfig fallback;
  fallback.force_fallback_demand = true;
  std::mt19937_64 rng(78);
  const std::vector<Consumer> cs = {family_samples()[0], family_samples()[3]};
  for (const Consumer& c : cs) {
    for (int k = 0; k < 10; ++k) {
      Vector p = vec({testing::uniform(rng, -1.0, -0.05), testing::uniform(rng, 0.1, 1.0)});
      const double income = testing::uniform(rng, 0.1, 2.0);
      const Vector x = demand(c, p, income, kNeutral2, fallback);
      const Vector closed = demand(c, p, income, kNeutral2);
      CHECK(utility(c.preference, closed, kNeutral2) - utility(c.preference, x, kNeutral2) <= 1e-6);
      const double lambda = testing::uniform(rng, 0.1, 10.0);
      CHECK(testing::max_abs_diff(demand(c, lambda * p, lambda * income, kNeutral2, fallback), x) <= 1e-8);
    }
  }
}

TEST_CASE("budget exhaustion under nonsatiation") {
  std::mt19937_64 rng(79);
  for (const Consumer& c : family_samples()) {
    for (int k = 0; k < 50; ++k) {
      const Vector p = vec({testing::uniform(rng, -1.0, 1.0), testing::uniform(rng, 0.1, 1.0)});
      const double income = testing::uniform(rng, 0.0, 2.0);
      if (income < cheapest_value(c.bounds, p)) continue;
      Vector x;
      try {
        x = demand(c, p, income, kNeutral2);
      } catch (const Error&) {
        continue;
      }
      // Linear consumers with a bounded good can be satiated.
      if (c.preference.family == Family::Linear && x[1] == c.bounds[1]) continue;
      CHECK(std::abs(p.dot(x) - income) <= 1e-9);
    }
  }
}

TEST_CASE("externality weight never changes demand") {
  std::mt19937_64 rng(80);
  for (Consumer c : family_samples()) {
    for (int k = 0; k < 20; ++k) {
      const Vector p = vec({testing::uniform(rng, -1.0, -0.05), testing::uniform(rng, 0.1, 1.0)});
      const double income = testing::uniform(rng, 0.1, 2.0);
      Context ctx = Context::neutral(2);
      ctx.mean_allocation = vec({testing::uniform(rng, 0.0, 3.0), testing::uniform(rng, 0.0, 3.0)});
      std::optional<Vector> first;
      for (double gamma : {0.0, 1.0, 10.0}) {
        Externality ext;
        ext.gamma = vec({gamma, 0.5 * gamma});
        ext.statistic = Statistic::MeanAllocation;
        c.preference.externality = ext;
        const Vector x = demand(c, p, income, ctx);
        if (!first) first = x;
        CHECK(x == *first);
      }
    }
  }
}
