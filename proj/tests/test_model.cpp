#include <catch_amalgamated.hpp>

#include <random>

#include "leverage/model.hpp"

using namespace leverage;
using Catch::Approx;

namespace {

bool has_failure(const ValidationReport& rep, const std::string& name) {
  for (const auto& c : rep.failures())
    if (c.name == name) return true;
  return false;
}

}  // namespace

TEST_CASE("BeliefGrid enforces endpoints and ordering", "[model]") {
  auto g = BeliefGrid::uniform();
  REQUIRE(g.size() == 101);
  CHECK(g[0] == 0.0);
  CHECK(g[100] == 1.0);
  CHECK(g[53] == Approx(0.53));
  CHECK(g.nearest(0.526) == 53);

  CHECK_THROWS_AS(BeliefGrid({0.0}), InvalidSpec);
  CHECK_THROWS_AS(BeliefGrid({0.1, 1.0}), InvalidSpec);
  CHECK_THROWS_AS(BeliefGrid({0.0, 0.5, 0.5, 1.0}), InvalidSpec);
  CHECK_NOTHROW(BeliefGrid({0.0, 1.0}));
}

TEST_CASE("WealthShares rejects invalid vectors", "[model]") {
  CHECK_THROWS_AS(WealthShares({0.5, 0.6}), InvalidSpec);
  CHECK_THROWS_AS(WealthShares({1.5, -0.5}), InvalidSpec);
  CHECK_NOTHROW(WealthShares({0.25, 0.75}));
  CHECK(WealthShares::normalized({1.0, 3.0})[1] == Approx(0.75));
  CHECK_THROWS_AS(WealthShares::normalized({0.0, 0.0}), NumericalError);
}

TEST_CASE("cdf examples", "[model]") {
  auto g = BeliefGrid::uniform();
  auto u = WealthShares::uniform(101);
  CHECK(cdf(g, u, 1.0) == 1.0);
  // 53 grid points lie at or below 0.52.
  CHECK(cdf(g, u, 0.52) == Approx(53.0 / 101.0).epsilon(1e-12));
  auto pm = WealthShares::point_mass(101, 80);
  CHECK(cdf(g, pm, 0.5) == 0.0);
  CHECK(cdf(g, pm, -3.0) == 0.0);
  CHECK(cdf(g, pm, 7.0) == 1.0);
}

TEST_CASE("cdf is monotone and reaches one", "[model][property]") {
  std::mt19937_64 rng(7);
  std::gamma_distribution<double> gam(1.0, 1.0);
  auto g = BeliefGrid::uniform(41);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(41);
    for (auto& x : w) x = gam(rng);
    auto f = WealthShares::normalized(w);
    double prev = -1.0;
    for (int k = -10; k <= 1010; ++k) {
      const double v = cdf(g, f, k / 1000.0);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(cdf(g, f, 1.0) == 1.0);
  }
}

TEST_CASE("mean_belief examples", "[model]") {
  auto g = BeliefGrid::uniform();
  CHECK(mean_belief(g, WealthShares::uniform(101)) == Approx(0.5).epsilon(1e-12));
  CHECK(mean_belief(g, WealthShares::point_mass(101, 80)) == Approx(0.8).epsilon(1e-12));
  std::vector<double> w(101, 0.0);
  w[20] = 0.25;
  w[60] = 0.75;
  CHECK(mean_belief(g, WealthShares(w)) == Approx(0.25 * 0.2 + 0.75 * 0.6).epsilon(1e-12));
}

TEST_CASE("mix_with_uniform examples", "[model]") {
  auto pm = WealthShares::point_mass(101, 100);
  CHECK(mix_with_uniform(pm, 0.0) == pm);

  auto mixed = mix_with_uniform(pm, 0.01);
  CHECK(mixed[100] == Approx(0.99 + 0.01 / 101).epsilon(1e-14));
  for (std::size_t i = 0; i < 100; ++i) CHECK(mixed[i] == Approx(0.01 / 101).epsilon(1e-12));

  auto u = WealthShares::uniform(101);
  auto mu = mix_with_uniform(u, 0.37);
  for (std::size_t i = 0; i < 101; ++i) CHECK(mu[i] == Approx(1.0 / 101).epsilon(1e-13));

  CHECK_THROWS_AS(mix_with_uniform(u, 1.0), InvalidSpec);
  CHECK_THROWS_AS(mix_with_uniform(u, -0.1), InvalidSpec);
}

TEST_CASE("mix_with_uniform preserves the simplex", "[model][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(17);
    for (auto& x : w) x = unif(rng) < 0.3 ? 0.0 : unif(rng);
    w[3] += 1e-3;
    auto f = WealthShares::normalized(w);
    const double eps = unif(rng) * 0.999;
    auto m = mix_with_uniform(f, eps);
    double total = 0.0;
    for (double x : m.values()) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("eval_shock_prob examples", "[model]") {
  CHECK(eval_shock_prob(ConstantShockProb{0.8}, 0.0) == 0.8);
  CHECK(eval_shock_prob(ConstantShockProb{0.8}, 0.73) == 0.8);
  const ShockProbSpec logistic = LogisticShockProb{};
  CHECK(eval_shock_prob(logistic, 4.75 / 12.0) == Approx(0.55).epsilon(1e-14));
  CHECK(eval_shock_prob(logistic, 0.0) == Approx(0.3 + 0.5 / (1.0 + std::exp(4.75))).epsilon(1e-14));
  CHECK(eval_shock_prob(logistic, 0.0) == Approx(0.3043).margin(5e-5));
  for (int k = 0; k <= 1000; ++k) {
    const double p = eval_shock_prob(logistic, k / 1000.0);
    CHECK(p > 0.3);
    CHECK(p < 0.8);
  }
}

TEST_CASE("validate_spec on the square-root example", "[model]") {
  EconomySpec s;
  s.revenue = {1.0, 0.5, 0.5};
  auto rep = validate_spec(s);
  INFO(rep.summary());
  CHECK(rep.ok());
}

TEST_CASE("validate_spec flags Assumption-1 violations", "[model]") {
  EconomySpec linear_low;
  linear_low.revenue.c = 1.0;
  auto rep = validate_spec(linear_low);
  CHECK_FALSE(rep.ok());
  CHECK(has_failure(rep, "lim l(b)/b < 1"));

  EconomySpec linear_high;
  linear_high.revenue.a = 1.0;
  rep = validate_spec(linear_high);
  CHECK(has_failure(rep, "h strictly concave"));
  CHECK(has_failure(rep, "h(b)/b -> inf as b -> 0"));

  EconomySpec scaled;
  scaled.revenue.A = 1.5;
  rep = validate_spec(scaled);
  CHECK(has_failure(rep, "l(1) < 1 = h(1)"));

  EconomySpec many;
  many.revenue.c = 1.0;
  many.gamma = -1.0;
  many.noise_eps = 1.0;
  many.shock_prob = ConstantShockProb{1.0};
  CHECK(validate_spec(many).failures().size() >= 4);
}

TEST_CASE("revenue family brackets borrowing on a dense grid", "[model][property]") {
  for (double a : {0.2, 0.5, 0.9})
    for (double c : {0.0, 0.3, 0.9}) {
      RevenueSpec r{1.0, a, c};
      for (int k = 1; k < 10000; ++k) {
        const double b = k / 10000.0;
        CHECK(r.low(b) < b);
        CHECK(b < r.high(b));
      }
    }
}
