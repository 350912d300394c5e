#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "leverage/dynamics.hpp"

using namespace leverage;
using Catch::Approx;

namespace {

bool cdf_leq(const BeliefGrid& g, const WealthShares& a, const WealthShares& b, double tol = 1e-12) {
  for (std::size_t i = 0; i < g.size(); ++i)
    if (cdf(g, a, g[i]) > cdf(g, b, g[i]) + tol) return false;
  return true;
}

double share_at_or_above(const BeliefGrid& g, const WealthShares& f, double theta) {
  return 1.0 - cdf(g, f, theta - 1e-9);
}

}  // namespace

TEST_CASE("SplitMix64 reference stream", "[rng]") {
  SplitMix64 rng(0);
  CHECK(rng() == 0xE220A8397B1DCDAFULL);
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  SplitMix64 u(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("apply_shock on the worked example", "[dynamics]") {
  EconomySpec s;
  const auto f = WealthShares::uniform(101);
  const auto eq = solve_equilibrium(f, s);

  const auto good = apply_shock(f, eq, State::Good, s.revenue);
  CHECK(good.growth == Approx(1.2141).margin(5e-4));
  CHECK(good.growth == Approx((1.0 - eq.b) + std::sqrt(eq.b)).epsilon(1e-14));
  // Recomputed optimist share; the rounded figures reported alongside the example do not reconcile.
  CHECK(share_at_or_above(s.grid, good.f, 0.53) == Approx(0.5678).margin(5e-4));

  const auto bad = apply_shock(f, eq, State::Bad, s.revenue);
  CHECK(bad.growth == Approx(0.7624).margin(5e-4));
  CHECK(share_at_or_above(s.grid, bad.f, 0.53) == Approx(0.3117).margin(5e-4));
}

TEST_CASE("apply_shock with no exposure is the identity", "[dynamics]") {
  EconomySpec s;
  const auto f = WealthShares::uniform(101);
  Equilibrium eq;
  eq.sigmas.assign(101, 0.0);
  for (State st : {State::Good, State::Bad}) {
    const auto out = apply_shock(f, eq, st, s.revenue);
    CHECK(out.growth == 1.0);
    CHECK(out.f == f);
  }
}

TEST_CASE("forced steps reproduce the worked example", "[dynamics]") {
  EconomySpec s;
  const Economy econ(s);
  const auto f = WealthShares::uniform(101);
  const auto g = econ.step_forced(f, State::Good);
  CHECK(g.record.state == State::Good);
  CHECK(g.record.b == Approx(0.4752).margin(5e-5));
  CHECK(g.record.marginal_theta == Approx(0.53));
  CHECK(g.record.growth == Approx(1.2141).margin(5e-4));
  CHECK(g.record.realized_y == Approx(std::sqrt(g.record.b)).epsilon(1e-14));
  CHECK(share_at_or_above(s.grid, g.f, 0.53) > 48.0 / 101.0);

  const auto b = econ.step_forced(f, State::Bad);
  CHECK(b.record.state == State::Bad);
  CHECK(b.record.realized_y == Approx(b.record.b / 2.0).epsilon(1e-14));
  CHECK(share_at_or_above(s.grid, b.f, 0.53) < 48.0 / 101.0);
}

TEST_CASE("fully concentrated optimists are unchanged by a good state", "[dynamics]") {
  EconomySpec s;
  const Economy econ(s);
  const auto f = WealthShares::point_mass(101, 100);
  const auto g = econ.step_forced(f, State::Good);
  CHECK(g.f == f);
  CHECK(g.record.growth == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-period paths depend on the order of shocks", "[dynamics]") {
  EconomySpec s;
  const Economy econ(s);
  const auto f0 = WealthShares::uniform(101);
  auto two = [&](State a, State b) { return econ.step_forced(econ.step_forced(f0, a).f, b).f; };
  const auto gg = two(State::Good, State::Good);
  const auto gb = two(State::Good, State::Bad);
  const auto bg = two(State::Bad, State::Good);
  const auto bb = two(State::Bad, State::Bad);
  for (const auto* mid : {&gb, &bg}) {
    CHECK(cdf_leq(s.grid, gg, *mid));
    CHECK(cdf_leq(s.grid, *mid, bb));
  }
  bool gb_above = false, bg_above = false;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double a = cdf(s.grid, gb, s.grid[i]);
    const double b = cdf(s.grid, bg, s.grid[i]);
    if (a > b + 1e-12) gb_above = true;
    if (b > a + 1e-12) bg_above = true;
  }
  CHECK(gb_above);
  CHECK(bg_above);
}

TEST_CASE("simulate validates and matches a single step", "[dynamics]") {
  EconomySpec s;
  SimulationOptions opt;
  opt.periods = 1;
  opt.seed = 5;
  const auto run = simulate(s, opt);
  REQUIRE(run.periods.size() == 1);
  CHECK(run.periods[0].t == 1);
  CHECK(run.periods[0].b == Approx(0.4752).margin(5e-5));
  CHECK(run.periods[0].p == Approx(0.6894).margin(5e-5));
  REQUIRE(run.periods[0].f_after.has_value());
  CHECK(*run.periods[0].f_after == run.final_shares);

  opt.periods = 0;
  CHECK_THROWS_AS(simulate(s, opt), InvalidSpec);
}

TEST_CASE("per-period invariants along random runs", "[dynamics][property]") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    EconomySpec s;
    s.grid = BeliefGrid::uniform(51);
    s.gamma = (trial % 4) * 0.6;
    s.revenue = {1.0, 0.2 + 0.7 * U(rng), 0.1 + 0.8 * U(rng)};
    s.shock_prob = ConstantShockProb{0.1 + 0.8 * U(rng)};
    const Economy econ(s);
    SplitMix64 draws(static_cast<std::uint64_t>(trial));
    std::vector<double> w(51);
    for (auto& x : w) x = U(rng) < 0.3 ? 0.0 : U(rng);
    w[25] += 0.1;
    auto f = WealthShares::normalized(w);
    std::set<std::size_t> support;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] > 0.0) support.insert(i);

    for (int t = 0; t < 200; ++t) {
      const auto res = econ.step(f, draws);
      double total = 0.0;
      for (std::size_t i = 0; i < res.f.size(); ++i) {
        total += res.f[i];
        if (res.f[i] > 0.0) CHECK(support.count(i) == 1);
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
      const auto& r = res.record;
      // Equal up to the market-clearing residual.
      CHECK(std::abs(r.growth - ((1.0 - r.b) + r.realized_y)) < 1e-10);
      if (r.state == State::Good) {
        CHECK(r.realized_y == Approx(s.revenue.high(r.b)).epsilon(1e-14));
        CHECK(r.growth > 1.0);
        CHECK(cdf_leq(s.grid, res.f, f));
      } else if (r.state == State::Bad) {
        CHECK(r.realized_y == Approx(s.revenue.low(r.b)).epsilon(1e-14));
        CHECK(r.growth < 1.0);
        CHECK(cdf_leq(s.grid, f, res.f));
      }
      f = res.f;
    }
  }
}

TEST_CASE("runs are deterministic for a fixed seed", "[dynamics]") {
  EconomySpec s;
  s.gamma = 1.0;
  s.noise_eps = 0.01;
  s.shock_prob = LogisticShockProb{};
  SimulationOptions opt;
  opt.periods = 300;
  opt.seed = 99;
  const auto a = simulate(s, opt);
  const auto b = simulate(s, opt);
  REQUIRE(a.periods.size() == b.periods.size());
  for (std::size_t t = 0; t < a.periods.size(); ++t) {
    CHECK(a.periods[t].b == b.periods[t].b);
    CHECK(a.periods[t].state == b.periods[t].state);
  }
  CHECK(a.final_shares == b.final_shares);
  opt.seed = 100;
  CHECK_FALSE(simulate(s, opt).final_shares == a.final_shares);
}

TEST_CASE("snapshots are thinned but the terminal distribution is kept", "[dynamics]") {
  EconomySpec s;
  SimulationOptions opt;
  opt.periods = 25;
  opt.thin = 10;
  const auto run = simulate(s, opt);
  std::vector<std::size_t> stored;
  for (const auto& r : run.periods)
    if (r.f_after) stored.push_back(r.t);
  CHECK(stored == std::vector<std::size_t>{10, 20, 25});
}

TEST_CASE("noise mixing keeps every type alive", "[dynamics]") {
  EconomySpec s;
  s.gamma = 1.0;
  s.noise_eps = 0.01;
  for (bool before : {true, false}) {
    SimulationOptions opt;
    opt.periods = 50;
    opt.mix_before = before;
    opt.initial = PointMassInit{0.7};
    const auto run = simulate(s, opt);
    for (double x : run.final_shares.values()) CHECK(x > 0.0);
  }
}

TEST_CASE("initial distributions", "[dynamics]") {
  const auto g = BeliefGrid::uniform(11);
  CHECK(make_initial(g, UniformInit{}) == WealthShares::uniform(11));
  CHECK(make_initial(g, PointMassInit{0.3})[3] == 1.0);
  const auto ex = make_initial(g, ExplicitInit{{1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 2}});
  CHECK(ex[10] == Approx(0.5));
  CHECK_THROWS_AS(make_initial(g, ExplicitInit{{1.0, 2.0}}), InvalidSpec);
  CHECK_THROWS_AS(make_initial(g, PointMassInit{1.5}), InvalidSpec);
}

TEST_CASE("sweep cells match direct simulation", "[dynamics]") {
  EconomySpec s;
  SimulationOptions opt;
  opt.periods = 200;
  opt.seed = 3;
  const auto cells = sweep(s, {0.0, 1.0}, {0.4, 0.8}, opt, 2);
  REQUIRE(cells.size() == 4);
  CHECK(cells[3].gamma == 1.0);
  CHECK(cells[3].pi_star == 0.8);
  EconomySpec direct = s;
  direct.gamma = 1.0;
  direct.shock_prob = ConstantShockProb{0.8};
  CHECK(cells[3].mean_belief == simulate(direct, opt).terminal_mean_belief());

  EconomySpec logistic = s;
  logistic.shock_prob = LogisticShockProb{};
  CHECK_THROWS_AS(sweep(logistic, {0.0}, {0.5}, opt), InvalidSpec);
  CHECK_THROWS_AS(sweep(s, {0.0}, {1.5}, opt), InvalidSpec);
}
