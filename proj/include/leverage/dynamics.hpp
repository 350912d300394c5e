#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "equilibrium.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace leverage {

enum class State { Good, Bad, None };

inline const char* to_string(State s) {
  switch (s) {
    case State::Good: return "good";
    case State::Bad: return "bad";
    case State::None: return "none";
  }
  return "none";
}

struct ShockOutcome {
  WealthShares f;
  double growth = 1.0;
};

/// Multiplies each type's wealth by its realized gross return and renormalizes.
/// Good: 1 - s + s/p. Bad: 1 - s + (s/p) l(b)/q. growth is the pre-normalization total.
inline ShockOutcome apply_shock(const WealthShares& f, const Equilibrium& eq, State state, const RevenueSpec& revenue) {
  if (eq.sigmas.size() != f.size()) throw InvalidSpec("equilibrium does not match wealth shares");
  if (eq.degenerate || state == State::None || !(eq.b > 0.0)) return {f, 1.0};
  const double y = state == State::Good ? revenue.high(eq.b) : revenue.low(eq.b);
  const double bond_return = state == State::Good ? 1.0 / eq.p : (1.0 / eq.p) * (revenue.low(eq.b) / eq.q);
  std::vector<double> w(f.size());
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double s = eq.sigmas[i];
    w[i] = s == 0.0 ? f[i] : f[i] * (1.0 - s + s * bond_return);
    total += w[i];
  }
  if (!(total > 1e-300)) throw NumericalError("aggregate wealth vanished");
  const double expected = (1.0 - eq.b) + y;
  if (std::abs(total - expected) > 1e-9)
    throw NumericalError("wealth drift beyond 1e-9: growth " + std::to_string(total) + " vs " + std::to_string(expected));
  for (double& x : w) x /= total;
  return {WealthShares(std::move(w)), total};
}

struct PeriodRecord {
  std::size_t t = 0;
  double b = 0.0;
  double p = 0.0;
  double q = 0.0;
  double pi = 0.0;
  State state = State::None;
  double growth = 1.0;
  double realized_y = 0.0;
  double mean_belief = 0.0;
  /// NaN when there is no critical type (gamma > 0 or no lending).
  double marginal_theta = std::nan("");
  std::optional<WealthShares> f_after;
};

struct UniformInit {
  bool operator==(const UniformInit&) const = default;
};
struct PointMassInit {
  double theta = 1.0;
  bool operator==(const PointMassInit&) const = default;
};
struct ExplicitInit {
  std::vector<double> weights;
  bool operator==(const ExplicitInit&) const = default;
};
using InitialDistribution = std::variant<UniformInit, PointMassInit, ExplicitInit>;

inline WealthShares make_initial(const BeliefGrid& grid, const InitialDistribution& init) {
  if (std::holds_alternative<UniformInit>(init)) return WealthShares::uniform(grid.size());
  if (const auto* pm = std::get_if<PointMassInit>(&init)) {
    if (!(pm->theta >= 0.0 && pm->theta <= 1.0)) throw InvalidSpec("point mass belief must lie in [0,1]");
    return WealthShares::point_mass(grid.size(), grid.nearest(pm->theta));
  }
  const auto& w = std::get<ExplicitInit>(init).weights;
  if (w.size() != grid.size()) throw InvalidSpec("explicit initial weights must match the grid size");
  for (double x : w)
    if (!(x >= 0.0)) throw InvalidSpec("explicit initial weights must be nonnegative");
  return WealthShares::normalized(w);
}

struct SimulationOptions {
  std::size_t periods = 1;
  std::uint64_t seed = 0;
  /// Store f_after every k-th period; the final period is always stored.
  std::size_t thin = 10;
  InitialDistribution initial = UniformInit{};
  /// Mix with the uniform distribution before solving (true) or after the shock (false).
  bool mix_before = true;
};

struct RunRecord {
  EconomySpec spec;
  SimulationOptions options;
  std::vector<PeriodRecord> periods;
  WealthShares final_shares = WealthShares({1.0});

  double terminal_mean_belief() const { return mean_belief(spec.grid, final_shares); }
  double time_average_mean_belief() const {
    if (periods.empty()) return terminal_mean_belief();
    double s = 0.0;
    for (const auto& r : periods) s += r.mean_belief;
    return s / static_cast<double>(periods.size());
  }
};

/// Runs the period loop for one economy. Holds the solver so per-run precomputation happens once.
class Economy {
 public:
  explicit Economy(EconomySpec spec, bool mix_before = true)
      : spec_(std::move(spec)), solver_(spec_), mix_before_(mix_before) {}

  const EconomySpec& spec() const noexcept { return spec_; }
  const EquilibriumSolver& solver() const noexcept { return solver_; }

  struct StepResult {
    WealthShares f;
    PeriodRecord record;
  };

  /// One period: mix, solve, evaluate pi(b), draw the state (Good iff u < pi), apply the shock.
  /// u is consumed even when the equilibrium is degenerate.
  StepResult step_with_uniform(const WealthShares& f, double u, std::size_t t = 0) const {
    WealthShares current = mix_before_ ? mix_with_uniform(f, spec_.noise_eps) : f;
    const Equilibrium eq = solver_.solve(current);
    PeriodRecord rec;
    rec.t = t;
    rec.b = eq.b;
    rec.p = eq.p;
    rec.q = eq.q;
    if (eq.marginal_index && !eq.degenerate) rec.marginal_theta = spec_.grid[*eq.marginal_index];
    if (eq.degenerate) {
      rec.pi = eval_shock_prob(spec_.shock_prob, eq.b);
      rec.state = State::None;
      rec.growth = 1.0;
      rec.realized_y = eq.b;
    } else {
      rec.pi = eval_shock_prob(spec_.shock_prob, eq.b);
      rec.state = u < rec.pi ? State::Good : State::Bad;
      auto out = apply_shock(current, eq, rec.state, spec_.revenue);
      current = std::move(out.f);
      rec.growth = out.growth;
      rec.realized_y = rec.state == State::Good ? spec_.revenue.high(eq.b) : spec_.revenue.low(eq.b);
    }
    if (!mix_before_) current = mix_with_uniform(current, spec_.noise_eps);
    rec.mean_belief = mean_belief(spec_.grid, current);
    return {std::move(current), std::move(rec)};
  }

  StepResult step(const WealthShares& f, SplitMix64& rng, std::size_t t = 0) const {
    return step_with_uniform(f, rng.uniform(), t);
  }

  /// Step with the state fixed in advance.
  StepResult step_forced(const WealthShares& f, State state, std::size_t t = 0) const {
    if (state == State::None) throw InvalidSpec("forced state must be good or bad");
    // u = 0 is below any pi in (0,1); the largest double below 1 is above any such pi.
    return step_with_uniform(f, state == State::Good ? 0.0 : std::nextafter(1.0, 0.0), t);
  }

  RunRecord simulate(const SimulationOptions& opt) const {
    if (opt.periods < 1) throw InvalidSpec("simulation needs at least one period");
    RunRecord run;
    run.spec = spec_;
    run.options = opt;
    run.periods.reserve(opt.periods);
    SplitMix64 rng(opt.seed);
    WealthShares f = make_initial(spec_.grid, opt.initial);
    const std::size_t thin = std::max<std::size_t>(opt.thin, 1);
    for (std::size_t t = 1; t <= opt.periods; ++t) {
      auto res = step(f, rng, t);
      f = std::move(res.f);
      if (t % thin == 0 || t == opt.periods) res.record.f_after = f;
      run.periods.push_back(std::move(res.record));
    }
    run.final_shares = f;
    return run;
  }

 private:
  EconomySpec spec_;
  EquilibriumSolver solver_;
  bool mix_before_;
};

inline Economy::StepResult step(const WealthShares& f, const EconomySpec& spec, SplitMix64& rng) {
  return Economy(spec).step(f, rng);
}

inline RunRecord simulate(const EconomySpec& spec, const SimulationOptions& opt) {
  return Economy(spec, opt.mix_before).simulate(opt);
}

enum class SweepStatistic { Terminal, TimeAverage };

struct SweepCell {
  double gamma = 0.0;
  double pi_star = 0.0;
  double mean_belief = 0.0;
  std::vector<double> final_shares;
};

/// Runs every (gamma, pi*) cell with the same seed, so each pi* column sees one state sequence.
/// Cells are independent and spread over `jobs` threads; results are ordered gamma-major.
inline std::vector<SweepCell> sweep(const EconomySpec& base, const std::vector<double>& gammas, const std::vector<double>& pis,
                                    const SimulationOptions& opt, unsigned jobs = 0,
                                    SweepStatistic stat = SweepStatistic::Terminal) {
  if (!std::holds_alternative<ConstantShockProb>(base.shock_prob))
    throw InvalidSpec("sweep requires a constant shock probability");
  std::vector<SweepCell> cells;
  for (double g : gammas)
    for (double p : pis) cells.push_back({g, p, 0.0, {}});
  // Validate all cells up front so a bad grid fails before any work starts.
  std::vector<EconomySpec> specs;
  for (const auto& c : cells) {
    EconomySpec s = base;
    s.gamma = c.gamma;
    s.shock_prob = ConstantShockProb{c.pi_star};
    require_valid(s);
    specs.push_back(std::move(s));
  }
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));

  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard lock(mu);
        if (next >= cells.size() || error) return;
        k = next++;
      }
      try {
        SimulationOptions o = opt;
        o.thin = opt.periods;  // only the terminal distribution is needed
        RunRecord run = simulate(specs[k], o);
        cells[k].mean_belief =
            stat == SweepStatistic::Terminal ? run.terminal_mean_belief() : run.time_average_mean_belief();
        const auto v = run.final_shares.values();
        cells[k].final_shares.assign(v.begin(), v.end());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
  return cells;
}

}  // namespace leverage
