#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "model.hpp"
#include "portfolio.hpp"

namespace leverage {

/// Within-period outcome given the belief distribution of wealth.
struct Equilibrium {
  double b = 0.0;  ///< borrowing per unit wealth
  double q = 0.0;  ///< bond issue per unit wealth, q = h(b)
  double p = 0.0;  ///< bond price, p q = b
  std::vector<double> sigmas;
  /// Most pessimistic type that lends (risk-neutral case only).
  std::optional<std::size_t> marginal_index;
  /// Borrowing below the no-lending floor; wealth passes through unchanged.
  bool degenerate = false;
};

inline constexpr double kNoLendingFloor = 1e-6;
inline constexpr double kBisectionEdge = 1e-9;
inline constexpr double kBorrowingTolerance = 1e-12;

namespace detail {

inline void fill_terms(Equilibrium& eq, const RevenueSpec& revenue) {
  eq.q = revenue.high(eq.b);
  eq.p = eq.q > 0.0 ? eq.b / eq.q : 0.0;
  eq.degenerate = eq.b < kNoLendingFloor;
}

}  // namespace detail

/// Solves the equilibrium for one economy across many wealth distributions.
///
/// The risk-neutral path needs each type's indifference borrowing level, which depends only on
/// the grid and revenue, so it is computed once here. For gamma > 0 the belief odds are cached.
class EquilibriumSolver {
 public:
  explicit EquilibriumSolver(const EconomySpec& spec) : grid_(spec.grid), revenue_(spec.revenue), gamma_(spec.gamma) {
    require_valid(spec);
    if (gamma_ == 0.0) {
      alphas_.resize(grid_.size());
      for (std::size_t i = 0; i < grid_.size(); ++i) alphas_[i] = indifference_borrowing(grid_[i], revenue_);
    } else {
      profile_.emplace(grid_.thetas(), gamma_);
    }
  }

  const BeliefGrid& grid() const noexcept { return grid_; }
  const RevenueSpec& revenue() const noexcept { return revenue_; }
  double gamma() const noexcept { return gamma_; }
  const std::vector<double>& alphas() const noexcept { return alphas_; }

  Equilibrium solve(const WealthShares& f) const {
    check_size(f);
    return gamma_ == 0.0 ? solve_risk_neutral(f) : solve_crra(f);
  }

  /// b - sum_i f_i sigma_i(b) for gamma > 0, strictly increasing in b.
  double excess_demand(double b, const WealthShares& f) const {
    check_size(f);
    if (!profile_) throw InvalidSpec("excess_demand requires gamma > 0");
    return b - profile_->demand(gain_loss_at(b, revenue_), f.values());
  }

 private:
  void check_size(const WealthShares& f) const {
    if (f.size() != grid_.size()) throw InvalidSpec("wealth shares do not match the belief grid");
  }

  // Constructive solution: alpha_i increases and omega_i (wealth at least as optimistic as i)
  // decreases, so exactly one i has alpha_i < omega_i and alpha_{i+1} >= omega_{i+1}.
  Equilibrium solve_risk_neutral(const WealthShares& f) const {
    const std::size_t n = grid_.size();
    std::vector<double> omega(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) omega[k] = omega[k + 1] + f[k];

    std::size_t i = 0;
    while (i + 1 < n && !(alphas_[i] < omega[i] && alphas_[i + 1] >= omega[i + 1])) ++i;
    if (i + 1 >= n) throw NumericalError("risk-neutral solver found no crossing type");

    Equilibrium eq;
    eq.sigmas.assign(n, 0.0);
    for (std::size_t j = i + 1; j < n; ++j) eq.sigmas[j] = 1.0;
    if (alphas_[i] <= omega[i + 1]) {
      eq.b = omega[i + 1];  // type i strictly prefers cash once any of it lends
    } else {
      eq.b = alphas_[i];  // type i lends a share s_i and is exactly indifferent at b = alpha_i
      eq.sigmas[i] = (alphas_[i] - omega[i + 1]) / f[i];
    }
    detail::fill_terms(eq, revenue_);
    // Critical type: min { theta_j : 1 - F(theta_j) < b }.
    for (std::size_t j = 0; j < n; ++j) {
      if (omega[j + 1] < eq.b) {
        eq.marginal_index = j;
        break;
      }
    }
    if (eq.b <= 0.0) eq.marginal_index.reset();
    return eq;
  }

  Equilibrium solve_crra(const WealthShares& f) const {
    const std::size_t n = grid_.size();
    Equilibrium eq;
    eq.sigmas.assign(n, 0.0);
    double lo = kBisectionEdge;
    double hi = 1.0 - kBisectionEdge;
    if (excess_demand(lo, f) > 0.0) {
      // Nobody lends even at vanishing borrowing: all wealth is at theta = 0.
      eq.b = 0.0;
      eq.degenerate = true;
      return eq;
    }
    if (excess_demand(hi, f) <= 0.0) {
      // Corner at full borrowing (wealth concentrated at theta = 1).
      profile_->shares(gain_loss_at(hi, revenue_), eq.sigmas);
      eq.b = 1.0;
      detail::fill_terms(eq, revenue_);
      return eq;
    }
    for (int it = 0; it < 200 && hi - lo > kBorrowingTolerance; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (excess_demand(mid, f) < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    eq.b = 0.5 * (lo + hi);
    profile_->shares(gain_loss_at(eq.b, revenue_), eq.sigmas);
    detail::fill_terms(eq, revenue_);
    return eq;
  }

  BeliefGrid grid_;
  RevenueSpec revenue_;
  double gamma_;
  std::vector<double> alphas_;
  std::optional<ShareProfile> profile_;
};

/// Risk-neutral equilibrium for a given revenue specification.
inline Equilibrium solve_risk_neutral(const BeliefGrid& grid, const WealthShares& f, const RevenueSpec& revenue) {
  EconomySpec spec;
  spec.grid = grid;
  spec.revenue = revenue;
  spec.gamma = 0.0;
  return EquilibriumSolver(spec).solve(f);
}

inline double excess_demand(double b, const BeliefGrid& grid, const WealthShares& f, double gamma, const RevenueSpec& revenue) {
  if (!(b > 0.0 && b < 1.0)) throw InvalidSpec("excess_demand requires b in (0,1)");
  if (!(gamma > 0.0)) throw InvalidSpec("excess_demand requires gamma > 0");
  if (f.size() != grid.size()) throw InvalidSpec("wealth shares do not match the belief grid");
  const ShareProfile profile(grid.thetas(), gamma);
  return b - profile.demand(gain_loss_at(b, revenue), f.values());
}

inline Equilibrium solve_equilibrium(const WealthShares& f, const EconomySpec& spec) {
  return EquilibriumSolver(spec).solve(f);
}

}  // namespace leverage
