#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "equilibrium.hpp"
#include "model.hpp"
#include "portfolio.hpp"

namespace leverage {

struct RECurvePoint {
  double theta = 0.0;
  double beta = 0.0;
  double pi_at_beta = 0.0;
};

struct FixedPoint {
  double theta = 0.0;
  double beta = 0.0;
  /// d/dtheta [pi(beta(theta)) - theta] by central difference.
  double slope = 0.0;
  /// Negative slope; advisory only.
  bool stable = false;
};

/// Equilibrium borrowing when all wealth is held by a single belief type.
///
/// With one type the clearing condition reduces to b = sigma(theta; b). Risk neutral: the type
/// lends until indifferent, so beta = alpha(theta). Otherwise: bisection on b - sigma(theta; b).
inline double beta_of_theta(double theta, const EconomySpec& spec) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidSpec("belief must lie in [0,1]");
  if (theta == 0.0) return 0.0;
  const RevenueSpec& rev = spec.revenue;
  if (spec.gamma == 0.0) return indifference_borrowing(theta, rev);
  if (theta == 1.0) return 1.0;

  auto excess = [&](double b) { return b - *optimal_share(theta, spec.gamma, gain_loss_at(b, rev)); };
  double lo = kBisectionEdge;
  double hi = 1.0 - kBisectionEdge;
  if (excess(lo) > 0.0) return 0.0;
  if (excess(hi) <= 0.0) return 1.0;
  for (int it = 0; it < 200 && hi - lo > kBorrowingTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double b = 0.5 * (lo + hi);
  return b < kNoLendingFloor ? 0.0 : b;
}

inline std::vector<RECurvePoint> emit_re_curve(const EconomySpec& spec, std::size_t points = 101) {
  require_valid(spec);
  if (points < 2) throw InvalidSpec("curve needs at least two points");
  std::vector<RECurvePoint> out;
  out.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double theta = k + 1 == points ? 1.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    const double beta = beta_of_theta(theta, spec);
    if (!out.empty() && beta < out.back().beta - 1e-12)
      throw NumericalError("beta(theta) is not increasing at theta = " + std::to_string(theta));
    out.push_back({theta, beta, eval_shock_prob(spec.shock_prob, beta)});
  }
  return out;
}

/// Beliefs theta* with pi(beta(theta*)) = theta*.
///
/// Scans g(theta) = pi(beta(theta)) - theta on `grid_size` evenly spaced points, then bisects each
/// bracketed sign change. Returns an empty list when g never changes sign.
inline std::vector<FixedPoint> find_re_equilibria(const EconomySpec& spec, std::size_t grid_size = 1000) {
  require_valid(spec);
  if (grid_size < 2) throw InvalidSpec("scan needs at least two points");
  auto g = [&](double theta) { return eval_shock_prob(spec.shock_prob, beta_of_theta(theta, spec)) - theta; };
  auto at = [&](std::size_t k) {
    return k + 1 == grid_size ? 1.0 : static_cast<double>(k) / static_cast<double>(grid_size - 1);
  };

  std::vector<double> roots;
  double x0 = at(0);
  double g0 = g(x0);
  for (std::size_t k = 1; k < grid_size; ++k) {
    const double x1 = at(k);
    const double g1 = g(x1);
    if (g0 == 0.0) {
      roots.push_back(x0);
    } else if (g1 != 0.0 && (g0 < 0.0) != (g1 < 0.0)) {
      double lo = x0, hi = x1;
      const bool rising = g0 < 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((g(mid) < 0.0) == rising)
          lo = mid;
        else
          hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    g0 = g1;
  }
  if (g0 == 0.0) roots.push_back(x0);

  std::vector<FixedPoint> out;
  for (double r : roots) {
    constexpr double h = 1e-6;
    const double a = std::max(0.0, r - h);
    const double b = std::min(1.0, r + h);
    const double slope = (g(b) - g(a)) / (b - a);
    out.push_back({r, beta_of_theta(r, spec), slope, slope < 0.0});
  }
  return out;
}

}  // namespace leverage
