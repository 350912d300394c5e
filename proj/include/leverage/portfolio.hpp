#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace leverage {

/// Market terms per unit of investor wealth: q = h(b) and p q = b.
struct MarketTerms {
  double b = 0.0;
  double p = 0.0;
  double q = 0.0;
  double l_val = 0.0;
  double h_val = 0.0;

  static MarketTerms at(double b, const RevenueSpec& revenue) {
    MarketTerms t;
    t.b = b;
    t.h_val = revenue.high(b);
    t.l_val = revenue.low(b);
    t.q = t.h_val;
    t.p = t.q > 0.0 ? b / t.q : 0.0;
    return t;
  }
};

/// H: gain per unit invested in bonds (good state). L: loss per unit invested (bad state).
struct GainLoss {
  double H = 0.0;
  double L = 0.0;
};

/// Throws std::domain_error for degenerate terms (b at a boundary, or no spread between states).
inline GainLoss gain_loss(const MarketTerms& t) {
  if (!(t.b > 0.0 && t.b < 1.0)) throw std::domain_error("gain_loss: borrowing must lie strictly inside (0,1)");
  if (!(t.p > 0.0 && t.q > 0.0)) throw std::domain_error("gain_loss: bond price and issue must be positive");
  GainLoss gl{1.0 / t.p - 1.0, 1.0 - (1.0 / t.p) * (t.l_val / t.q)};
  if (!(gl.H > 0.0) || !(gl.L > 0.0 && gl.L < 1.0))
    throw std::domain_error("gain_loss: degenerate terms (need H > 0 and 0 < L < 1)");
  return gl;
}

/// Gain and loss written directly in terms of b: H = h(b)/b - 1, L = 1 - l(b)/b. No checks.
inline GainLoss gain_loss_at(double b, const RevenueSpec& revenue) {
  return {revenue.high_ratio(b) - 1.0, 1.0 - revenue.low_ratio(b)};
}

struct ShareThresholds {
  double theta_min = 0.0;
  double theta_max = 0.0;
};

/// Log-utility cutoffs: no bonds below theta_min, only bonds above theta_max.
inline ShareThresholds share_thresholds(const GainLoss& gl) {
  const double denom = gl.H + gl.L;
  return {gl.L / denom, (gl.H * gl.L + gl.L) / denom};
}

/// Optimal bond share for a CRRA investor with belief theta.
///
/// gamma == 0 is bang-bang; an exact tie returns std::nullopt and is resolved by the
/// equilibrium solver. For gamma > 0 the first-order condition gives
/// sigma = (r - 1) / (H + r L) with r = (theta H / ((1 - theta) L))^(1/gamma), clamped to [0,1].
/// theta = 0 and theta = 1 are taken as limits (0 and 1).
inline std::optional<double> optimal_share(double theta, double gamma, const GainLoss& gl) {
  if (gamma == 0.0) {
    const double edge = theta * gl.H - (1.0 - theta) * gl.L;
    if (edge > 0.0) return 1.0;
    if (edge < 0.0) return 0.0;
    return std::nullopt;
  }
  if (theta <= 0.0) return 0.0;
  if (theta >= 1.0) return 1.0;
  if (gamma == 1.0) {
    const double s = (theta * gl.H - (1.0 - theta) * gl.L) / (gl.H * gl.L);
    return std::clamp(s, 0.0, 1.0);
  }
  const double log_r = (std::log(theta * gl.H) - std::log((1.0 - theta) * gl.L)) / gamma;
  if (log_r > 700.0) return 1.0;  // limit 1/L exceeds 1
  if (log_r < -700.0) return 0.0;
  const double r = std::exp(log_r);
  return std::clamp((r - 1.0) / (gl.H + r * gl.L), 0.0, 1.0);
}

/// Borrowing level alpha at which a risk-neutral type theta is indifferent between cash and bonds:
/// theta h(alpha)/alpha + (1 - theta) l(alpha)/alpha = 1. alpha(0) = 0, alpha(1) = 1.
inline double indifference_borrowing(double theta, const RevenueSpec& revenue) {
  if (theta <= 0.0) return 0.0;
  if (theta >= 1.0) return 1.0;
  auto excess = [&](double x) {
    return theta * revenue.high_ratio(x) + (1.0 - theta) * revenue.low_ratio(x) - 1.0;
  };
  // excess is decreasing in x and +inf at 0+.
  if (excess(1.0) >= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (excess(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (lo == 0.0) return hi;
  return std::abs(excess(lo)) < std::abs(excess(hi)) ? lo : hi;
}

/// Bond shares across a whole belief grid for fixed gamma > 0.
///
/// Belief odds raised to 1/gamma are cached so each evaluation costs one pow per call rather
/// than one per type. Falls back to the log-domain formula when the cached product overflows.
class ShareProfile {
 public:
  ShareProfile(std::span<const double> thetas, double gamma)
      : thetas_(thetas.begin(), thetas.end()), gamma_(gamma), odds_pow_(thetas.size()) {
    if (!(gamma > 0.0)) throw InvalidSpec("ShareProfile requires gamma > 0");
    for (std::size_t i = 0; i < thetas_.size(); ++i) {
      const double t = thetas_[i];
      odds_pow_[i] = (t > 0.0 && t < 1.0) ? std::pow(t / (1.0 - t), 1.0 / gamma) : 0.0;
    }
  }

  double gamma() const noexcept { return gamma_; }
  std::size_t size() const noexcept { return thetas_.size(); }

  double share(std::size_t i, const GainLoss& gl, double ratio_pow) const {
    const double t = thetas_[i];
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    if (gamma_ == 1.0) return std::clamp((t * gl.H - (1.0 - t) * gl.L) / (gl.H * gl.L), 0.0, 1.0);
    const double r = odds_pow_[i] * ratio_pow;
    if (!std::isfinite(r) || r == 0.0 || !std::isfinite(odds_pow_[i]))
      return *optimal_share(t, gamma_, gl);
    return std::clamp((r - 1.0) / (gl.H + r * gl.L), 0.0, 1.0);
  }

  void shares(const GainLoss& gl, std::span<double> out) const {
    const double rp = ratio_pow(gl);
    for (std::size_t i = 0; i < thetas_.size(); ++i) out[i] = share(i, gl, rp);
  }

  /// Wealth-weighted bond demand: sum_i f_i sigma_i.
  double demand(const GainLoss& gl, std::span<const double> f) const {
    const double rp = ratio_pow(gl);
    double total = 0.0;
    for (std::size_t i = 0; i < thetas_.size(); ++i)
      if (f[i] > 0.0) total += f[i] * share(i, gl, rp);
    return total;
  }

 private:
  double ratio_pow(const GainLoss& gl) const {
    return gamma_ == 1.0 ? gl.H / gl.L : std::pow(gl.H / gl.L, 1.0 / gamma_);
  }

  std::vector<double> thetas_;
  double gamma_;
  std::vector<double> odds_pow_;
};

}  // namespace leverage
