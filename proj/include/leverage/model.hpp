#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace leverage {

/// Raised when a configuration violates a modelling assumption.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical invariant breaks during solving or simulation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered set of belief types 0 = theta_1 < ... < theta_n = 1.
class BeliefGrid {
 public:
  explicit BeliefGrid(std::vector<double> thetas) : thetas_(std::move(thetas)) {
    if (thetas_.size() < 2) throw InvalidSpec("belief grid needs at least two types");
    if (thetas_.front() != 0.0 || thetas_.back() != 1.0)
      throw InvalidSpec("belief grid must start at 0 and end at 1");
    for (std::size_t i = 1; i < thetas_.size(); ++i)
      if (!(thetas_[i] > thetas_[i - 1]))
        throw InvalidSpec("belief grid must be strictly increasing");
  }

  /// Evenly spaced grid with n points; n = 101 gives {0, 0.01, ..., 1}.
  static BeliefGrid uniform(std::size_t n = 101) {
    if (n < 2) throw InvalidSpec("belief grid needs at least two types");
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
      t[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    t.back() = 1.0;
    return BeliefGrid(std::move(t));
  }

  std::size_t size() const noexcept { return thetas_.size(); }
  double operator[](std::size_t i) const { return thetas_[i]; }
  std::span<const double> thetas() const noexcept { return thetas_; }

  /// Index of the grid point closest to x.
  std::size_t nearest(double x) const {
    auto it = std::lower_bound(thetas_.begin(), thetas_.end(), x);
    if (it == thetas_.end()) return size() - 1;
    auto i = static_cast<std::size_t>(it - thetas_.begin());
    if (i > 0 && std::abs(thetas_[i - 1] - x) <= std::abs(thetas_[i] - x)) return i - 1;
    return i;
  }

  bool operator==(const BeliefGrid&) const = default;

 private:
  std::vector<double> thetas_;
};

/// Belief distribution of wealth: share of aggregate wealth per belief type.
class WealthShares {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit WealthShares(std::vector<double> f) : f_(std::move(f)) {
    if (f_.empty()) throw InvalidSpec("wealth shares must be non-empty");
    double total = 0.0;
    for (double w : f_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidSpec("wealth shares must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > kSumTolerance)
      throw InvalidSpec("wealth shares must sum to 1 (got " + std::to_string(total) + ")");
  }

  static WealthShares uniform(std::size_t n) { return WealthShares(std::vector<double>(n, 1.0 / static_cast<double>(n))); }

  static WealthShares point_mass(std::size_t n, std::size_t at) {
    if (at >= n) throw InvalidSpec("point mass index out of range");
    std::vector<double> f(n, 0.0);
    f[at] = 1.0;
    return WealthShares(std::move(f));
  }

  /// Divides nonnegative weights by their sum. Throws if the sum is not positive.
  static WealthShares normalized(std::vector<double> w) {
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("cannot normalize weights with non-positive sum");
    for (double& x : w) x /= total;
    return WealthShares(std::move(w));
  }

  std::size_t size() const noexcept { return f_.size(); }
  double operator[](std::size_t i) const { return f_[i]; }
  std::span<const double> values() const noexcept { return f_; }

  bool operator==(const WealthShares&) const = default;

 private:
  std::vector<double> f_;
};

/// F(x): total share held by types with theta <= x. Right-continuous step function.
inline double cdf(const BeliefGrid& grid, const WealthShares& f, double x) {
  if (x >= 1.0) return 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size() && grid[i] <= x; ++i) total += f[i];
  return std::min(total, 1.0);
}

inline double mean_belief(const BeliefGrid& grid, const WealthShares& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) m += grid[i] * f[i];
  return std::clamp(m, 0.0, 1.0);
}

/// (1 - eps) f + eps * uniform, renormalized.
inline WealthShares mix_with_uniform(const WealthShares& f, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidSpec("noise weight must lie in [0, 1)");
  if (eps == 0.0) return f;
  const double u = eps / static_cast<double>(f.size());
  std::vector<double> out(f.size());
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] = (1.0 - eps) * f[i] + u;
    total += out[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw NumericalError("wealth drift beyond 1e-9 while mixing");
  for (double& x : out) x /= total;
  return WealthShares(std::move(out));
}

/// Revenue family h(b) = A b^a (good state), l(b) = c b (bad state).
struct RevenueSpec {
  double A = 1.0;
  double a = 0.5;
  double c = 0.5;

  double high(double b) const { return A * std::pow(b, a); }
  double low(double b) const { return c * b; }
  /// h(b)/b, finite for b > 0.
  double high_ratio(double b) const { return A * std::pow(b, a - 1.0); }
  double low_ratio(double /*b*/) const { return c; }

  bool operator==(const RevenueSpec&) const = default;
};

struct ConstantShockProb {
  double pi_star = 0.8;
  bool operator==(const ConstantShockProb&) const = default;
};

/// pi(b) = base + amplitude / (1 + exp(offset - slope * b)).
struct LogisticShockProb {
  double base = 0.3;
  double amplitude = 0.5;
  double offset = 4.75;
  double slope = 12.0;
  bool operator==(const LogisticShockProb&) const = default;
};

using ShockProbSpec = std::variant<ConstantShockProb, LogisticShockProb>;

inline double eval_shock_prob(const ShockProbSpec& spec, double b) {
  struct Visitor {
    double b;
    double operator()(const ConstantShockProb& c) const { return c.pi_star; }
    double operator()(const LogisticShockProb& l) const {
      return l.base + l.amplitude / (1.0 + std::exp(l.offset - l.slope * b));
    }
  };
  return std::visit(Visitor{b}, spec);
}

struct EconomySpec {
  BeliefGrid grid = BeliefGrid::uniform();
  RevenueSpec revenue{};
  double gamma = 0.0;
  ShockProbSpec shock_prob = ConstantShockProb{};
  double noise_eps = 0.0;

  bool operator==(const EconomySpec&) const = default;
};

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

/// Result of validate_spec. Holds every check so callers can print all violations at once.
struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  std::vector<ValidationCheck> failures() const {
    std::vector<ValidationCheck> out;
    std::copy_if(checks.begin(), checks.end(), std::back_inserter(out), [](const auto& c) { return !c.passed; });
    return out;
  }
  std::string summary() const {
    std::string s;
    for (const auto& c : failures()) s += c.name + ": " + c.detail + "\n";
    return s;
  }
};

inline ValidationReport validate_revenue(const RevenueSpec& r) {
  ValidationReport rep;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, ok ? std::string{} : std::move(detail)});
  };
  const bool finite = std::isfinite(r.A) && std::isfinite(r.a) && std::isfinite(r.c);
  add("revenue parameters finite", finite, "A, a, c must be finite");
  add("h exponent in (0,1]", r.a > 0.0 && r.a <= 1.0, "a must lie in (0,1]");
  add("h scale A >= 1", r.A >= 1.0, "A must be at least 1");
  add("l slope in [0,1)", r.c >= 0.0 && r.c < 1.0, "c must lie in [0,1)");

  // Strict concavity of h via second differences on a 1,000-point interior grid.
  bool concave = finite && r.a > 0.0;
  if (concave) {
    constexpr int kPoints = 1000;
    const double step = 1.0 / (kPoints + 1);
    for (int k = 1; k < kPoints - 1 && concave; ++k) {
      const double x = (k + 1) * step;
      const double d2 = r.high(x + step) - 2.0 * r.high(x) + r.high(x - step);
      if (!(d2 < 0.0)) concave = false;
    }
  }
  add("h strictly concave", concave, "second differences of h must be negative");

  bool ordered = finite;
  if (ordered) {
    for (int k = 1; k < 1000 && ordered; ++k) {
      const double x = k / 1000.0;
      if (!(r.low(x) < x && x < r.high(x))) ordered = false;
    }
  }
  add("l(b) < b < h(b) on (0,1)", ordered, "revenue must bracket the amount borrowed");

  add("h(b)/b -> inf as b -> 0", r.a < 1.0, "requires a < 1");
  add("lim l(b)/b < 1", r.c < 1.0, "requires c < 1");
  add("l(1) < 1 = h(1)", r.low(1.0) < 1.0 && r.high(1.0) == 1.0, "requires c < 1 and A = 1");
  return rep;
}

inline ValidationReport validate_spec(const EconomySpec& spec) {
  ValidationReport rep = validate_revenue(spec.revenue);
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, ok ? std::string{} : std::move(detail)});
  };
  add("gamma finite and >= 0", std::isfinite(spec.gamma) && spec.gamma >= 0.0, "risk aversion must be a finite nonnegative number");
  add("noise weight in [0,1)", spec.noise_eps >= 0.0 && spec.noise_eps < 1.0, "noise_eps must lie in [0,1)");

  bool pi_ok = true;
  if (const auto* c = std::get_if<ConstantShockProb>(&spec.shock_prob)) {
    pi_ok = c->pi_star > 0.0 && c->pi_star < 1.0;
  } else {
    for (int k = 0; k <= 1000 && pi_ok; ++k) {
      const double p = eval_shock_prob(spec.shock_prob, k / 1000.0);
      if (!(p > 0.0 && p < 1.0)) pi_ok = false;
    }
    const auto& l = std::get<LogisticShockProb>(spec.shock_prob);
    // Logistic term ranges over (0, amplitude); the open interval must stay inside (0,1).
    if (!(l.base >= 0.0 && l.base + l.amplitude <= 1.0 && l.amplitude >= 0.0)) pi_ok = false;
  }
  add("pi(b) in (0,1)", pi_ok, "shock probability must stay strictly inside (0,1) on [0,1]");
  return rep;
}

inline void require_valid(const EconomySpec& spec) {
  auto rep = validate_spec(spec);
  if (!rep.ok()) throw InvalidSpec("invalid economy spec:\n" + rep.summary());
}

}  // namespace leverage
