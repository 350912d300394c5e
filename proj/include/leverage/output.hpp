#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "dynamics.hpp"
#include "equilibrium.hpp"
#include "selffulfilling.hpp"

namespace leverage {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV numeric field; NaN renders as an empty field.
inline std::string csv_num(double v) { return std::isnan(v) ? std::string{} : format_double(v); }

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw OutputError("sha256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

/// Columns: t, b, p, q, pi, state, growth, realized_y, mean_belief, marginal_theta.
inline std::string timeseries_csv(const RunRecord& run) {
  std::string s = "t,b,p,q,pi,state,growth,realized_y,mean_belief,marginal_theta\n";
  for (const auto& r : run.periods) {
    s += std::to_string(r.t);
    for (double v : {r.b, r.p, r.q, r.pi}) s += ',' + csv_num(v);
    s += ',';
    s += to_string(r.state);
    for (double v : {r.growth, r.realized_y, r.mean_belief, r.marginal_theta}) s += ',' + csv_num(v);
    s += '\n';
  }
  return s;
}

/// Long format (t, theta, share): the initial distribution at t = 0, then every stored snapshot.
inline std::string distributions_csv(const RunRecord& run) {
  std::string s = "t,theta,share\n";
  auto emit = [&](std::size_t t, const WealthShares& f) {
    for (std::size_t i = 0; i < f.size(); ++i)
      s += std::to_string(t) + ',' + csv_num(run.spec.grid[i]) + ',' + csv_num(f[i]) + '\n';
  };
  emit(0, make_initial(run.spec.grid, run.options.initial));
  for (const auto& r : run.periods)
    if (r.f_after) emit(r.t, *r.f_after);
  return s;
}

inline std::string equilibrium_csv(const BeliefGrid& grid, const Equilibrium& eq) {
  const double theta_bar = eq.marginal_index ? grid[*eq.marginal_index] : std::nan("");
  return "b,p,q,theta_bar,degenerate\n" + csv_num(eq.b) + ',' + csv_num(eq.p) + ',' + csv_num(eq.q) + ',' +
         csv_num(theta_bar) + ',' + (eq.degenerate ? "true" : "false") + '\n';
}

inline std::string equilibrium_profile_csv(const BeliefGrid& grid, const WealthShares& f, const Equilibrium& eq) {
  std::string s = "theta,share,sigma\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    s += csv_num(grid[i]) + ',' + csv_num(f[i]) + ',' + csv_num(eq.sigmas[i]) + '\n';
  return s;
}

inline std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::string s = "gamma,pi_star,mean_belief\n";
  for (const auto& c : cells) s += csv_num(c.gamma) + ',' + csv_num(c.pi_star) + ',' + csv_num(c.mean_belief) + '\n';
  return s;
}

inline std::string shares_csv(const BeliefGrid& grid, std::span<const double> f) {
  std::string s = "theta,share\n";
  for (std::size_t i = 0; i < grid.size(); ++i) s += csv_num(grid[i]) + ',' + csv_num(f[i]) + '\n';
  return s;
}

inline std::string recurve_csv(const std::vector<RECurvePoint>& pts) {
  std::string s = "theta,beta,pi_at_beta\n";
  for (const auto& p : pts) s += csv_num(p.theta) + ',' + csv_num(p.beta) + ',' + csv_num(p.pi_at_beta) + '\n';
  return s;
}

inline std::string fixed_points_csv(const std::vector<FixedPoint>& fps) {
  std::string s = "theta,beta,slope,stable\n";
  for (const auto& f : fps)
    s += csv_num(f.theta) + ',' + csv_num(f.beta) + ',' + csv_num(f.slope) + ',' + (f.stable ? "true" : "false") + '\n';
  return s;
}

/// Writes bytes verbatim and returns their SHA-256.
inline std::string write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw OutputError("failed writing '" + path.string() + "'");
  return sha256_hex(content);
}

inline std::string write_timeseries(const RunRecord& run, const std::filesystem::path& path) {
  return write_file(path, timeseries_csv(run));
}

}  // namespace leverage
