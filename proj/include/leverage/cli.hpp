#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "dynamics.hpp"
#include "equilibrium.hpp"
#include "output.hpp"
#include "selffulfilling.hpp"

namespace leverage::cli {

inline constexpr const char* kToolName = "leverage";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kNumericalFailure = 2 };

struct OutputFile {
  std::string name;
  std::string content;
};

/// Computes every output for a validated config, in memory.
inline std::vector<OutputFile> compute_outputs(const RunConfig& c) {
  std::vector<OutputFile> files;
  switch (c.experiment) {
    case Experiment::Equilibrium: {
      const WealthShares f = make_initial(c.economy.grid, c.initial);
      const Equilibrium eq = solve_equilibrium(f, c.economy);
      files.push_back({"equilibrium.csv", equilibrium_csv(c.economy.grid, eq)});
      files.push_back({"equilibrium_profile.csv", equilibrium_profile_csv(c.economy.grid, f, eq)});
      break;
    }
    case Experiment::Simulate: {
      SimulationOptions opt;
      opt.periods = c.periods;
      opt.seed = c.seed;
      opt.thin = c.thin;
      opt.initial = c.initial;
      opt.mix_before = c.mix_before;
      const RunRecord run = simulate(c.economy, opt);
      files.push_back({"timeseries.csv", timeseries_csv(run)});
      files.push_back({"distributions.csv", distributions_csv(run)});
      break;
    }
    case Experiment::Sweep: {
      EconomySpec base = c.economy;
      base.shock_prob = ConstantShockProb{c.sweep_pis.front()};
      SimulationOptions opt;
      opt.periods = c.periods;
      opt.seed = c.seed;
      opt.initial = c.initial;
      opt.mix_before = c.mix_before;
      const auto cells = sweep(base, c.sweep_gammas, c.sweep_pis, opt, c.jobs, c.statistic);
      for (std::size_t k = 0; k < cells.size(); ++k)
        files.push_back({"cells/cell_" + std::to_string(k) + ".csv", shares_csv(c.economy.grid, cells[k].final_shares)});
      files.push_back({"sweep.csv", sweep_csv(cells)});
      break;
    }
    case Experiment::Recurve: {
      files.push_back({"recurve.csv", recurve_csv(emit_re_curve(c.economy, c.recurve_points))});
      files.push_back({"fixed_points.csv", fixed_points_csv(find_re_equilibria(c.economy, c.recurve_scan))});
      break;
    }
  }
  return files;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::ordered_json make_manifest(const RunConfig& c, const std::vector<std::pair<std::string, std::string>>& checksums,
                                            const std::vector<OutputFile>& files, std::chrono::system_clock::time_point started,
                                            double wall_seconds) {
  nlohmann::ordered_json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["rng"] = "splitmix64-v" + std::to_string(SplitMix64::kVersion);
  m["experiment"] = to_string(c.experiment);
  m["seed"] = c.seed;
  m["started_utc"] = utc_timestamp(started);
  m["wall_clock_seconds"] = wall_seconds;
  m["config"] = serialize(c);
  auto& outs = m["outputs"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < files.size(); ++i)
    outs.push_back({{"file", checksums[i].first}, {"sha256", checksums[i].second}, {"bytes", files[i].content.size()}});
  return m;
}

/// Entry point shared by the executable and the tests. Returns the process exit code:
/// 0 on success, 1 on config or validation failure, 2 on numerical failure.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Credit-market economy with heterogeneous beliefs", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> periods;
  std::optional<unsigned> jobs;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Key=value config file")->required();
    sub->add_option("--seed", seed, "RNG seed (overrides run.seed)");
    sub->add_option("--out", out_dir, "Output directory (overrides run.out)");
    sub->add_option("--periods", periods, "Number of periods (overrides run.periods)");
    sub->add_option("--jobs", jobs, "Worker threads for sweeps (0 = all cores)");
  };
  const std::vector<std::pair<Experiment, const char*>> subs{
      {Experiment::Equilibrium, "Solve one within-period equilibrium"},
      {Experiment::Simulate, "Simulate the wealth dynamics"},
      {Experiment::Sweep, "Terminal mean belief over a (gamma, pi*) grid"},
      {Experiment::Recurve, "Tabulate beta(theta) and find self-fulfilling beliefs"}};
  std::vector<CLI::App*> handles;
  for (const auto& [e, desc] : subs) {
    handles.push_back(app.add_subcommand(to_string(e), desc));
    add_common(handles.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigFailure;
  }

  Experiment experiment = Experiment::Equilibrium;
  for (std::size_t i = 0; i < handles.size(); ++i)
    if (handles[i]->parsed()) experiment = subs[i].first;

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) err << "config error: " << p << '\n';
    return kConfigFailure;
  }
  cfg.experiment = experiment;
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  if (periods) cfg.periods = *periods;
  if (jobs) cfg.jobs = *jobs;

  if (auto problems = validate_config(cfg); !problems.empty()) {
    for (const auto& p : problems) err << "validation error: " << p << '\n';
    return kConfigFailure;
  }

  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<OutputFile> files;
  try {
    files = compute_outputs(cfg);
  } catch (const InvalidSpec& e) {
    err << "validation error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  namespace fs = std::filesystem;
  try {
    const fs::path dir(cfg.out_dir);
    std::vector<std::pair<std::string, std::string>> checksums;
    for (const auto& f : files) {
      const fs::path p = dir / f.name;
      fs::create_directories(p.parent_path());
      checksums.emplace_back(f.name, write_file(p, f.content));
    }
    const auto manifest = make_manifest(cfg, checksums, files, started, wall);
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "wrote " << files.size() + 1 << " files to " << dir.string() << '\n';
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return kConfigFailure;
  }
  return kOk;
}

}  // namespace leverage::cli
