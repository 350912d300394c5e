#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dynamics.hpp"
#include "model.hpp"

namespace leverage {

enum class Experiment { Equilibrium, Simulate, Sweep, Recurve };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Equilibrium: return "equilibrium";
    case Experiment::Simulate: return "simulate";
    case Experiment::Sweep: return "sweep";
    case Experiment::Recurve: return "recurve";
  }
  return "equilibrium";
}

/// Shortest-exact-enough rendering: 17 significant digits, locale independent.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string format_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += format_double(xs[i]);
  }
  return s;
}

/// Everything needed to reproduce one CLI run.
struct RunConfig {
  Experiment experiment = Experiment::Equilibrium;
  EconomySpec economy{};
  std::size_t grid_size = 101;
  bool mix_before = true;

  std::size_t periods = 1;
  std::uint64_t seed = 0;
  std::size_t thin = 10;
  std::string out_dir = "out";
  unsigned jobs = 0;
  SweepStatistic statistic = SweepStatistic::Terminal;

  InitialDistribution initial = UniformInit{};

  std::vector<double> sweep_gammas{0.0, 0.5, 1.0, 1.5, 2.0};
  std::vector<double> sweep_pis{0.2, 0.4, 0.6, 0.8};

  std::size_t recurve_points = 101;
  std::size_t recurve_scan = 1000;

  bool operator==(const RunConfig&) const = default;
};

/// Canonical key=value text. Every key is written, so parse(serialize(c)) == c.
inline std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  const auto& e = c.economy;
  os << "run.experiment=" << to_string(c.experiment) << '\n';
  os << "economy.gamma=" << format_double(e.gamma) << '\n';
  os << "economy.noise_eps=" << format_double(e.noise_eps) << '\n';
  os << "economy.mix_before=" << (c.mix_before ? "true" : "false") << '\n';
  os << "grid.size=" << c.grid_size << '\n';
  os << "revenue.A=" << format_double(e.revenue.A) << '\n';
  os << "revenue.a=" << format_double(e.revenue.a) << '\n';
  os << "revenue.c=" << format_double(e.revenue.c) << '\n';
  if (const auto* k = std::get_if<ConstantShockProb>(&e.shock_prob)) {
    os << "shock.kind=constant\n";
    os << "shock.pi_star=" << format_double(k->pi_star) << '\n';
  } else {
    const auto& l = std::get<LogisticShockProb>(e.shock_prob);
    os << "shock.kind=logistic\n";
    os << "shock.base=" << format_double(l.base) << '\n';
    os << "shock.amplitude=" << format_double(l.amplitude) << '\n';
    os << "shock.offset=" << format_double(l.offset) << '\n';
    os << "shock.slope=" << format_double(l.slope) << '\n';
  }
  os << "run.periods=" << c.periods << '\n';
  os << "run.seed=" << c.seed << '\n';
  os << "run.thin=" << c.thin << '\n';
  os << "run.out=" << c.out_dir << '\n';
  os << "run.jobs=" << c.jobs << '\n';
  os << "run.statistic=" << (c.statistic == SweepStatistic::Terminal ? "terminal" : "time_average") << '\n';
  if (std::holds_alternative<UniformInit>(c.initial)) {
    os << "init.kind=uniform\n";
  } else if (const auto* pm = std::get_if<PointMassInit>(&c.initial)) {
    os << "init.kind=point\n";
    os << "init.theta=" << format_double(pm->theta) << '\n';
  } else {
    os << "init.kind=explicit\n";
    os << "init.weights=" << format_list(std::get<ExplicitInit>(c.initial).weights) << '\n';
  }
  os << "sweep.gammas=" << format_list(c.sweep_gammas) << '\n';
  os << "sweep.pis=" << format_list(c.sweep_pis) << '\n';
  os << "recurve.points=" << c.recurve_points << '\n';
  os << "recurve.scan=" << c.recurve_scan << '\n';
  return os.str();
}

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& ps) {
    std::string s;
    for (const auto& p : ps) s += p + "\n";
    return s;
  }
  std::vector<std::string> problems_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  std::vector<std::string>& problems() { return problems_; }

  void real(const std::string& key, double& dst) {
    auto v = take(key);
    if (!v) return;
    double x = 0.0;
    auto res = std::from_chars(v->data(), v->data() + v->size(), x);
    if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
      problems_.push_back(key + ": expected a number, got '" + *v + "'");
    else
      dst = x;
  }

  template <class Int>
  void integer(const std::string& key, Int& dst) {
    auto v = take(key);
    if (!v) return;
    Int x{};
    auto res = std::from_chars(v->data(), v->data() + v->size(), x);
    if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
      problems_.push_back(key + ": expected a nonnegative integer, got '" + *v + "'");
    else
      dst = x;
  }

  void boolean(const std::string& key, bool& dst) {
    auto v = take(key);
    if (!v) return;
    if (*v == "true" || *v == "1")
      dst = true;
    else if (*v == "false" || *v == "0")
      dst = false;
    else
      problems_.push_back(key + ": expected true or false, got '" + *v + "'");
  }

  void list(const std::string& key, std::vector<double>& dst) {
    auto v = take(key);
    if (!v) return;
    std::vector<double> out;
    std::string_view rest = *v;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      double x = 0.0;
      auto res = std::from_chars(item.data(), item.data() + item.size(), x);
      if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
        problems_.push_back(key + ": bad list entry '" + std::string(item) + "'");
        return;
      }
      out.push_back(x);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    dst = std::move(out);
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }

  void report_unknown() {
    for (const auto& [k, v] : kv_) problems_.push_back("unknown key '" + k + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
  std::vector<std::string> problems_;
};

}  // namespace detail

/// Parses flat `section.key=value` text. Blank lines and `#` comments are ignored.
/// Missing keys keep their defaults. Throws ConfigError listing every problem found.
inline RunConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::vector<std::string> problems;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto s = detail::trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected key=value");
      continue;
    }
    std::string key(detail::trim(s.substr(0, eq)));
    std::string value(detail::trim(s.substr(eq + 1)));
    if (!kv.emplace(key, value).second) problems.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }

  RunConfig c;
  detail::KeyReader r(std::move(kv));
  if (auto v = r.take("run.experiment")) {
    if (*v == "equilibrium") c.experiment = Experiment::Equilibrium;
    else if (*v == "simulate") c.experiment = Experiment::Simulate;
    else if (*v == "sweep") c.experiment = Experiment::Sweep;
    else if (*v == "recurve") c.experiment = Experiment::Recurve;
    else r.problems().push_back("run.experiment: unknown experiment '" + *v + "'");
  }
  r.real("economy.gamma", c.economy.gamma);
  r.real("economy.noise_eps", c.economy.noise_eps);
  r.boolean("economy.mix_before", c.mix_before);
  r.integer("grid.size", c.grid_size);
  r.real("revenue.A", c.economy.revenue.A);
  r.real("revenue.a", c.economy.revenue.a);
  r.real("revenue.c", c.economy.revenue.c);

  std::string kind = "constant";
  if (auto v = r.take("shock.kind")) kind = *v;
  if (kind == "constant") {
    ConstantShockProb k;
    r.real("shock.pi_star", k.pi_star);
    c.economy.shock_prob = k;
  } else if (kind == "logistic") {
    LogisticShockProb l;
    r.real("shock.base", l.base);
    r.real("shock.amplitude", l.amplitude);
    r.real("shock.offset", l.offset);
    r.real("shock.slope", l.slope);
    c.economy.shock_prob = l;
  } else {
    r.problems().push_back("shock.kind: expected constant or logistic, got '" + kind + "'");
  }

  r.integer("run.periods", c.periods);
  r.integer("run.seed", c.seed);
  r.integer("run.thin", c.thin);
  if (auto v = r.take("run.out")) c.out_dir = *v;
  r.integer("run.jobs", c.jobs);
  if (auto v = r.take("run.statistic")) {
    if (*v == "terminal") c.statistic = SweepStatistic::Terminal;
    else if (*v == "time_average") c.statistic = SweepStatistic::TimeAverage;
    else r.problems().push_back("run.statistic: expected terminal or time_average, got '" + *v + "'");
  }

  std::string init = "uniform";
  if (auto v = r.take("init.kind")) init = *v;
  if (init == "uniform") {
    c.initial = UniformInit{};
  } else if (init == "point") {
    PointMassInit pm;
    r.real("init.theta", pm.theta);
    c.initial = pm;
  } else if (init == "explicit") {
    ExplicitInit ex;
    r.list("init.weights", ex.weights);
    c.initial = ex;
  } else {
    r.problems().push_back("init.kind: expected uniform, point or explicit, got '" + init + "'");
  }

  r.list("sweep.gammas", c.sweep_gammas);
  r.list("sweep.pis", c.sweep_pis);
  r.integer("recurve.points", c.recurve_points);
  r.integer("recurve.scan", c.recurve_scan);
  r.report_unknown();

  problems.insert(problems.end(), r.problems().begin(), r.problems().end());
  if (!problems.empty()) throw ConfigError(std::move(problems));

  try {
    c.economy.grid = BeliefGrid::uniform(c.grid_size);
  } catch (const InvalidSpec& e) {
    throw ConfigError({std::string("grid.size: ") + e.what()});
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Semantic checks beyond parsing: model assumptions plus run parameters.
inline std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> problems;
  for (const auto& f : validate_spec(c.economy).failures()) problems.push_back(f.name + ": " + f.detail);
  if (c.periods < 1) problems.push_back("run.periods: must be at least 1");
  if (c.thin < 1) problems.push_back("run.thin: must be at least 1");
  if (c.out_dir.empty()) problems.push_back("run.out: output directory must be set");
  if (c.recurve_points < 2) problems.push_back("recurve.points: must be at least 2");
  if (c.recurve_scan < 2) problems.push_back("recurve.scan: must be at least 2");
  try {
    (void)make_initial(c.economy.grid, c.initial);
  } catch (const std::exception& e) {
    problems.push_back(std::string("init: ") + e.what());
  }
  if (c.experiment == Experiment::Sweep) {
    if (c.sweep_gammas.empty() || c.sweep_pis.empty()) problems.push_back("sweep: gammas and pis must be non-empty");
    for (double g : c.sweep_gammas)
      if (!(g >= 0.0) || !std::isfinite(g)) problems.push_back("sweep.gammas: " + format_double(g) + " is not a valid risk aversion");
    for (double p : c.sweep_pis)
      if (!(p > 0.0 && p < 1.0)) problems.push_back("sweep.pis: " + format_double(p) + " must lie in (0,1)");
  }
  return problems;
}

}  // namespace leverage
