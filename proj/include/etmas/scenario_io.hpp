#pragma once

// Scenario files (JSON), the built-in benchmark preset, and run artifacts
// (trajectory.csv, events.csv, metrics.txt, summary.json).
//
// Parsing happens in two passes: parse_spec() checks structure and types and
// rejects unknown keys; build() checks every model invariant and produces a
// Scenario. The diagnose command works on the raw spec so that it can report
// on gains that build() would refuse.

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "etmas/errors.hpp"
#include "etmas/graph.hpp"
#include "etmas/observer.hpp"
#include "etmas/plant.hpp"
#include "etmas/simulator.hpp"
#include "etmas/trigger.hpp"

namespace etmas {

using json = nlohmann::json;

struct ScenarioSpec {
  std::vector<std::vector<double>> adjacency;
  std::vector<double> pinning;

  std::string plant_model;  // "benchmark" or empty when expressions are given
  std::vector<std::string> drift;
  std::vector<std::string> disturbance;
  std::vector<std::vector<double>> x0;

  std::string reference_model;
  std::string reference_value;
  std::string reference_derivative;

  std::vector<double> q;
  std::vector<double> kappa;
  std::vector<std::vector<double>> x_hat0;
  DisturbanceInit disturbance_init = DisturbanceInit::ZeroEstimate;

  std::vector<double> r, c, eta, h, m;
  double lambda = 0.0;
  double o = 0.0;

  RbfConfig rbf;
  TriggerConfig trigger;

  double horizon = 5.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  MetricsConfig metrics;

  std::string output_directory = "out";
  std::size_t stride = 1;
};

namespace detail {

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  [[nodiscard]] std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[nodiscard]] bool has(const std::string& key) const {
    seen_.insert(key);
    return j_.contains(key);
  }
  [[nodiscard]] const json& get(const std::string& key) const {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(at(key) + ": missing required field");
    return j_.at(key);
  }
  [[nodiscard]] Section section(const std::string& key) const { return Section(get(key), at(key)); }

  [[nodiscard]] double number(const std::string& key) const { return as_number(get(key), at(key)); }
  void number(const std::string& key, double& out) const {
    if (has(key)) out = number(key);
  }
  [[nodiscard]] std::string string(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    return v.get<std::string>();
  }
  [[nodiscard]] std::uint64_t count(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(at(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  template <typename T>
  void count(const std::string& key, T& out) const {
    if (has(key)) out = T(count(key));
  }
  /// Array of numbers. A bare number is accepted and broadcast to `broadcast` entries.
  [[nodiscard]] std::vector<double> vector(const std::string& key, std::size_t broadcast = 0) const {
    const json& v = get(key);
    if (v.is_number() && broadcast > 0) return std::vector<double>(broadcast, as_number(v, at(key)));
    return as_vector(v, at(key));
  }
  [[nodiscard]] std::vector<std::vector<double>> matrix(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of arrays");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_vector(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }
  [[nodiscard]] std::vector<std::string> strings(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  /// Rejects keys that were never queried.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown field");
    }
  }

 private:
  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
  }
  static std::vector<double> as_vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

inline Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& rows, const std::string& path) {
  const Eigen::Index n = Eigen::Index(rows.size());
  const Eigen::Index cols = n ? Eigen::Index(rows.front().size()) : 0;
  Eigen::MatrixXd out(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (Eigen::Index(rows[std::size_t(i)].size()) != cols) throw ConfigError(path + ": rows have unequal length");
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rows[std::size_t(i)][std::size_t(j)];
  }
  return out;
}

inline std::string disturbance_init_name(DisturbanceInit d) {
  return d == DisturbanceInit::ZeroEstimate ? "zero_estimate" : "zero_auxiliary";
}

}  // namespace detail

/// Structural parse; throws ConfigError with a field path.
inline ScenarioSpec parse_spec(const json& doc) {
  using detail::Section;
  ScenarioSpec s;
  const Section root(doc, "");

  {
    const Section t = root.section("topology");
    s.adjacency = t.matrix("adjacency");
    s.pinning = t.vector("pinning");
    t.finish();
  }
  {
    const Section p = root.section("plant");
    if (p.has("model")) {
      s.plant_model = p.string("model");
      if (s.plant_model != "benchmark") throw ConfigError("plant.model: unknown model '" + s.plant_model + "' (known: benchmark)");
      if (p.has("drift") || p.has("disturbance")) throw ConfigError("plant: give either model or drift/disturbance, not both");
    } else {
      s.drift = p.strings("drift");
      s.disturbance = p.strings("disturbance");
    }
    s.x0 = p.matrix("x0");
    p.finish();
  }
  {
    const Section r = root.section("reference");
    if (r.has("model")) {
      s.reference_model = r.string("model");
      if (s.reference_model != "benchmark") {
        throw ConfigError("reference.model: unknown model '" + s.reference_model + "' (known: benchmark)");
      }
      if (r.has("value") || r.has("derivative")) throw ConfigError("reference: give either model or value/derivative, not both");
    } else {
      s.reference_value = r.string("value");
      s.reference_derivative = r.string("derivative");
    }
    r.finish();
  }
  {
    const Section o = root.section("observer");
    s.q = o.vector("q");
    s.kappa = o.vector("kappa", s.q.size());
    s.x_hat0 = o.matrix("x_hat0");
    if (o.has("disturbance_init")) {
      const std::string d = o.string("disturbance_init");
      if (d == "zero_estimate") {
        s.disturbance_init = DisturbanceInit::ZeroEstimate;
      } else if (d == "zero_auxiliary") {
        s.disturbance_init = DisturbanceInit::ZeroAuxiliary;
      } else {
        throw ConfigError("observer.disturbance_init: unknown value '" + d + "' (zero_estimate, zero_auxiliary)");
      }
    }
    o.finish();
  }
  {
    const Section c = root.section("controller");
    const std::size_t n = s.q.size();
    s.r = c.vector("r", n);
    s.c = c.vector("c", n);
    s.eta = c.vector("eta", n);
    s.h = c.vector("h", n);
    s.m = c.vector("m", n > 0 ? n - 1 : 0);
    s.lambda = c.number("lambda");
    s.o = c.number("o");
    c.finish();
  }
  if (root.has("rbf")) {
    const Section r = root.section("rbf");
    auto& b = s.rbf;
    r.number("observer_lo", b.obs_lo);
    r.number("observer_hi", b.obs_hi);
    r.count("observer_nodes_1d", b.obs_nodes_1d);
    r.count("observer_nodes_per_axis", b.obs_nodes_per_axis);
    r.count("observer_centers_high_dim", b.obs_centers_high_dim);
    r.number("observer_width_high_dim", b.obs_width_high_dim);
    r.count("controller_centers", b.ctrl_centers);
    r.number("controller_lo", b.ctrl_lo);
    r.number("controller_hi", b.ctrl_hi);
    r.number("controller_width", b.ctrl_width);
    r.finish();
  }
  {
    const Section t = root.section("trigger");
    auto& g = s.trigger;
    try {
      g.strategy = parse_strategy(t.string("strategy"));
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind("trigger.", 0) == 0) throw;
      throw ConfigError(std::string("trigger.strategy: ") + e.what());
    }
    t.number("pi", g.pi);
    t.number("pi_bar", g.pi_bar);
    t.number("mu", g.mu);
    t.number("delta", g.delta);
    t.number("pi_star", g.pi_star);
    t.number("pi_bar_star", g.pi_bar_star);
    t.number("gate", g.gate);
    t.number("period", g.period);
    if (t.has("switch_candidate")) {
      try {
        g.switch_candidate = parse_switch_candidate(t.string("switch_candidate"));
      } catch (const ConfigError& e) {
        if (std::string(e.what()).rfind("trigger.", 0) == 0) throw;
        throw ConfigError(std::string("trigger.switch_candidate: ") + e.what());
      }
    }
    t.finish();
  }
  if (root.has("sim")) {
    const Section m = root.section("sim");
    m.number("horizon", s.horizon);
    m.number("dt", s.dt);
    m.count("seed", s.seed);
    m.number("head_end", s.metrics.head_end);
    m.number("tail_start", s.metrics.tail_start);
    m.number("ceiling", s.metrics.ceiling);
    m.finish();
  }
  if (root.has("output")) {
    const Section o = root.section("output");
    if (o.has("directory")) s.output_directory = o.string("directory");
    o.count("stride", s.stride);
    o.finish();
  }
  root.finish();
  return s;
}

/// Full validation into a runnable Scenario.
inline Scenario build(const ScenarioSpec& s) {
  using detail::to_eigen;
  Scenario sc;
  sc.topology = Topology::build(to_eigen(s.adjacency, "topology.adjacency"), to_eigen(s.pinning));

  if (!s.plant_model.empty()) {
    sc.plant = benchmark_dynamics();
    sc.plant_id = s.plant_model;
  } else {
    sc.plant = expression_dynamics(s.drift, s.disturbance);
    std::string id;
    for (const auto& f : s.drift) id += f + ";";
    for (const auto& f : s.disturbance) id += f + ";";
    sc.plant_id = id;
  }
  if (!s.reference_model.empty()) {
    sc.reference = benchmark_reference();
    sc.reference_id = s.reference_model;
  } else {
    sc.reference = expression_reference(s.reference_value, s.reference_derivative, s.horizon);
    sc.reference_id = s.reference_value + ";" + s.reference_derivative;
  }
  const std::size_t n = sc.plant.order();
  if (s.q.size() != n) {
    throw ConfigError("observer.q: expected " + std::to_string(n) + " entries for the plant order, got " +
                      std::to_string(s.q.size()));
  }
  sc.observer = ObserverGains(to_eigen(s.q), to_eigen(s.kappa));

  sc.controller.r = to_eigen(s.r);
  sc.controller.c = to_eigen(s.c);
  sc.controller.eta = to_eigen(s.eta);
  sc.controller.h = to_eigen(s.h);
  sc.controller.m = to_eigen(s.m);
  sc.controller.lambda = s.lambda;
  sc.controller.o = s.o;
  sc.controller.validate();

  sc.rbf = s.rbf;
  if (!(s.rbf.obs_hi > s.rbf.obs_lo) || !(s.rbf.ctrl_hi > s.rbf.ctrl_lo)) throw ConfigError("rbf: ranges need hi > lo");
  if (s.rbf.obs_nodes_1d < 2 || s.rbf.obs_nodes_per_axis < 2) throw ConfigError("rbf: grids need at least 2 nodes per axis");
  if (s.rbf.obs_centers_high_dim < 1 || s.rbf.ctrl_centers < 1) throw ConfigError("rbf: center counts must be positive");
  if (!(s.rbf.obs_width_high_dim > 0.0) || !(s.rbf.ctrl_width > 0.0)) throw ConfigError("rbf: widths must be positive");

  sc.trigger = s.trigger;
  sc.trigger.validate();

  if (s.x0.size() != sc.topology.n_followers()) throw ConfigError("plant.x0: expected one row per follower");
  if (s.x_hat0.size() != sc.topology.n_followers()) throw ConfigError("observer.x_hat0: expected one row per follower");
  for (std::size_t i = 0; i < s.x0.size(); ++i) {
    if (s.x0[i].size() != n) throw ConfigError("plant.x0[" + std::to_string(i) + "]: expected " + std::to_string(n) + " entries");
    if (s.x_hat0[i].size() != n) {
      throw ConfigError("observer.x_hat0[" + std::to_string(i) + "]: expected " + std::to_string(n) + " entries");
    }
    sc.x0.push_back(to_eigen(s.x0[i]));
    sc.x_hat0.push_back(to_eigen(s.x_hat0[i]));
  }
  sc.disturbance_init = s.disturbance_init;
  sc.horizon = s.horizon;
  sc.dt = s.dt;
  sc.seed = s.seed;
  sc.metrics = s.metrics;
  sc.log_stride = s.stride;
  sc.validate();
  return sc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline ScenarioSpec parse_spec_file(const std::string& path) { return parse_spec(read_json_file(path)); }

inline Scenario parse_scenario(const std::string& path) { return build(parse_spec_file(path)); }

/// Benchmark preset: two-level followers on the four-agent directed graph.
inline constexpr const char* kBenchmarkScenario = R"({
  "topology": {
    "adjacency": [[0, 1, 0, 0], [0, 0, 0, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
    "pinning": [0, 1, 0, 0]
  },
  "plant": {
    "model": "benchmark",
    "x0": [[0.2, 0.0], [-0.2, 0.0], [0.1, 0.0], [-0.3, 0.0]]
  },
  "reference": { "model": "benchmark" },
  "observer": {
    "q": [350, 0.5],
    "kappa": [2, 2],
    "x_hat0": [[0.3, 1.7], [-0.5, 1.7], [0.0, -4.0], [0.0, -4.0]],
    "disturbance_init": "zero_estimate"
  },
  "controller": {
    "r": [-100, -100],
    "c": [100, 100],
    "eta": [0.01, 0.01],
    "h": [50, 50],
    "m": [0.005],
    "lambda": 120,
    "o": 25
  },
  "rbf": {
    "observer_lo": -2, "observer_hi": 2,
    "observer_nodes_1d": 11, "observer_nodes_per_axis": 5,
    "observer_centers_high_dim": 30, "observer_width_high_dim": 2,
    "controller_centers": 30, "controller_lo": -2, "controller_hi": 2, "controller_width": 2
  },
  "trigger": {
    "strategy": "fixed",
    "pi": 2.5, "pi_bar": 4, "mu": 5.4,
    "delta": 0.245, "pi_star": 2, "pi_bar_star": 4,
    "gate": 6, "period": 0.001,
    "switch_candidate": "fixed"
  },
  "sim": { "horizon": 5, "dt": 0.001, "seed": 0, "head_end": 0.5, "tail_start": 3, "ceiling": 1000 },
  "output": { "directory": "out", "stride": 1 }
}
)";

inline ScenarioSpec benchmark_spec() { return parse_spec(json::parse(kBenchmarkScenario)); }
inline Scenario benchmark_scenario() { return build(benchmark_spec()); }

// ---------------------------------------------------------------- artifacts

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log) {
  for (std::size_t c = 0; c < log.columns.size(); ++c) os << (c ? "," : "") << log.columns[c];
  os << "\n";
  for (const auto& row : log.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
    os << "\n";
  }
}

/// Inverse of write_trajectory_csv (events are not part of the file).
inline TrajectoryLog read_trajectory_csv(std::istream& is) {
  TrajectoryLog log;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("trajectory csv is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) log.columns.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != log.columns.size()) throw ConfigError("trajectory csv row has the wrong number of cells");
    log.rows.push_back(std::move(row));
  }
  return log;
}

/// Agent indices are 1-based in the file.
inline void write_events_csv(std::ostream& os, const TrajectoryLog& log) {
  os << "time,agent,branch,u\n";
  for (const auto& e : log.events) {
    os << format_number(e.time) << "," << (e.agent + 1) << "," << to_string(e.branch) << "," << format_number(e.u) << "\n";
  }
}

inline void write_metrics_txt(std::ostream& os, const RunMetrics& m) {
  os << "strategy=" << to_string(m.strategy) << "\n";
  os << "horizon=" << format_number(m.horizon) << "\n";
  os << "dt=" << format_number(m.dt) << "\n";
  os << "diverged=" << (m.diverged ? "true" : "false") << "\n";
  os << "bounded=" << (m.bounded() ? "true" : "false") << "\n";
  os << "ceiling=" << format_number(m.ceiling) << "\n";
  for (std::size_t i = 0; i < m.agents.size(); ++i) {
    const auto& a = m.agents[i];
    const std::string p = "agent" + std::to_string(i + 1) + ".";
    os << p << "events=" << a.events << "\n";
    os << p << "updates=" << a.updates << "\n";
    os << p << "fixed_branch=" << a.fixed_branch << "\n";
    os << p << "relative_branch=" << a.relative_branch << "\n";
    os << p << "periodic=" << a.periodic << "\n";
    os << p << "min_interval=" << format_number(a.min_interval) << "\n";
    os << p << "mean_interval=" << format_number(a.mean_interval) << "\n";
    os << p << "zeno_bound=" << format_number(a.zeno_bound) << "\n";
    os << p << "max_w_rate=" << format_number(a.max_w_rate) << "\n";
    os << p << "rms_z1_head=" << format_number(a.rms_head) << "\n";
    os << p << "rms_z1_tail=" << format_number(a.rms_tail) << "\n";
    os << p << "max_abs_z1_tail=" << format_number(a.max_abs_z1_tail) << "\n";
    os << p << "max_abs_z=" << format_number(a.max_abs_z) << "\n";
    os << p << "max_psi_norm=" << format_number(a.max_psi_norm) << "\n";
    os << p << "max_abs_theta=" << format_number(a.max_abs_theta) << "\n";
    os << p << "max_w_norm=" << format_number(a.max_w_norm) << "\n";
    os << p << "max_abs_e=" << format_number(a.max_abs_e) << "\n";
    os << p << "max_abs_u=" << format_number(a.max_abs_u) << "\n";
  }
}

inline json metrics_json(const RunMetrics& m) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json agents = json::array();
  for (const auto& a : m.agents) {
    agents.push_back({{"events", a.events},
                      {"updates", a.updates},
                      {"fixed_branch", a.fixed_branch},
                      {"relative_branch", a.relative_branch},
                      {"periodic", a.periodic},
                      {"min_interval", num(a.min_interval)},
                      {"mean_interval", num(a.mean_interval)},
                      {"zeno_bound", num(a.zeno_bound)},
                      {"rms_z1_head", a.rms_head},
                      {"rms_z1_tail", a.rms_tail},
                      {"max_abs_z1_tail", a.max_abs_z1_tail},
                      {"max_abs_z", a.max_abs_z},
                      {"max_psi_norm", a.max_psi_norm},
                      {"max_abs_theta", a.max_abs_theta},
                      {"max_w_norm", a.max_w_norm},
                      {"max_abs_u", a.max_abs_u}});
  }
  return {{"strategy", std::string(to_string(m.strategy))},
          {"horizon", m.horizon},
          {"dt", m.dt},
          {"diverged", m.diverged},
          {"bounded", m.bounded()},
          {"agents", agents}};
}

inline json comparison_json(const ComparisonReport& rep) {
  json runs = json::array();
  for (const auto& r : rep.runs) runs.push_back(metrics_json(r.metrics));
  json ordering = json::array();
  for (bool b : rep.ordering()) ordering.push_back(b);
  return {{"runs", runs}, {"ordering_pass", ordering}};
}

}  // namespace etmas
