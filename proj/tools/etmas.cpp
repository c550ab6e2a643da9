// Command-line front end: run, compare, diagnose.
//
// Exit codes: 0 success, 1 config error, 2 divergence, 3 diagnostic failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "etmas/observer.hpp"
#include "etmas/scenario_io.hpp"
#include "etmas/simulator.hpp"
#include "etmas/svg.hpp"

namespace fs = std::filesystem;
using namespace etmas;

namespace {

enum Exit { kOk = 0, kConfig = 1, kDivergence = 2, kDiagnostic = 3 };

struct Overrides {
  std::string scenario;
  std::string strategy;
  std::string out;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
};

ScenarioSpec load(const Overrides& o) {
  ScenarioSpec s = o.scenario.empty() || o.scenario == "benchmark" ? benchmark_spec() : parse_spec_file(o.scenario);
  if (!o.strategy.empty()) s.trigger.strategy = parse_strategy(o.strategy);
  if (o.dt) s.dt = *o.dt;
  if (o.horizon) s.horizon = *o.horizon;
  if (o.seed) s.seed = *o.seed;
  if (!o.out.empty()) s.output_directory = o.out;
  return s;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write_plots(const fs::path& dir, const Scenario& sc, const RunResult& res) {
  const auto& log = res.log;
  const auto t = log.column("time");
  const std::size_t na = sc.n_followers();

  std::vector<svg::Series> outputs;
  {
    svg::Series ref{"y_r", t, {}, "#000000", true};
    for (double v : t) ref.y.push_back(sc.reference.value(v));
    outputs.push_back(std::move(ref));
  }
  std::vector<svg::Series> errors;
  for (std::size_t i = 1; i <= na; ++i) {
    const std::string a = std::to_string(i);
    outputs.push_back({"y_" + a, t, log.column("x_" + a + "_1"), svg::palette(i - 1)});
    errors.push_back({"z_" + a + ",1", t, log.column("z_" + a + "_1"), svg::palette(i - 1)});
  }
  write_file(dir / "outputs.svg", svg::line_plot(outputs, "Follower outputs and reference", "t (s)", "y"));
  write_file(dir / "consensus_error.svg", svg::line_plot(errors, "Graph output errors", "t (s)", "z_i,1"));

  const std::string strat(to_string(sc.trigger.strategy));
  for (std::size_t i = 0; i < na; ++i) {
    svg::Series s{"follower " + std::to_string(i + 1), {}, {}, svg::palette(i)};
    double prev = -1.0;
    for (const auto& e : log.events) {
      if (e.agent != i) continue;
      if (prev >= 0.0) {
        s.x.push_back(e.time);
        s.y.push_back(e.time - prev);
      }
      prev = e.time;
    }
    write_file(dir / ("intervals_follower_" + std::to_string(i + 1) + ".svg"),
               svg::stem_plot(s, "Release instants and intervals (" + strat + ")", "t (s)", "interval (s)"));
  }
}

int command_run(const Overrides& o) {
  const ScenarioSpec spec = load(o);
  const Scenario sc = build(spec);
  for (const auto& w : sc.controller.warnings()) std::cerr << "warning: " << w << "\n";
  const RunResult res = run(sc);
  const fs::path dir = prepare_dir(spec.output_directory);
  {
    std::ofstream f(dir / "trajectory.csv");
    write_trajectory_csv(f, res.log);
  }
  {
    std::ofstream f(dir / "events.csv");
    write_events_csv(f, res.log);
  }
  {
    std::ofstream f(dir / "metrics.txt");
    write_metrics_txt(f, res.metrics);
  }
  write_file(dir / "summary.json", metrics_json(res.metrics).dump(2) + "\n");
  write_plots(dir, sc, res);

  std::cout << "strategy " << to_string(sc.trigger.strategy) << ", " << sc.steps() << " steps of " << sc.dt << " s\n";
  for (std::size_t i = 0; i < res.metrics.agents.size(); ++i) {
    const auto& a = res.metrics.agents[i];
    std::cout << "  follower " << i + 1 << ": updates " << a.updates << ", tail rms z1 " << a.rms_tail
              << ", max tail |z1| " << a.max_abs_z1_tail << "\n";
  }
  std::cout << "bounded: " << (res.metrics.bounded() ? "yes" : "no") << "\nwrote " << dir.string() << "\n";
  return kOk;
}

int command_compare(const Overrides& o) {
  const ScenarioSpec spec = load(o);
  const Scenario base = build(spec);
  const ComparisonReport rep = compare(strategy_variants(base));
  const std::string table = rep.table();
  const fs::path dir = prepare_dir(spec.output_directory);
  write_file(dir / "comparison.txt", table);
  write_file(dir / "summary.json", comparison_json(rep).dump(2) + "\n");
  std::cout << table << "wrote " << dir.string() << "\n";
  return kOk;
}

int command_diagnose(const Overrides& o) {
  const ScenarioSpec s = load(o);
  bool ok = true;
  auto check = [&ok](bool pass, const std::string& what) {
    std::cout << (pass ? "PASS  " : "FAIL  ") << what << "\n";
    ok = ok && pass;
  };

  const Eigen::VectorXd q = detail::to_eigen(s.q);
  const Eigen::MatrixXd p = companion_matrix(q);
  const Eigen::VectorXcd ev = eigenvalues(p);
  std::cout << "observer matrix eigenvalues:";
  for (Eigen::Index k = 0; k < ev.size(); ++k) std::cout << " (" << ev(k).real() << (ev(k).imag() < 0 ? "" : "+") << ev(k).imag() << "i)";
  std::cout << "\n";
  const bool hurwitz = q.size() > 0 && is_hurwitz(p);
  check(hurwitz, "observer matrix is Hurwitz");
  if (hurwitz) {
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(p.rows(), p.cols());
    const Eigen::MatrixXd f = lyapunov_diagnostic(p, h);
    const double res = lyapunov_residual(p, f, h);
    const Eigen::VectorXd fev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(f).eigenvalues();
    std::cout << "Lyapunov solution F (H = I):\n" << f << "\nF eigenvalues: " << fev.transpose() << "\nresidual: " << res << "\n";
    check(fev.minCoeff() > 0.0, "F is positive definite");
    check(res < 1e-9, "Lyapunov residual below 1e-9");
  }
  for (std::size_t k = 0; k < s.kappa.size(); ++k) {
    check(s.kappa[k] > 1.5, "kappa[" + std::to_string(k) + "] = " + std::to_string(s.kappa[k]) + " > 3/2");
  }
  for (std::size_t k = 0; k < s.r.size(); ++k) {
    check(s.r[k] < 0.0, "r[" + std::to_string(k) + "] = " + std::to_string(s.r[k]) + " < 0");
  }
  const auto& t = s.trigger;
  check(t.pi_bar > t.pi, "pi_bar = " + std::to_string(t.pi_bar) + " > pi = " + std::to_string(t.pi));
  check(t.delta > 0.0 && t.delta < 1.0, "0 < delta = " + std::to_string(t.delta) + " < 1");
  if (t.delta < 1.0) {
    const double lim = t.pi_star / (1.0 - t.delta);
    check(t.pi_bar_star > lim, "pi_bar_star = " + std::to_string(t.pi_bar_star) + " > pi_star/(1-delta) = " + std::to_string(lim));
  }
  return ok ? kOk : kDiagnostic;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered adaptive consensus tracking simulator"};
  app.require_subcommand(1);
  Overrides o;
  double dt = 0, horizon = 0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool overrides) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON file, or 'benchmark' for the built-in preset")
        ->default_val("benchmark");
    if (!overrides) return;
    sub->add_option("--out", o.out, "Output directory (overrides output.directory)");
    sub->add_option("--dt", dt, "Integration step override");
    sub->add_option("--horizon", horizon, "Horizon override");
    sub->add_option("--seed", seed, "Center-sequence seed override");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one strategy and write CSV, metrics and SVG plots");
  add_common(run_cmd, true);
  run_cmd->add_option("--strategy", o.strategy, "fixed, relative, switch or periodic");
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Run all four strategies and print the comparison table");
  add_common(cmp_cmd, true);
  CLI::App* diag_cmd = app.add_subcommand("diagnose", "Check observer stability and gain side conditions");
  add_common(diag_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  for (CLI::App* sub : {run_cmd, cmp_cmd}) {
    if (sub->count("--dt")) o.dt = dt;
    if (sub->count("--horizon")) o.horizon = horizon;
    if (sub->count("--seed")) o.seed = seed;
  }

  try {
    if (*run_cmd) return command_run(o);
    if (*cmp_cmd) return command_compare(o);
    return command_diagnose(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const DiagnosticError& e) {
    std::cerr << "diagnostic failure: " << e.what() << "\n";
    return kDiagnostic;
  }
}
