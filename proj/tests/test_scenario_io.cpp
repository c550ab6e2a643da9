#include <gtest/gtest.h>

#include <sstream>

#include "etmas/scenario_io.hpp"

using namespace etmas;

#ifndef ETMAS_SCENARIOS
#define ETMAS_SCENARIOS "scenarios"
#endif

namespace {
std::string error_of(const json& doc) {
  try {
    build(parse_spec(doc));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}
json benchmark_json() { return json::parse(kBenchmarkScenario); }
}  // namespace

TEST(BenchmarkPreset, ParameterValuesVerbatim) {
  const Scenario sc = benchmark_scenario();
  const auto& t = sc.trigger;
  EXPECT_EQ(t.pi, 2.5);
  EXPECT_EQ(t.pi_bar, 4.0);
  EXPECT_EQ(t.mu, 5.4);
  EXPECT_EQ(t.pi_star, 2.0);
  EXPECT_EQ(t.pi_bar_star, 4.0);
  EXPECT_EQ(t.delta, 0.245);
  EXPECT_EQ(t.gate, 6.0);
  const auto& c = sc.controller;
  EXPECT_EQ(c.m, Eigen::VectorXd::Constant(1, 0.005));
  EXPECT_EQ(c.h, Eigen::VectorXd(Eigen::Vector2d(50, 50)));
  EXPECT_EQ(c.r, Eigen::VectorXd(Eigen::Vector2d(-100, -100)));
  EXPECT_EQ(c.c, Eigen::VectorXd(Eigen::Vector2d(100, 100)));
  EXPECT_EQ(c.eta, Eigen::VectorXd(Eigen::Vector2d(0.01, 0.01)));
  EXPECT_EQ(c.lambda, 120.0);
  EXPECT_EQ(c.o, 25.0);
  EXPECT_EQ(sc.observer.q(), Eigen::VectorXd(Eigen::Vector2d(350, 0.5)));
  EXPECT_EQ(sc.topology.pinning(), Eigen::VectorXd(Eigen::Vector4d(0, 1, 0, 0)));
  const double x0[4][2] = {{0.2, 0}, {-0.2, 0}, {0.1, 0}, {-0.3, 0}};
  const double xh0[4][2] = {{0.3, 1.7}, {-0.5, 1.7}, {0, -4}, {0, -4}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(sc.x0[i], Eigen::VectorXd(Eigen::Vector2d(x0[i][0], x0[i][1])));
    EXPECT_EQ(sc.x_hat0[i], Eigen::VectorXd(Eigen::Vector2d(xh0[i][0], xh0[i][1])));
  }
  EXPECT_EQ(sc.horizon, 5.0);
  EXPECT_EQ(sc.dt, 0.001);
}

TEST(BenchmarkPreset, ShippedFileMatchesBuiltIn) {
  EXPECT_EQ(read_json_file(std::string(ETMAS_SCENARIOS) + "/benchmark.json"), benchmark_json());
  EXPECT_NO_THROW(parse_scenario(std::string(ETMAS_SCENARIOS) + "/expression_prefix_drift.json"));
}

TEST(ParseScenario, SideConditionMessages) {
  json doc = benchmark_json();
  doc["trigger"]["pi_bar"] = 2;
  EXPECT_NE(error_of(doc).find("π̄ > π"), std::string::npos);

  doc = benchmark_json();
  doc["trigger"]["strategy"] = "ripple";
  const std::string msg = error_of(doc);
  EXPECT_NE(msg.find("trigger.strategy"), std::string::npos);
  for (const char* name : {"fixed", "relative", "switch", "periodic"}) EXPECT_NE(msg.find(name), std::string::npos);

  doc = benchmark_json();
  doc["observer"]["kappa"] = 1.2;
  EXPECT_NE(error_of(doc).find("kappa"), std::string::npos);

  doc = benchmark_json();
  doc["observer"]["q"] = {-1, 1};
  EXPECT_NE(error_of(doc).find("Hurwitz"), std::string::npos);

  doc = benchmark_json();
  doc["controller"]["r"] = {-100, 5};
  EXPECT_NE(error_of(doc).find("controller.r[1]"), std::string::npos);
}

TEST(ParseScenario, StrictSchema) {
  json doc = benchmark_json();
  doc["trigger"]["pii"] = 2.5;
  EXPECT_NE(error_of(doc).find("trigger.pii: unknown field"), std::string::npos);

  doc = benchmark_json();
  doc["extra"] = {{"a", 1}};
  EXPECT_NE(error_of(doc).find("extra: unknown field"), std::string::npos);

  doc = benchmark_json();
  doc["controller"].erase("lambda");
  EXPECT_NE(error_of(doc).find("controller.lambda: missing required field"), std::string::npos);

  doc = benchmark_json();
  doc["sim"]["dt"] = "fast";
  EXPECT_NE(error_of(doc).find("sim.dt: expected a number"), std::string::npos);

  doc = benchmark_json();
  doc["topology"]["adjacency"][1][2] = "x";
  EXPECT_NE(error_of(doc).find("topology.adjacency[1][2]"), std::string::npos);

  doc = benchmark_json();
  doc["plant"]["model"] = "pendulum";
  EXPECT_NE(error_of(doc).find("plant.model"), std::string::npos);

  doc = benchmark_json();
  doc["plant"]["x0"][2] = {0.1};
  EXPECT_NE(error_of(doc).find("plant.x0[2]"), std::string::npos);

  doc = benchmark_json();
  doc["sim"]["dt"] = 0;
  EXPECT_NE(error_of(doc).find("sim.dt"), std::string::npos);

  EXPECT_THROW(parse_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST(ParseScenario, ScalarGainsBroadcast) {
  json doc = benchmark_json();
  doc["controller"]["r"] = -100;
  doc["controller"]["m"] = 0.005;
  const Scenario sc = build(parse_spec(doc));
  EXPECT_EQ(sc.controller.r, Eigen::VectorXd(Eigen::Vector2d(-100, -100)));
  EXPECT_EQ(sc.controller.m.size(), 1);
}

TEST(ParseScenario, ExpressionDynamics) {
  json doc = benchmark_json();
  doc["plant"].erase("model");
  doc["plant"]["drift"] = {"-x1", "x1*x2"};
  doc["plant"]["disturbance"] = {"0", "sin(t)"};
  doc["reference"] = {{"value", "sin(t)"}, {"derivative", "cos(t)"}};
  const Scenario sc = build(parse_spec(doc));
  EXPECT_EQ(sc.plant.order(), 2u);
  EXPECT_DOUBLE_EQ(sc.reference.derivative(0.0), 1.0);

  doc["plant"]["drift"] = {"-x2", "0"};
  EXPECT_NE(error_of(doc).find("plant.drift[0]"), std::string::npos);
}

TEST(Artifacts, TrajectoryCsvRoundTripIsExact) {
  Scenario sc = benchmark_scenario();
  sc.horizon = 0.3;
  sc.trigger.strategy = Strategy::Switch;
  const RunResult r = run(sc);
  std::stringstream ss;
  write_trajectory_csv(ss, r.log);
  const TrajectoryLog back = read_trajectory_csv(ss);
  EXPECT_EQ(back.columns, r.log.columns);
  ASSERT_EQ(back.rows.size(), r.log.rows.size());
  for (std::size_t k = 0; k < back.rows.size(); ++k) ASSERT_EQ(back.rows[k], r.log.rows[k]);
}

TEST(Artifacts, EventsAndMetricsText) {
  Scenario sc = benchmark_scenario();
  sc.horizon = 0.01;
  sc.trigger.strategy = Strategy::Periodic;
  const RunResult r = run(sc);
  std::ostringstream ev;
  write_events_csv(ev, r.log);
  std::istringstream in(ev.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time,agent,branch,u");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("0,1,periodic,", 0), 0u);
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4u * 11u);

  std::ostringstream mt;
  write_metrics_txt(mt, r.metrics);
  EXPECT_NE(mt.str().find("agent3.updates=10\n"), std::string::npos);
  EXPECT_NE(mt.str().find("strategy=periodic\n"), std::string::npos);
  const json j = metrics_json(r.metrics);
  EXPECT_EQ(j["agents"][0]["updates"], 10);
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}
