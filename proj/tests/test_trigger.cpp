#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "etmas/trigger.hpp"

using namespace etmas;

namespace {
TriggerConfig with(Strategy s) {
  TriggerConfig c;
  c.strategy = s;
  return c;
}
TriggerState held(double u, double t_last = 0.0) {
  TriggerState s;
  s.u_applied = u;
  s.last_event_time = t_last;
  return s;
}
}  // namespace

TEST(TriggerConfig, DefaultsAndValidation) {
  TriggerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.pi_bar = 2.0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("π̄ > π"), std::string::npos);
  }
  c = TriggerConfig{};
  c.delta = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TriggerConfig{};
  c.pi_bar_star = 2.6;  // below 2 / 0.755
  EXPECT_THROW(c.validate(), ConfigError);
  c.pi_bar_star = 2.65;
  EXPECT_NO_THROW(c.validate());
}

TEST(TriggerConfig, StrategyNames) {
  EXPECT_EQ(parse_strategy("switch"), Strategy::Switch);
  try {
    parse_strategy("ripple");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* name : {"fixed", "relative", "switch", "periodic"}) EXPECT_NE(msg.find(name), std::string::npos);
  }
  EXPECT_EQ(to_string(Strategy::Periodic), "periodic");
}

TEST(Candidates, Fixed) {
  const TriggerConfig c;
  EXPECT_EQ(candidate_fixed(c, 3.3, 0.0), 3.3);
  EXPECT_NEAR(candidate_fixed(c, 1.0, 1e6), 1.0 - 4.0, 1e-12);
  EXPECT_NEAR(candidate_fixed(c, 0.0, 5.4 / 4.0), -4.0 * std::tanh(1.0), 1e-15);
  EXPECT_NEAR(candidate_fixed(c, 0.0, 5.4 / 4.0), -3.0464, 1e-4);
}

TEST(Candidates, Relative) {
  const TriggerConfig c;
  EXPECT_EQ(candidate_relative(c, 7.0, 0.0), 0.0);
  EXPECT_NEAR(candidate_relative(c, 0.0, 1e3), -4.98, 1e-12);
}

TEST(CandidatesProperty, RelativeOpposesError) {
  const TriggerConfig c;
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> a(-500, 500), z(-3, 3);
  for (int k = 0; k < 2000; ++k) {
    const double zn = z(rng);
    EXPECT_LE(zn * candidate_relative(c, a(rng), zn), 0.0);
  }
}

TEST(ShouldFire, FirstCallAlwaysFires) {
  for (Strategy s : {Strategy::Fixed, Strategy::Relative, Strategy::Switch, Strategy::Periodic}) {
    EXPECT_TRUE(should_fire(with(s), TriggerState{}, 0.0, 0.0, 1e-3).has_value());
  }
}

TEST(ShouldFire, ThresholdExamples) {
  EXPECT_EQ(should_fire(with(Strategy::Fixed), held(1.0), 3.6, 0.1, 1e-3), Branch::Fixed);
  EXPECT_FALSE(should_fire(with(Strategy::Fixed), held(1.0), 3.4, 0.1, 1e-3));
  EXPECT_EQ(should_fire(with(Strategy::Fixed), held(1.0), 3.5, 0.1, 1e-3), Branch::Fixed);  // |theta| >= pi
  // relative: threshold 0.245*10 + 2 = 4.45
  EXPECT_FALSE(should_fire(with(Strategy::Relative), held(10.0), 14.0, 0.1, 1e-3));
  EXPECT_EQ(should_fire(with(Strategy::Relative), held(10.0), 14.5, 0.1, 1e-3), Branch::Relative);
}

TEST(ShouldFire, SwitchGate) {
  const auto c = with(Strategy::Switch);
  EXPECT_EQ(active_branch(c, 5.0), Branch::Fixed);
  EXPECT_EQ(active_branch(c, -6.0), Branch::Relative);
  EXPECT_EQ(should_fire(c, held(5.0), 7.6, 0.1, 1e-3), Branch::Fixed);
  EXPECT_FALSE(should_fire(c, held(5.0), 7.4, 0.1, 1e-3));
  // |u| = 20 -> relative threshold 6.9
  EXPECT_FALSE(should_fire(c, held(20.0), 26.0, 0.1, 1e-3));
  EXPECT_EQ(should_fire(c, held(20.0), 27.0, 0.1, 1e-3), Branch::Relative);
}

TEST(ShouldFire, PeriodicGrid) {
  const auto c = with(Strategy::Periodic);
  const double dt = 1e-3;
  // accumulated rounding in k*dt must not skip a sample
  EXPECT_TRUE(should_fire(c, held(0.0, 0.0030000000000000001), 0.0, 0.004, dt));
  EXPECT_FALSE(should_fire(c, held(0.0, 0.004), 0.0, 0.0044, dt));
}

TEST(ApplyEvent, HoldsAndCounts) {
  TriggerState s;
  apply_event(s, -3.0, 0.0, Branch::Fixed);
  EXPECT_EQ(s.u_applied, -3.0);
  apply_event(s, 9.0, 0.01, Branch::Relative);
  EXPECT_EQ(s.event_count(), 2u);
  EXPECT_EQ(s.event_count_fixed_branch, 1u);
  EXPECT_EQ(s.event_count_relative_branch, 1u);
  EXPECT_EQ(s.event_log.back().u, 9.0);
  EXPECT_THROW(apply_event(s, 1.0, 0.01, Branch::Fixed), ConsistencyError);
  EXPECT_EQ(s.u_applied, 9.0);
}

TEST(TriggerProperty, NonEventSamplesRespectThresholds) {
  std::mt19937 rng(59);
  std::normal_distribution<double> step(0.0, 0.8);
  for (Strategy strat : {Strategy::Fixed, Strategy::Relative, Strategy::Switch}) {
    const auto c = with(strat);
    TriggerState s;
    double w = 0.0;
    for (int k = 0; k < 20000; ++k) {
      const double t = k * 1e-3;
      w += step(rng) + (k % 1000 == 0 ? 30.0 : 0.0);
      const double u_before = s.u_applied;
      const Branch b = active_branch(c, u_before);
      if (auto fire = should_fire(c, s, w, t, 1e-3)) {
        apply_event(s, w, t, *fire);
        EXPECT_EQ(s.u_applied, w);
      } else {
        EXPECT_LT(std::abs(w - u_before), branch_threshold(c, b, u_before));
        EXPECT_EQ(s.u_applied, u_before);
      }
    }
  }
}
