#include <gtest/gtest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "sslai/world_model.hpp"

using namespace sslai;

TEST(WrapAngle, Examples) {
  EXPECT_EQ(wrap_angle(0.0), 0.0);
  EXPECT_NEAR(wrap_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_EQ(wrap_angle(-kPi), kPi);
  EXPECT_EQ(wrap_angle(kPi), kPi);
}

TEST(WrapAngle, RejectsNonFinite) {
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST(WrapAngle, IdempotentAndInRange) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 100000; ++i) {
    const double x = u(rng);
    const double w = wrap_angle(x);
    ASSERT_GT(w, -kPi);
    ASSERT_LE(w, kPi);
    ASSERT_EQ(wrap_angle(w), w);
    ASSERT_NEAR(std::remainder(x - w, kTwoPi), 0.0, 1e-9);
  }
}

TEST(RefereeMachine, Examples) {
  EXPECT_EQ(update_phase(GamePhase::Run, RefereeCommand::Halt), GamePhase::Halt);
  EXPECT_EQ(update_phase(GamePhase::Stop, RefereeCommand::ForceStart), GamePhase::Run);
  EXPECT_EQ(update_phase(GamePhase::Halt, RefereeCommand::NormalStart), GamePhase::Halt);
}

TEST(RefereeMachine, ExhaustiveTable) {
  for (GamePhase p : kAllPhases)
    for (RefereeCommand c : kAllRefereeCommands)
      EXPECT_EQ(update_phase(p, c), oracle::referee_table(p, c)) << to_string(p) << " + " << to_string(c);
}

TEST(RefereeMachine, HaltAbsorbingAndReachable) {
  for (GamePhase p : kAllPhases) EXPECT_EQ(update_phase(p, RefereeCommand::Halt), GamePhase::Halt);
  EXPECT_EQ(update_phase(GamePhase::Halt, RefereeCommand::Halt), GamePhase::Halt);
}

TEST(RefereeMachine, NamesRoundTrip) {
  for (GamePhase p : kAllPhases) EXPECT_EQ(phase_from_string(to_string(p)), p);
  for (RefereeCommand c : kAllRefereeCommands) EXPECT_EQ(referee_command_from_string(to_string(c)), c);
  EXPECT_FALSE(referee_command_from_string("GO"));
}

TEST(PenaltyArea, Examples) {
  const FieldGeometry geo;
  EXPECT_TRUE(in_penalty_area({-4.4, 0.0}, Team::Ours, geo));
  EXPECT_FALSE(in_penalty_area({0.0, 0.0}, Team::Ours, geo));
  // the front edge is x = -3.5: a hair toward the field is outside, a hair toward the goal inside
  EXPECT_FALSE(in_penalty_area({-3.5 + 1e-9, 0.0}, Team::Ours, geo));
  EXPECT_TRUE(in_penalty_area({-3.5 - 1e-9, 0.0}, Team::Ours, geo));
  EXPECT_FALSE(in_penalty_area({-3.5, 0.0}, Team::Ours, geo));
  EXPECT_TRUE(in_penalty_area({4.4, 0.9}, Team::Theirs, geo));
  EXPECT_FALSE(in_penalty_area({4.4, 0.9}, Team::Ours, geo));
}

TEST(PenaltyArea, ShrinkingNeverAddsPoints) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), uy(-3.5, 3.5), us(0.1, 1.0);
  const FieldGeometry big;
  for (int i = 0; i < 20000; ++i) {
    FieldGeometry small = big;
    small.penalty_depth *= us(rng);
    small.penalty_width *= us(rng);
    const Vec2 p{ux(rng), uy(rng)};
    for (Team side : {Team::Ours, Team::Theirs})
      if (in_penalty_area(p, side, small)) ASSERT_TRUE(in_penalty_area(p, side, big));
  }
}

TEST(SegmentDistance, Examples) {
  EXPECT_DOUBLE_EQ(point_segment_distance({0, 1}, {-1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({2, 0}, {-1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({-1, 0}, {-1, 0}, {1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({3, 4}, {0, 0}, {0, 0}), 5.0);
}

TEST(SegmentDistance, SymmetricAndBoundedByEndpoints) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 20000; ++i) {
    const Vec2 p{u(rng), u(rng)}, a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const double d = point_segment_distance(p, a, b);
    ASSERT_NEAR(d, point_segment_distance(p, b, a), 1e-12);
    ASSERT_LE(d, std::min(distance(p, a), distance(p, b)) + 1e-12);
    ASSERT_NEAR(d, oracle::seg_dist(p, a, b), 1e-12);
  }
}

TEST(Geometry, DefaultsAreConsistent) {
  const FieldGeometry geo;
  EXPECT_TRUE(geo.valid());
  EXPECT_EQ(geo.goal_center(Team::Ours), (Vec2{-4.5, 0.0}));
  const RobotParams r;
  EXPECT_TRUE(r.valid());
  EXPECT_DOUBLE_EQ(r.max_wheel_rpm, 1557.0);
  EXPECT_DOUBLE_EQ(2.0 * r.wheel_radius, 0.055);
}
