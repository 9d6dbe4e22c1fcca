#include <gtest/gtest.h>

#include <random>

#include "ans/geometry.hpp"
#include "ans/grid.hpp"

using namespace ans;

namespace {

Pose random_pose(std::mt19937_64& g) {
  std::uniform_real_distribution<double> xy(-5.0, 5.0), th(-kPi, kPi);
  return {xy(g), xy(g), th(g)};
}

PoseDelta random_delta(std::mt19937_64& g) {
  std::uniform_real_distribution<double> xy(-1.0, 1.0), th(-kPi, kPi);
  return {xy(g), xy(g), th(g)};
}

ChannelGrid random_binary(std::mt19937_64& g, int n, int border) {
  ChannelGrid m(2, n, n);
  std::bernoulli_distribution on(0.3);
  for (int ch = 0; ch < 2; ++ch) {
    for (int r = border; r < n - border; ++r) {
      for (int c = border; c < n - border; ++c) m.at(ch, r, c) = on(g) ? 1.0F : 0.0F;
    }
  }
  return m;
}

}  // namespace

TEST(Compose, ForwardFromOrigin) {
  const Pose p = compose(Pose{0, 0, 0}, PoseDelta{0.25, 0, 0});
  EXPECT_DOUBLE_EQ(p.x, 0.25);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
  EXPECT_DOUBLE_EQ(p.theta, 0.0);
}

TEST(Compose, RotatedFrameMapsXToY) {
  const Pose p = compose(Pose{1, 1, kPi / 2}, PoseDelta{0.25, 0, 0});
  EXPECT_NEAR(p.x, 1.0, 1e-12);
  EXPECT_NEAR(p.y, 1.25, 1e-12);
  EXPECT_NEAR(p.theta, kPi / 2, 1e-12);
}

TEST(Compose, ZeroDeltaIsIdentity) {
  std::mt19937_64 g(1);
  for (int i = 0; i < 100; ++i) {
    const Pose p = random_pose(g);
    const Pose q = compose(p, PoseDelta{0, 0, 0});
    EXPECT_NEAR(q.x, p.x, 1e-12);
    EXPECT_NEAR(q.y, p.y, 1e-12);
    EXPECT_NEAR(wrap_angle(q.theta - p.theta), 0.0, 1e-12);
  }
}

TEST(Compose, DeltaChainsAreAssociative) {
  std::mt19937_64 g(2);
  for (int i = 0; i < 1000; ++i) {
    const PoseDelta a = random_delta(g), b = random_delta(g), c = random_delta(g);
    const PoseDelta l = compose(compose(a, b), c);
    const PoseDelta r = compose(a, compose(b, c));
    EXPECT_NEAR(l.dx, r.dx, 1e-9);
    EXPECT_NEAR(l.dy, r.dy, 1e-9);
    EXPECT_NEAR(wrap_angle(l.dtheta - r.dtheta), 0.0, 1e-9);
  }
}

TEST(Between, SelfIsZero) {
  const Pose p{1.5, -2.0, 0.7};
  const PoseDelta d = between(p, p);
  EXPECT_NEAR(d.dx, 0.0, 1e-12);
  EXPECT_NEAR(d.dy, 0.0, 1e-12);
  EXPECT_NEAR(d.dtheta, 0.0, 1e-12);
}

TEST(Between, ForwardStep) {
  const PoseDelta d = between(Pose{0, 0, 0}, Pose{0.25, 0, 0});
  EXPECT_NEAR(d.dx, 0.25, 1e-12);
  EXPECT_NEAR(d.dy, 0.0, 1e-12);
  EXPECT_NEAR(d.dtheta, 0.0, 1e-12);
}

TEST(Between, RoundTripThroughCompose) {
  std::mt19937_64 g(3);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = random_pose(g), b = random_pose(g);
    const Pose c = compose(a, between(a, b));
    EXPECT_NEAR(c.x, b.x, 1e-9);
    EXPECT_NEAR(c.y, b.y, 1e-9);
    EXPECT_NEAR(wrap_angle(c.theta - b.theta), 0.0, 1e-9);
  }
}

TEST(WrapAngle, HalfOpenRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-12);
}

TEST(SpatialTransform, ZeroDeltaIsBitwiseIdentity) {
  std::mt19937_64 g(4);
  const ChannelGrid m = random_binary(g, 32, 0);
  const ChannelGrid out = spatial_transform(m, {kCellSize, {0, 0, 0}});
  EXPECT_TRUE(std::equal(m.values().begin(), m.values().end(), out.values().begin()));
}

TEST(SpatialTransform, OneCellShiftMatchesIndexShift) {
  std::mt19937_64 g(5);
  const int n = 24;
  const ChannelGrid m = random_binary(g, n, 0);
  // Output cell q reads input at delta + q, so a -0.05 m x delta moves the
  // content one column towards +x.
  const ChannelGrid out = spatial_transform(m, {kCellSize, {-kCellSize, 0, 0}});
  for (int ch = 0; ch < 2; ++ch) {
    for (int r = 0; r < n; ++r) {
      EXPECT_EQ(out.at(ch, r, 0), 0.0F);
      for (int c = 1; c < n; ++c) EXPECT_NEAR(out.at(ch, r, c), m.at(ch, r, c - 1), 1e-6);
    }
  }
}

TEST(SpatialTransform, TwoHalfTurnsRestoreInterior) {
  std::mt19937_64 g(6);
  const int n = 33;
  const ChannelGrid m = random_binary(g, n, 2);
  const GridTransform half{kCellSize, {0, 0, kPi}};
  const ChannelGrid twice = spatial_transform(spatial_transform(m, half), half);
  for (int ch = 0; ch < 2; ++ch) {
    for (int r = 1; r < n - 1; ++r) {
      for (int c = 1; c < n - 1; ++c) EXPECT_NEAR(twice.at(ch, r, c), m.at(ch, r, c), 1e-6);
    }
  }
}

TEST(SpatialTransform, MassPreservedAwayFromBorder) {
  std::mt19937_64 g(7);
  const int n = 48;
  ChannelGrid m(2, n, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 16; r < 32; ++r) {
    for (int c = 16; c < 32; ++c) m.at(0, r, c) = static_cast<float>(u(g));
  }
  double before = 0.0;
  for (float v : m.channel(0)) before += v;
  for (int k = 0; k < 20; ++k) {
    const PoseDelta d{(u(g) - 0.5) * 0.2, (u(g) - 0.5) * 0.2, (u(g) - 0.5) * 2.0};
    const ChannelGrid out = spatial_transform(m, {kCellSize, d});
    double after = 0.0;
    for (float v : out.channel(0)) after += v;
    EXPECT_NEAR(after, before, 0.02 * before);
  }
}

TEST(SpatialTransform, RejectsNonPositiveResolution) {
  ChannelGrid m(2, 4, 4);
  EXPECT_THROW(spatial_transform(m, {0.0, {0.1, 0, 0}}), InvalidArgument);
}
