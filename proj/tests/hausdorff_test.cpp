#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fpv/hausdorff.hpp"

namespace fpv {
namespace {

using Pts = std::vector<Point>;

// Straight double loop, one square root per pair.
double oracle_directed(const Pts& a, const Pts& b) {
  double worst = 0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y)));
    worst = std::max(worst, best);
  }
  return worst;
}

double oracle_directed_mean(const Pts& a, const Pts& b) {
  double sum = 0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y)));
    sum += best;
  }
  return sum / static_cast<double>(a.size());
}

Pts random_points(std::mt19937_64& rng, int n, double span = 150.0) {
  std::uniform_real_distribution<double> u(-span, span);
  Pts p;
  for (int i = 0; i < n; ++i) p.push_back({u(rng), u(rng)});
  return p;
}

TEST(Directed, Examples) {
  const Pts m{{0, 0}, {1, 0}}, n{{0, 0}};
  EXPECT_EQ(directed_hausdorff(m, m), 0.0);
  EXPECT_EQ(directed_hausdorff(m, n), 1.0);
  EXPECT_EQ(directed_hausdorff(n, m), 0.0);
  EXPECT_EQ(hausdorff(m, n), 1.0);
  EXPECT_EQ(hausdorff(Pts{{0, 0}}, Pts{{3, 4}}), 5.0);
}

TEST(Directed, EmptySet) {
  try {
    directed_hausdorff(Pts{}, Pts{{1, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptySet);
  }
  EXPECT_THROW(modified_hausdorff(Pts{{1, 1}}, Pts{}), Error);
}

TEST(Modified, Examples) {
  const Pts m{{0, 0}, {1, 0}, {2, 0}, {100, 0}}, n{{0, 0}, {1, 0}, {2, 0}};
  EXPECT_EQ(directed_modified_hausdorff(m, n), 98.0 / 4.0);
  EXPECT_EQ(directed_hausdorff(m, n), 98.0);
  EXPECT_EQ(modified_hausdorff(m, m), 0.0);
  EXPECT_EQ(modified_hausdorff(Pts{{1, 1}}, Pts{{4, 5}}), 5.0);
  EXPECT_EQ(hausdorff(Pts{{1, 1}}, Pts{{4, 5}}), 5.0);
}

TEST(HausdorffProperty, MatchesDoubleLoopExactly) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_points(rng, 1 + static_cast<int>(rng() % 50));
    const auto b = random_points(rng, 1 + static_cast<int>(rng() % 50));
    EXPECT_EQ(directed_hausdorff(a, b), oracle_directed(a, b));
    EXPECT_EQ(hausdorff(a, b), std::max(oracle_directed(a, b), oracle_directed(b, a)));
    EXPECT_EQ(modified_hausdorff(a, b), std::max(oracle_directed_mean(a, b), oracle_directed_mean(b, a)));
  }
}

TEST(HausdorffProperty, SymmetryDominanceIdentity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_points(rng, 1 + static_cast<int>(rng() % 30));
    const auto b = random_points(rng, 1 + static_cast<int>(rng() % 30));
    EXPECT_EQ(hausdorff(a, b), hausdorff(b, a));
    EXPECT_EQ(modified_hausdorff(a, b), modified_hausdorff(b, a));
    EXPECT_LE(modified_hausdorff(a, b), hausdorff(a, b));
    EXPECT_EQ(hausdorff(a, a), 0.0);
    EXPECT_EQ(modified_hausdorff(a, a), 0.0);
  }
}

TEST(HausdorffProperty, RigidInvariance) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ang(-4, 4), sh(-300, 300);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_points(rng, 1 + static_cast<int>(rng() % 30));
    const auto b = random_points(rng, 1 + static_cast<int>(rng() % 30));
    const auto t = RigidTransform::make(ang(rng), {sh(rng), sh(rng)}, {sh(rng), sh(rng)});
    Pts ta, tb;
    for (const auto& p : a) ta.push_back(t.apply(p));
    for (const auto& p : b) tb.push_back(t.apply(p));
    EXPECT_NEAR(directed_hausdorff(a, b), directed_hausdorff(ta, tb), 1e-9);
    EXPECT_NEAR(directed_hausdorff(b, a), directed_hausdorff(tb, ta), 1e-9);
    EXPECT_NEAR(hausdorff(a, b), hausdorff(ta, tb), 1e-9);
    EXPECT_NEAR(modified_hausdorff(a, b), modified_hausdorff(ta, tb), 1e-9);
  }
}

double diameter(const Pts& p) {
  double d = 0;
  for (const auto& a : p)
    for (const auto& b : p) d = std::max(d, distance(a, b));
  return d;
}

// One far outlier drives the Hausdorff distance but only moves the mean by
// its own nearest distance divided by the size of the set containing it.
TEST(HausdorffProperty, SingleOutlier) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ang(0, kTwoPi), factor(2.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto base = random_points(rng, 2 + static_cast<int>(rng() % 40), 60.0);
    const double diam = diameter(base);
    const double a = ang(rng), d = factor(rng) * diam;
    const Point anchor = base[rng() % base.size()];
    const Point o{anchor.x + d * std::cos(a), anchor.y + d * std::sin(a)};
    auto with = base;
    with.push_back(o);
    double min_o = std::numeric_limits<double>::infinity();
    for (const auto& p : base) min_o = std::min(min_o, std::sqrt(squared_distance(o, p)));

    EXPECT_GE(directed_hausdorff(with, base), d - diam);
    EXPECT_GE(hausdorff(with, base), d - diam);
    const double before = directed_modified_hausdorff(base, base);
    const double after = directed_modified_hausdorff(with, base);
    EXPECT_EQ(before, 0.0);
    EXPECT_EQ(after - before, min_o / static_cast<double>(with.size()));
  }
}

MinutiaeSet as_set(const Pts& p, CorePoint core) {
  MinutiaeSet s;
  s.core = core;
  for (const auto& q : p) s.minutiae.push_back({q.x, q.y, 0.0, MinutiaKind::Ending});
  return s;
}

TEST(MatchDecision, Examples) {
  std::mt19937_64 rng(14);
  const auto pts = random_points(rng, 25, 100.0);
  const auto t = as_set(pts, {5, 5});
  const auto same = match_decision(t, t, 0.5);
  EXPECT_EQ(same.decision, Decision::Accept);
  EXPECT_EQ(same.mhd, 0.0);
  EXPECT_EQ(same.hausdorff, std::max(same.directed_ab, same.directed_ba));
  EXPECT_EQ(same.threshold_used, 0.5);

  // template plus a far outlier: Hausdorff jumps, MHD barely moves
  auto probe_pts = pts;
  probe_pts.push_back({320, 0});
  const auto outlier = match_decision(as_set(probe_pts, {5, 5}), t, 12.0);
  double min_o = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) min_o = std::min(min_o, distance({320, 0}, p));
  EXPECT_GT(min_o, 200.0);
  EXPECT_NEAR(outlier.hausdorff, min_o, 1e-9);
  EXPECT_LE(outlier.mhd, min_o / probe_pts.size() + 1e-12);
  EXPECT_EQ(outlier.decision, Decision::Accept);

  // disjoint distant sets
  Pts far;
  for (const auto& p : pts) far.push_back({p.x + 1000, p.y});
  EXPECT_EQ(match_decision(as_set(far, {5, 5}), t, 12.0).decision, Decision::Reject);

  // comparison happens relative to each core
  Pts shifted;
  for (const auto& p : pts) shifted.push_back({p.x + 1000, p.y});
  EXPECT_EQ(match_decision(as_set(shifted, {1005, 5}), t, 1e-9).decision, Decision::Accept);

  EXPECT_THROW(match_decision(t, t, 0.0), Error);
  auto no_core = t;
  no_core.core.reset();
  EXPECT_THROW(match_decision(no_core, t, 1.0), Error);
}

}  // namespace
}  // namespace fpv
