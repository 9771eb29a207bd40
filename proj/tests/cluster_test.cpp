#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fpv/cluster.hpp"

namespace fpv {
namespace {

MinutiaeSet make_set(const std::vector<Point>& pts, CorePoint core = {0, 0}) {
  MinutiaeSet s;
  s.core = core;
  for (const auto& p : pts) s.minutiae.push_back({p.x, p.y, 0.0, MinutiaKind::Ending});
  return s;
}

// Best objective over every assignment of n points to k non-empty clusters.
double brute_force_optimum(const std::vector<Point>& pts, int k) {
  const int n = static_cast<int>(pts.size());
  long total = 1;
  for (int i = 0; i < n; ++i) total *= k;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> a(n);
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(c % k);
      c /= k;
    }
    std::vector<double> sx(k, 0), sy(k, 0);
    std::vector<int> cnt(k, 0);
    for (int i = 0; i < n; ++i) {
      sx[a[i]] += pts[i].x;
      sy[a[i]] += pts[i].y;
      ++cnt[a[i]];
    }
    if (std::find(cnt.begin(), cnt.end(), 0) != cnt.end()) continue;
    double obj = 0;
    for (int i = 0; i < n; ++i) {
      const double dx = pts[i].x - sx[a[i]] / cnt[a[i]], dy = pts[i].y - sy[a[i]] / cnt[a[i]];
      obj += dx * dx + dy * dy;
    }
    best = std::min(best, obj);
  }
  return best;
}

void expect_fixed_point(const std::vector<Point>& pts, const ClusterResult& r) {
  EXPECT_EQ(detail::assign_nearest(pts, r.centroids), r.assignment);
  const auto means = detail::cluster_means(pts, r.assignment, r.k);
  for (int j = 0; j < r.k; ++j) {
    EXPECT_NEAR(means[j].x, r.centroids[j].x, 1e-9);
    EXPECT_NEAR(means[j].y, r.centroids[j].y, 1e-9);
  }
}

TEST(KMeans, SingleClusterIsTheMean) {
  std::vector<Point> pts{{1, 2}, {3, 8}, {-4, 0}, {6, -1}};
  const auto r = kmeans_fing(make_set(pts, {1, 1}), 1);
  ASSERT_EQ(r.centroids.size(), 1u);
  EXPECT_NEAR(r.centroids[0].x, 1.5 - 1, 1e-12);
  EXPECT_NEAR(r.centroids[0].y, 2.25 - 1, 1e-12);
  double var = 0;
  for (const auto& p : pts) var += (p.x - 1.5) * (p.x - 1.5) + (p.y - 2.25) * (p.y - 2.25);
  EXPECT_NEAR(r.objective, var, 1e-9);
}

TEST(KMeans, SymmetricTwoClusters) {
  const auto r = kmeans_fing(make_set({{0, 0}, {0, 1}, {10, 0}, {10, 1}}), 2);
  std::vector<Point> c = r.centroids;
  std::sort(c.begin(), c.end(), [](Point a, Point b) { return a.x < b.x; });
  EXPECT_EQ(c[0], (Point{0, 0.5}));
  EXPECT_EQ(c[1], (Point{10, 0.5}));
  EXPECT_EQ(r.objective, 1.0);
  EXPECT_EQ(r.assignment[0], r.assignment[1]);
  EXPECT_NE(r.assignment[0], r.assignment[2]);
}

TEST(KMeans, Errors) {
  try {
    kmeans_fing(make_set({{0, 0}, {1, 1}}), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooFewPoints);
  }
  auto s = make_set({{0, 0}, {1, 1}});
  s.core.reset();
  try {
    kmeans_fing(s, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingCore);
  }
}

TEST(KMeans, EveryClusterNonEmptyWithDuplicates) {
  // seven copies of one point and one outlier: three clusters still need members
  std::vector<Point> pts(7, Point{1, 1});
  pts.push_back({50, 50});
  const auto r = lloyd(pts, {{1, 1}, {1, 1}, {50, 50}});
  std::vector<int> sizes(3, 0);
  for (int a : r.assignment) ++sizes[a];
  for (int s : sizes) EXPECT_GT(s, 0);
  EXPECT_NEAR(r.objective, detail::sse(pts, r.centroids, r.assignment), 1e-9);
}

TEST(RadialSeed, Examples) {
  std::vector<Point> pts{{3, 0}, {0, 1}, {-2, 0}, {0, -5}};
  EXPECT_EQ(radial_seed(pts, 4), (std::vector<Point>{{0, 1}, {-2, 0}, {3, 0}, {0, -5}}));
  // k = 1: rank floor(n/2) of the radius order, i.e. the median radius
  EXPECT_EQ(radial_seed(pts, 1), (std::vector<Point>{{3, 0}}));
}

TEST(RadialSeed, EqualRadiusUsesAngleRanks) {
  // all eight points have r^2 = 25 exactly
  const std::vector<Point> pts{{-3, -4}, {5, 0}, {4, 3}, {0, -5}, {-5, 0}, {3, 4}, {0, 5}, {-4, 3}};
  // angle order in [0, 2pi): (5,0) (4,3) (3,4) (0,5) (-4,3) (-5,0) (-3,-4) (0,-5)
  EXPECT_EQ(radial_seed(pts, 2), (std::vector<Point>{{3, 4}, {-3, -4}}));
}

TEST(KMeansProperty, BruteForceOracleSmallInstances) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const int k = 1 + static_cast<int>(rng() % std::min(3, n));
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
    const auto r = kmeans_fing(make_set(pts), k);
    EXPECT_GE(r.objective, brute_force_optimum(pts, k) - 1e-9);
    expect_fixed_point(pts, r);
  }
}

TEST(KMeansProperty, ObjectiveNonIncreasingAndInvariantsHold) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-120.0, 120.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 40);
    const int k = 1 + static_cast<int>(rng() % 6);
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
    const auto r = kmeans_fing(make_set(pts), k);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1]);
    EXPECT_NEAR(r.objective, detail::sse(pts, r.centroids, r.assignment), 1e-9);
    std::vector<int> sizes(k, 0);
    for (int a : r.assignment) ++sizes[a];
    for (int s : sizes) EXPECT_GT(s, 0);
    expect_fixed_point(pts, r);
  }
}

// Coordinates on a 1/1024 grid and integer shifts keep every subtraction
// exact, so the core-relative frame cancels the translation bit for bit.
TEST(KMeansProperty, TranslationInvarianceExact) {
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> q(-120 * 1024, 120 * 1024), t(-500, 500);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({q(rng) / 1024.0 + 150, q(rng) / 1024.0 + 150});
    const auto set = make_set(pts, {150, 150});
    const auto moved = apply_transform(set, RigidTransform::translate(t(rng), t(rng)));
    const auto a = kmeans_fing(set, 5), b = kmeans_fing(moved, 5);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.centroids, b.centroids);
  }
}

TEST(KMeansProperty, TranslationInvarianceGeneral) {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(-120.0, 120.0), t(-400.0, 400.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({u(rng) + 150, u(rng) + 150});
    const auto set = make_set(pts, {150, 150});
    const auto moved = apply_transform(set, RigidTransform::translate(t(rng), t(rng)));
    const auto a = kmeans_fing(set, 5), b = kmeans_fing(moved, 5);
    EXPECT_EQ(a.assignment, b.assignment);
    for (int j = 0; j < 5; ++j) {
      EXPECT_NEAR(a.centroids[j].x, b.centroids[j].x, 1e-9);
      EXPECT_NEAR(a.centroids[j].y, b.centroids[j].y, 1e-9);
    }
  }
}

TEST(KMeansProperty, RotationCovariance) {
  std::mt19937_64 rng(46);
  std::uniform_real_distribution<double> u(-120.0, 120.0), a(-std::numbers::pi, std::numbers::pi);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({u(rng), u(rng)});
    const auto set = make_set(pts, {7, -3});
    const double angle = a(rng);
    const auto moved = apply_transform(set, RigidTransform::rotate_about(angle, {7, -3}));
    const auto r0 = kmeans_fing(set, 5), r1 = kmeans_fing(moved, 5);
    EXPECT_EQ(r0.assignment, r1.assignment);
    const auto rotated = rotate_about_origin(r0.centroids, angle);
    for (int j = 0; j < 5; ++j) {
      EXPECT_NEAR(rotated[j].x, r1.centroids[j].x, 1e-9);
      EXPECT_NEAR(rotated[j].y, r1.centroids[j].y, 1e-9);
    }
  }
}

}  // namespace
}  // namespace fpv
