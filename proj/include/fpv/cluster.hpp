#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fpv/core.hpp"
#include "fpv/error.hpp"

namespace fpv {

inline constexpr int kDefaultClusters = 5;
inline constexpr int kMaxLloydIterations = 500;

struct ClusterResult {
  int k = 0;
  std::vector<Point> centroids;  // core-relative
  std::vector<int> assignment;   // cluster id per minutia, in input order
  double objective = 0.0;        // sum of squared point-to-centroid distances
  int iterations = 0;
  // Objective after the initial assignment to the seeds, then after every
  // centroid update.
  std::vector<double> objective_trace;
};

/// Deterministic seeds: points sorted by (radius, angle about the origin,
/// input order); seed i is the point at rank floor((2i+1)n / 2k).
inline std::vector<Point> radial_seed(std::span<const Point> pts, int k) {
  const auto n = static_cast<int>(pts.size());
  if (k < 1 || n < k) throw Error(Errc::TooFewPoints, "need at least k points to seed k clusters");

  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> r2(pts.size()), angle(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r2[i] = pts[i].x * pts[i].x + pts[i].y * pts[i].y;
    angle[i] = normalize_angle(std::atan2(pts[i].y, pts[i].x));
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (r2[a] != r2[b]) return r2[a] < r2[b];
    if (angle[a] != angle[b]) return angle[a] < angle[b];
    return a < b;
  });

  std::vector<Point> seeds;
  seeds.reserve(k);
  for (int i = 0; i < k; ++i) {
    const long rank = (2L * i + 1) * n / (2L * k);
    seeds.push_back(pts[order[rank]]);
  }
  return seeds;
}

namespace detail {

// Nearest centroid per point; ties go to the lowest centroid id.
inline std::vector<int> assign_nearest(std::span<const Point> pts, std::span<const Point> centroids) {
  std::vector<int> a(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      const double d = squared_distance(pts[i], centroids[j]);
      if (d < best) {
        best = d;
        a[i] = static_cast<int>(j);
      }
    }
  }
  return a;
}

inline double sse(std::span<const Point> pts, std::span<const Point> centroids, std::span<const int> assignment) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) s += squared_distance(pts[i], centroids[assignment[i]]);
  return s;
}

// Each empty cluster takes over the point farthest from its current
// centroid (among clusters that can spare one) and is re-centred on it.
inline void repair_empty(std::span<const Point> pts, std::vector<Point>& centroids, std::vector<int>& assignment) {
  const std::size_t k = centroids.size();
  std::vector<int> sizes(k, 0);
  for (int a : assignment) ++sizes[a];
  for (std::size_t j = 0; j < k; ++j) {
    if (sizes[j] > 0) continue;
    int far = -1;
    double far_d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (sizes[assignment[i]] < 2) continue;
      const double d = squared_distance(pts[i], centroids[assignment[i]]);
      if (d > far_d) {
        far_d = d;
        far = static_cast<int>(i);
      }
    }
    --sizes[assignment[far]];
    assignment[far] = static_cast<int>(j);
    sizes[j] = 1;
    centroids[j] = pts[far];
  }
}

inline std::vector<Point> cluster_means(std::span<const Point> pts, std::span<const int> assignment, std::size_t k) {
  std::vector<Point> sum(k);
  std::vector<int> count(k, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sum[assignment[i]].x += pts[i].x;
    sum[assignment[i]].y += pts[i].y;
    ++count[assignment[i]];
  }
  for (std::size_t j = 0; j < k; ++j) sum[j] = {sum[j].x / count[j], sum[j].y / count[j]};
  return sum;
}

}  // namespace detail

/// Lloyd iterations from the given seeds until no assignment changes or the
/// iteration cap is hit.
inline ClusterResult lloyd(std::span<const Point> pts, std::vector<Point> seeds,
                           int max_iterations = kMaxLloydIterations) {
  const std::size_t k = seeds.size();
  if (k < 1 || pts.size() < k) throw Error(Errc::TooFewPoints, "need at least k points for k clusters");

  ClusterResult res;
  res.k = static_cast<int>(k);
  res.centroids = std::move(seeds);
  res.assignment = detail::assign_nearest(pts, res.centroids);
  detail::repair_empty(pts, res.centroids, res.assignment);
  res.objective_trace.push_back(detail::sse(pts, res.centroids, res.assignment));

  while (true) {
    res.centroids = detail::cluster_means(pts, res.assignment, k);
    res.objective_trace.push_back(detail::sse(pts, res.centroids, res.assignment));
    ++res.iterations;
    auto next = detail::assign_nearest(pts, res.centroids);
    if (next == res.assignment || res.iterations >= max_iterations) break;
    detail::repair_empty(pts, res.centroids, next);
    res.assignment = std::move(next);
  }
  res.objective = detail::sse(pts, res.centroids, res.assignment);
  return res;
}

/// k-means over the minutiae in the frame centred on `core`.
inline ClusterResult kmeans_fing(const MinutiaeSet& set, int k, const CorePoint& core) {
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (set.minutiae.size() < static_cast<std::size_t>(k))
    throw Error(Errc::TooFewPoints, "set '" + set.source_id + "' has fewer minutiae than clusters");
  const auto pts = core_relative(set, core);
  return lloyd(pts, radial_seed(pts, k));
}

inline ClusterResult kmeans_fing(const MinutiaeSet& set, int k) {
  if (!set.core) throw Error(Errc::MissingCore, "minutiae set '" + set.source_id + "' has no core point");
  return kmeans_fing(set, k, *set.core);
}

}  // namespace fpv
