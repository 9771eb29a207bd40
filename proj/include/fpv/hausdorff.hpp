#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fpv/core.hpp"
#include "fpv/error.hpp"

namespace fpv {

inline constexpr double kDefaultMatchThreshold = 12.0;

namespace detail {

inline void require_non_empty(std::span<const Point> a, std::span<const Point> b) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptySet, "distance between empty point sets is undefined");
}

inline double nearest_squared(const Point& p, std::span<const Point> set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : set) best = std::min(best, squared_distance(p, q));
  return best;
}

}  // namespace detail

/// h(M, N) = max over m of min over n of |m - n|.
///
/// Works on squared distances and takes one square root at the end, which
/// gives the same value as taking roots per pair because sqrt is monotone
/// and correctly rounded. The inner scan stops as soon as the running
/// minimum can no longer raise the maximum.
inline double directed_hausdorff(std::span<const Point> from, std::span<const Point> to) {
  detail::require_non_empty(from, to);
  double cmax = 0.0;
  for (const auto& m : from) {
    double cmin = std::numeric_limits<double>::infinity();
    for (const auto& n : to) {
      const double d = squared_distance(m, n);
      if (d < cmin) {
        cmin = d;
        if (cmin <= cmax) break;
      }
    }
    cmax = std::max(cmax, cmin);
  }
  return std::sqrt(cmax);
}

inline double hausdorff(std::span<const Point> a, std::span<const Point> b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

/// Mean over `from` of the distance to the nearest point of `to`.
inline double directed_modified_hausdorff(std::span<const Point> from, std::span<const Point> to) {
  detail::require_non_empty(from, to);
  double sum = 0.0;
  for (const auto& m : from) sum += std::sqrt(detail::nearest_squared(m, to));
  return sum / static_cast<double>(from.size());
}

/// Modified Hausdorff distance: the larger of the two directed means.
inline double modified_hausdorff(std::span<const Point> a, std::span<const Point> b) {
  return std::max(directed_modified_hausdorff(a, b), directed_modified_hausdorff(b, a));
}

enum class Decision { Accept, Reject };

struct MatchScore {
  double hausdorff = 0.0;
  double mhd = 0.0;
  double directed_ab = 0.0;
  double directed_ba = 0.0;
  Decision decision = Decision::Reject;
  double threshold_used = 0.0;
};

/// Scores two point sets that are already in a common frame. Accept iff the
/// modified Hausdorff distance is at most `tau`.
inline MatchScore score_points(std::span<const Point> probe, std::span<const Point> templ, double tau) {
  if (!(tau > 0.0)) throw Error(Errc::InvalidArgument, "threshold must be positive");
  MatchScore s;
  s.directed_ab = directed_hausdorff(probe, templ);
  s.directed_ba = directed_hausdorff(templ, probe);
  s.hausdorff = std::max(s.directed_ab, s.directed_ba);
  s.mhd = modified_hausdorff(probe, templ);
  s.threshold_used = tau;
  s.decision = s.mhd <= tau ? Decision::Accept : Decision::Reject;
  return s;
}

/// Compares probe and template minutiae positions relative to their cores.
inline MatchScore match_decision(const MinutiaeSet& probe, const MinutiaeSet& templ, double tau) {
  if (probe.minutiae.empty() || templ.minutiae.empty()) throw Error(Errc::EmptySet, "empty minutiae set");
  const auto p = core_relative(probe);
  const auto t = core_relative(templ);
  return score_points(p, t, tau);
}

}  // namespace fpv
