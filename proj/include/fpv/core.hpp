#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpv/error.hpp"

namespace fpv {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Maps any finite angle into [0, 2*pi).
inline double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

enum class MinutiaKind : std::uint8_t { Ending, Bifurcation };

struct Minutia {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // ridge direction, radians in [0, 2*pi)
  MinutiaKind kind = MinutiaKind::Ending;
  friend bool operator==(const Minutia&, const Minutia&) = default;
};

struct CorePoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const CorePoint&, const CorePoint&) = default;
};

struct MinutiaeSet {
  std::vector<Minutia> minutiae;
  std::optional<CorePoint> core;
  std::string source_id;
  friend bool operator==(const MinutiaeSet&, const MinutiaeSet&) = default;
};

enum class FingerClass : std::uint8_t { Arch, TentedArch, LeftLoop, RightLoop, Whorl };
inline constexpr int kNumClasses = 5;

inline std::string_view to_string(FingerClass c) {
  switch (c) {
    case FingerClass::Arch: return "Arch";
    case FingerClass::TentedArch: return "TentedArch";
    case FingerClass::LeftLoop: return "LeftLoop";
    case FingerClass::RightLoop: return "RightLoop";
    case FingerClass::Whorl: return "Whorl";
  }
  return "?";
}

inline std::optional<FingerClass> parse_finger_class(std::string_view s) {
  for (int i = 0; i < kNumClasses; ++i) {
    auto c = static_cast<FingerClass>(i);
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

/// Rotation by `rotation` about `pivot`, followed by `translation`.
/// Scaling is not representable.
struct RigidTransform {
  double rotation = 0.0;
  Point translation;
  Point pivot;

  static RigidTransform make(double rotation, Point translation = {}, Point pivot = {}) {
    return {normalize_angle(rotation), translation, pivot};
  }
  static RigidTransform translate(double dx, double dy) { return {0.0, {dx, dy}, {}}; }
  static RigidTransform rotate_about(double rotation, Point pivot) { return make(rotation, {}, pivot); }

  RigidTransform inverse() const {
    return make(-rotation, {-translation.x, -translation.y},
                {pivot.x + translation.x, pivot.y + translation.y});
  }

  Point apply(Point p) const {
    if (rotation != 0.0) {
      const double c = std::cos(rotation);
      const double s = std::sin(rotation);
      const double rx = p.x - pivot.x;
      const double ry = p.y - pivot.y;
      p = {pivot.x + (c * rx - s * ry), pivot.y + (s * rx + c * ry)};
    }
    if (translation.x != 0.0) p.x += translation.x;
    if (translation.y != 0.0) p.y += translation.y;
    return p;
  }
};

inline MinutiaeSet apply_transform(const MinutiaeSet& set, const RigidTransform& t) {
  MinutiaeSet out;
  out.source_id = set.source_id;
  out.minutiae.reserve(set.minutiae.size());
  for (const auto& m : set.minutiae) {
    const Point p = t.apply({m.x, m.y});
    out.minutiae.push_back({p.x, p.y, t.rotation == 0.0 ? m.theta : normalize_angle(m.theta + t.rotation), m.kind});
  }
  if (set.core) {
    const Point c = t.apply({set.core->x, set.core->y});
    out.core = CorePoint{c.x, c.y};
  }
  return out;
}

inline std::vector<Point> positions(const MinutiaeSet& set) {
  std::vector<Point> out;
  out.reserve(set.minutiae.size());
  for (const auto& m : set.minutiae) out.push_back({m.x, m.y});
  return out;
}

/// Minutia positions translated so that `core` sits at the origin.
inline std::vector<Point> core_relative(const MinutiaeSet& set, const CorePoint& core) {
  std::vector<Point> out;
  out.reserve(set.minutiae.size());
  for (const auto& m : set.minutiae) out.push_back({m.x - core.x, m.y - core.y});
  return out;
}

inline std::vector<Point> core_relative(const MinutiaeSet& set) {
  if (!set.core) throw Error(Errc::MissingCore, "minutiae set '" + set.source_id + "' has no core point");
  return core_relative(set, *set.core);
}

inline std::vector<Point> rotate_about_origin(std::span<const Point> pts, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<Point> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({c * p.x - s * p.y, s * p.x + c * p.y});
  return out;
}

/// Rotation about the origin that best maps `from[i]` onto `to[i]` in the
/// least-squares sense (2-D orthogonal Procrustes without translation).
inline double best_rotation_about_origin(std::span<const Point> from, std::span<const Point> to) {
  double dot = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < from.size() && i < to.size(); ++i) {
    dot += from[i].x * to[i].x + from[i].y * to[i].y;
    cross += from[i].x * to[i].y - from[i].y * to[i].x;
  }
  return std::atan2(cross, dot);
}

inline bool is_finite(const Minutia& m) {
  return std::isfinite(m.x) && std::isfinite(m.y) && std::isfinite(m.theta);
}

}  // namespace fpv
