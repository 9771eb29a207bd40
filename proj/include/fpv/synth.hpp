#pragma once

// Parametric stand-ins for real fingerprint data: uniform minutiae in a
// disk, jittered/rigidly-moved impressions, and zero-pole orientation
// fields with class-specific singularity layouts.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fpv/core.hpp"
#include "fpv/error.hpp"
#include "fpv/orientation.hpp"

namespace fpv {

struct SynthConfig {
  int n_minutiae = 30;
  double disk_radius = 120.0;    // pixels
  double jitter_sigma = 0.0;     // pixels, per coordinate
  FingerClass finger_class = FingerClass::Arch;
  std::uint64_t seed = 0;

  Point center{150.0, 150.0};    // disk centre = core position
  double min_separation = 5.0;   // pixels between generated minutiae
  double max_rotation = std::numbers::pi;  // impressions rotate uniformly in [-r, r]
  double max_translation = 40.0;           // and shift uniformly in [-t, t] per axis

  int field_blocks = 24;              // orientation field is field_blocks^2 blocks
  double field_disk_radius = 176.0;   // foreground disk of the field, pixels
  double orientation_noise = 0.0;     // per-block direction noise, radians

  void validate() const {
    if (n_minutiae < 1) throw Error(Errc::InvalidArgument, "n_minutiae must be >= 1");
    if (disk_radius < 0 || jitter_sigma < 0 || min_separation < 0 || max_rotation < 0 || max_translation < 0 ||
        field_disk_radius < 0 || orientation_noise < 0)
      throw Error(Errc::InvalidArgument, "radii, sigmas and ranges must be non-negative");
    if (field_blocks < 2) throw Error(Errc::InvalidArgument, "field needs at least 2x2 blocks");
  }
};

inline constexpr int kMaxSynthAttempts = 100000;

namespace detail {
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
}  // namespace detail

/// Uniform minutiae in a disk around the core with a minimum pairwise
/// separation enforced by rejection sampling.
inline MinutiaeSet gen_synthetic_minutiae(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  MinutiaeSet set;
  set.source_id = "synth-" + std::to_string(cfg.seed);
  set.core = CorePoint{cfg.center.x, cfg.center.y};
  const double sep2 = cfg.min_separation * cfg.min_separation;

  int attempts = 0;
  while (static_cast<int>(set.minutiae.size()) < cfg.n_minutiae) {
    if (++attempts > kMaxSynthAttempts)
      throw Error(Errc::ConfigInfeasible, "could not place minutiae with the requested separation");
    const double r = cfg.disk_radius * std::sqrt(detail::uniform(rng, 0.0, 1.0));
    const double a = detail::uniform(rng, 0.0, kTwoPi);
    const double theta = detail::uniform(rng, 0.0, kTwoPi);
    const bool bif = detail::uniform(rng, 0.0, 1.0) < 0.5;
    const Point p{cfg.center.x + r * std::cos(a), cfg.center.y + r * std::sin(a)};
    bool ok = true;
    for (const auto& m : set.minutiae) {
      if (squared_distance(p, {m.x, m.y}) < sep2) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    set.minutiae.push_back({p.x, p.y, normalize_angle(theta), bif ? MinutiaKind::Bifurcation : MinutiaKind::Ending});
  }
  return set;
}

/// Another impression of the same finger: Gaussian jitter on every minutia
/// position, then one random rigid motion about the core.
inline MinutiaeSet perturb_impression(const MinutiaeSet& set, const SynthConfig& cfg) {
  cfg.validate();
  if (!set.core) throw Error(Errc::MissingCore, "impression needs a core to rotate about");
  std::mt19937_64 rng(cfg.seed);
  MinutiaeSet out = set;
  if (cfg.jitter_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.jitter_sigma);
    for (auto& m : out.minutiae) {
      m.x += noise(rng);
      m.y += noise(rng);
    }
  }
  const double rot = detail::uniform(rng, -cfg.max_rotation, cfg.max_rotation);
  const double dx = detail::uniform(rng, -cfg.max_translation, cfg.max_translation);
  const double dy = detail::uniform(rng, -cfg.max_translation, cfg.max_translation);
  const Point pivot{set.core->x, set.core->y};
  return apply_transform(out, RigidTransform::make(rot, {dx, dy}, pivot));
}

struct Singularities {
  std::vector<Point> cores;   // pixels
  std::vector<Point> deltas;  // pixels
};

/// Zero-pole orientation model evaluated at block centres:
/// 1/2 * [sum arg(z - core) - sum arg(z - delta)] + base, taken mod pi.
/// Certainty is 1 inside the disk and 0 outside.
inline OrientationField zero_pole_field(int cols, int rows, const Singularities& s, double base_angle, Point disk_center,
                                        double disk_radius, int block_size = kBlockSize) {
  OrientationField f(cols, rows, block_size);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Point z{(c + 0.5) * block_size, (r + 0.5) * block_size};
      double a = base_angle;
      for (const auto& p : s.cores) a += 0.5 * std::atan2(z.y - p.y, z.x - p.x);
      for (const auto& p : s.deltas) a -= 0.5 * std::atan2(z.y - p.y, z.x - p.x);
      const auto i = f.index(r, c);
      f.directions[i] = normalize_orientation(a);
      f.certainties[i] = squared_distance(z, disk_center) <= disk_radius * disk_radius ? 1.0 : 0.0;
    }
  }
  return f;
}

/// Class-specific singularity layout around `core` (offsets in blocks,
/// y pointing down). The first core is the reference core.
inline Singularities class_layout(FingerClass c, Point core, int block_size = kBlockSize) {
  const double b = block_size;
  auto at = [&](double dx, double dy) { return Point{core.x + dx * b, core.y + dy * b}; };
  switch (c) {
    case FingerClass::Arch: return {};
    case FingerClass::TentedArch: return {{core}, {at(0.0, 4.5)}};
    case FingerClass::LeftLoop: return {{core}, {at(-4.5, 4.0)}};
    case FingerClass::RightLoop: return {{core}, {at(4.5, 4.0)}};
    case FingerClass::Whorl: return {{core, at(0.0, 2.0)}, {at(-5.0, 5.5), at(5.0, 5.5)}};
  }
  return {};
}

struct SyntheticField {
  OrientationField field;
  CorePoint core;  // planted reference core (field centre for arches)
  FingerClass finger_class = FingerClass::Arch;
};

/// Random field of the configured class: the reference core sits near the
/// centre of the field (within 0.4 block of a block corner), the base angle
/// varies in [0.1, 0.3] rad and optional Gaussian noise perturbs every block.
inline SyntheticField gen_synthetic_orientation(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const double bs = kBlockSize;
  const double mid = (cfg.field_blocks / 2) * bs;
  const Point core{mid + detail::uniform(rng, -0.4, 0.4) * bs, mid + detail::uniform(rng, -0.4, 0.4) * bs};
  const double base = detail::uniform(rng, 0.1, 0.3);

  SyntheticField out;
  out.finger_class = cfg.finger_class;
  out.core = CorePoint{core.x, core.y};
  out.field = zero_pole_field(cfg.field_blocks, cfg.field_blocks, class_layout(cfg.finger_class, core), base,
                              Point{mid, mid}, cfg.field_disk_radius);
  if (cfg.orientation_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.orientation_noise);
    for (auto& d : out.field.directions) d = normalize_orientation(d + noise(rng));
  }
  return out;
}

/// Renders a field as a gray image: each foreground block holds a plane
/// wave of period `period` pixels whose crests run along the block
/// direction; background blocks are flat gray.
inline GrayImage render_field(const OrientationField& f, double period = 8.0) {
  GrayImage img(f.cols * f.block_size, f.rows * f.block_size, 128);
  for (int r = 0; r < f.rows; ++r) {
    for (int c = 0; c < f.cols; ++c) {
      if (!f.foreground(r, c)) continue;
      const double th = f.direction(r, c);
      const double nx = -std::sin(th), ny = std::cos(th);
      for (int y = r * f.block_size; y < (r + 1) * f.block_size; ++y) {
        for (int x = c * f.block_size; x < (c + 1) * f.block_size; ++x) {
          const double v = 128.0 + 100.0 * std::sin(kTwoPi * (nx * x + ny * y) / period);
          img.at(x, y) = static_cast<std::uint8_t>(std::lround(v));
        }
      }
    }
  }
  return img;
}

}  // namespace fpv
