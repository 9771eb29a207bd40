#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "fpv/core.hpp"
#include "fpv/error.hpp"

namespace fpv {

inline constexpr int kBlockSize = 16;
inline constexpr int kWindowBlocks = 16;
inline constexpr int kFeatureDim = kWindowBlocks * kWindowBlocks;
inline constexpr double kDefaultSegmentThreshold = 0.15;

/// Maps an orientation into [0, pi).
inline double normalize_orientation(double a) {
  constexpr double pi = std::numbers::pi;
  double r = std::fmod(a, pi);
  if (r < 0.0) r += pi;
  if (r >= pi) r = 0.0;
  return r;
}

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Block directional image with per-block certainty. Directions are ridge
/// orientations in [0, pi) measured from the +x axis with y pointing down.
struct OrientationField {
  int cols = 0;
  int rows = 0;
  int block_size = kBlockSize;
  std::vector<double> directions;
  std::vector<double> certainties;

  OrientationField() = default;
  OrientationField(int c, int r, int bs = kBlockSize)
      : cols(c), rows(r), block_size(bs),
        directions(static_cast<std::size_t>(c) * static_cast<std::size_t>(r), 0.0),
        certainties(static_cast<std::size_t>(c) * static_cast<std::size_t>(r), 0.0) {}

  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * cols + col; }
  bool contains(int row, int col) const { return row >= 0 && row < rows && col >= 0 && col < cols; }
  double direction(int row, int col) const { return directions[index(row, col)]; }
  double certainty(int row, int col) const { return certainties[index(row, col)]; }
  bool foreground(int row, int col) const { return certainty(row, col) > 0.0; }

  friend bool operator==(const OrientationField&, const OrientationField&) = default;
};

struct FeatureVector {
  std::array<double, kFeatureDim> directions{};
  std::array<double, kFeatureDim> certainties{};
  std::optional<FingerClass> class_label;
};

/// Gradient-based block orientation with coherence as certainty.
/// Gradients are 3x3 Sobel responses with edge replication.
inline OrientationField estimate_block_directions(const GrayImage& img, int block_size = kBlockSize) {
  if (img.width < block_size || img.height < block_size)
    throw Error(Errc::ImageTooSmall, "image must be at least one block in each dimension");
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
    throw Error(Errc::InvalidArgument, "pixel buffer size does not match dimensions");

  auto px = [&](int x, int y) -> double {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return img.at(x, y);
  };

  OrientationField field(img.width / block_size, img.height / block_size, block_size);
  for (int br = 0; br < field.rows; ++br) {
    for (int bc = 0; bc < field.cols; ++bc) {
      double gxx = 0.0, gyy = 0.0, gxy = 0.0;
      for (int y = br * block_size; y < (br + 1) * block_size; ++y) {
        for (int x = bc * block_size; x < (bc + 1) * block_size; ++x) {
          const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                            (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
          const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                            (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
          gxx += gx * gx;
          gyy += gy * gy;
          gxy += gx * gy;
        }
      }
      const auto i = field.index(br, bc);
      const double energy = gxx + gyy;
      if (energy <= 0.0) {
        field.directions[i] = 0.0;
        field.certainties[i] = 0.0;
        continue;
      }
      // Gradient direction rotated by 90 degrees gives the ridge direction.
      field.directions[i] = normalize_orientation(0.5 * std::atan2(2.0 * gxy, gxx - gyy) + std::numbers::pi / 2.0);
      const double coherence = std::sqrt((gxx - gyy) * (gxx - gyy) + 4.0 * gxy * gxy) / energy;
      field.certainties[i] = std::clamp(coherence, 0.0, 1.0);
    }
  }
  return field;
}

inline OrientationField segment_by_certainty(OrientationField field, double threshold = kDefaultSegmentThreshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw Error(Errc::InvalidArgument, "segmentation threshold must lie in [0, 1]");
  for (auto& c : field.certainties) {
    if (c < threshold) c = 0.0;
  }
  return field;
}

/// Poincare index of the closed loop through blocks (r,c) -> (r,c+1) ->
/// (r+1,c+1) -> (r+1,c). Orientation differences are wrapped into
/// (-pi/2, pi/2]; the result is a multiple of 1/2 (+1/2 core, -1/2 delta).
inline double poincare_index(const OrientationField& f, int row, int col) {
  constexpr double pi = std::numbers::pi;
  const std::array<double, 4> loop{f.direction(row, col), f.direction(row, col + 1), f.direction(row + 1, col + 1),
                                   f.direction(row + 1, col)};
  double sum = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    double d = loop[(i + 1) % loop.size()] - loop[i];
    while (d > pi / 2.0) d -= pi;
    while (d <= -pi / 2.0) d += pi;
    sum += d;
  }
  return std::round(sum / pi) / 2.0;
}

struct CoreEstimate {
  CorePoint core;
  int row = 0;  // top-left block of the winning 2x2 window
  int col = 0;
  double poincare = 0.0;
  double local_certainty = 0.0;
  bool confident = false;  // a +1/2 singularity was found
};

/// Picks the 2x2 all-foreground window whose Poincare index is closest to
/// +1/2; ties go to the higher mean certainty, then row-major order. The
/// reported core is the window center (the shared corner of its blocks).
inline CoreEstimate detect_core(const OrientationField& f) {
  std::optional<CoreEstimate> best;
  double best_gap = 0.0;
  for (int r = 0; r + 1 < f.rows; ++r) {
    for (int c = 0; c + 1 < f.cols; ++c) {
      if (!f.foreground(r, c) || !f.foreground(r, c + 1) || !f.foreground(r + 1, c) || !f.foreground(r + 1, c + 1))
        continue;
      const double idx = poincare_index(f, r, c);
      const double gap = std::abs(idx - 0.5);
      const double cert = (f.certainty(r, c) + f.certainty(r, c + 1) + f.certainty(r + 1, c) + f.certainty(r + 1, c + 1)) / 4.0;
      if (!best || gap < best_gap || (gap == best_gap && cert > best->local_certainty)) {
        const double bs = f.block_size;
        best = CoreEstimate{{(c + 1) * bs, (r + 1) * bs}, r, c, idx, cert, idx == 0.5};
        best_gap = gap;
      }
    }
  }
  if (!best) throw Error(Errc::NoForeground, "no 2x2 window of foreground blocks");
  return *best;
}

/// Flattens the 16x16 block window around the core's block (rows and
/// columns -8..+7 relative to it) into a 256-component vector. Cells outside
/// the field or in the background get certainty 0 and the mean foreground
/// direction of the window.
inline FeatureVector extract_feature_vector(const OrientationField& f, const CorePoint& core) {
  const int core_col = static_cast<int>(std::floor(core.x / f.block_size));
  const int core_row = static_cast<int>(std::floor(core.y / f.block_size));
  const int top = core_row - kWindowBlocks / 2;
  const int left = core_col - kWindowBlocks / 2;

  double sum = 0.0;
  int count = 0;
  for (int wr = 0; wr < kWindowBlocks; ++wr) {
    for (int wc = 0; wc < kWindowBlocks; ++wc) {
      const int r = top + wr, c = left + wc;
      if (f.contains(r, c) && f.foreground(r, c)) {
        sum += f.direction(r, c);
        ++count;
      }
    }
  }
  const double fill = count > 0 ? sum / count : 0.0;

  FeatureVector fv;
  for (int wr = 0; wr < kWindowBlocks; ++wr) {
    for (int wc = 0; wc < kWindowBlocks; ++wc) {
      const int r = top + wr, c = left + wc;
      const std::size_t k = static_cast<std::size_t>(wr) * kWindowBlocks + wc;
      if (f.contains(r, c) && f.foreground(r, c)) {
        fv.directions[k] = f.direction(r, c);
        fv.certainties[k] = f.certainty(r, c);
      } else {
        fv.directions[k] = fill;
        fv.certainties[k] = 0.0;
      }
    }
  }
  return fv;
}

}  // namespace fpv
