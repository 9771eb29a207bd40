#pragma once

// Self-organizing map classifier over orientation feature vectors, in the
// conventional form and the certainty-weighted (MSOM) form.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpv/core.hpp"
#include "fpv/error.hpp"
#include "fpv/orientation.hpp"
#include "fpv/text.hpp"

namespace fpv {

enum class InitMode { Zero, SmallRandom };

struct TrainConfig {
  int epochs = 100;
  double initial_rate = 0.5;
  std::uint64_t seed = 0;
  InitMode init = InitMode::SmallRandom;
  double tolerance = 1e-6;  // stop once an epoch moves no weight by more than this

  /// Linear decay L(t) = L0 * (1 - t/K).
  double rate(int t) const { return initial_rate * (1.0 - static_cast<double>(t) / epochs); }

  /// Neighbourhood radius shrinking from the map side m towards 1.
  int radius(int t, int side) const {
    return static_cast<int>(std::lround(side - (side - 1) * static_cast<double>(t) / epochs));
  }

  void validate() const {
    if (epochs < 1) throw Error(Errc::InvalidArgument, "epochs must be >= 1");
    if (!(initial_rate > 0.0 && initial_rate <= 1.0)) throw Error(Errc::InvalidArgument, "initial rate must lie in (0, 1]");
  }
};

struct SomMap {
  int rows = 0;
  int cols = 0;
  std::size_t dim = kFeatureDim;
  std::vector<double> weights;                      // rows*cols nodes, dim values each
  std::vector<std::optional<FingerClass>> labels;   // nullopt = never won during labeling
  std::vector<double> x_avg;                        // training-set mean (MSOM blending)
  bool trained = false;

  SomMap() = default;
  SomMap(int r, int c, std::size_t d = kFeatureDim)
      : rows(r), cols(c), dim(d),
        weights(static_cast<std::size_t>(r) * static_cast<std::size_t>(c) * d, 0.0),
        labels(static_cast<std::size_t>(r) * static_cast<std::size_t>(c)),
        x_avg(d, 0.0) {
    if (r < 1 || c < 1 || d < 1) throw Error(Errc::InvalidArgument, "SOM grid and dimension must be positive");
  }

  int nodes() const { return rows * cols; }
  int side() const { return std::max(rows, cols); }
  std::span<double> node(int j) { return {weights.data() + static_cast<std::size_t>(j) * dim, dim}; }
  std::span<const double> node(int j) const { return {weights.data() + static_cast<std::size_t>(j) * dim, dim}; }
  int grid_row(int j) const { return j / cols; }
  int grid_col(int j) const { return j % cols; }

  friend bool operator==(const SomMap&, const SomMap&) = default;
};

namespace detail {

inline void check_dim(const SomMap& map, std::size_t n) {
  if (n != map.dim) throw Error(Errc::InvalidArgument, "input dimension does not match the map");
}

template <class Distance>
int argmin_node(const SomMap& map, Distance&& dist) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < map.nodes(); ++j) {
    const double d = dist(map.node(j));
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

inline int chebyshev(const SomMap& map, int a, int b) {
  return std::max(std::abs(map.grid_row(a) - map.grid_row(b)), std::abs(map.grid_col(a) - map.grid_col(b)));
}

}  // namespace detail

/// Node with the smallest Euclidean distance to `x`; ties go to the lowest index.
inline int find_winner(const SomMap& map, std::span<const double> x) {
  detail::check_dim(map, x.size());
  return detail::argmin_node(map, [&](std::span<const double> w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = x[i] - w[i];
      s += d * d;
    }
    return s;
  });
}

/// Node minimizing the certainty-weighted norm ||c * (x - w)||.
inline int msom_find_winner(const SomMap& map, std::span<const double> x, std::span<const double> c) {
  detail::check_dim(map, x.size());
  detail::check_dim(map, c.size());
  return detail::argmin_node(map, [&](std::span<const double> w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = c[i] * (x[i] - w[i]);
      s += d * d;
    }
    return s;
  });
}

/// X_c = c*x + (1-c)*x_avg, component-wise.
inline std::vector<double> msom_blend(std::span<const double> x, std::span<const double> c, std::span<const double> x_avg) {
  if (x.size() != c.size() || x.size() != x_avg.size()) throw Error(Errc::InvalidArgument, "blend dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = c[i] * x[i] + (1.0 - c[i]) * x_avg[i];
  return out;
}

namespace detail {

// Moves every node within the Chebyshev window of `winner` towards `x`.
// With `c` the per-component step is additionally scaled by c[i]. Returns
// the largest absolute component change.
inline double update_in_place(SomMap& map, std::span<const double> x, int winner, int t, const TrainConfig& cfg,
                              const double* c) {
  const double rate = cfg.rate(t);
  const int radius = cfg.radius(t, map.side());
  double max_change = 0.0;
  for (int j = 0; j < map.nodes(); ++j) {
    if (chebyshev(map, j, winner) > radius) continue;
    auto w = map.node(j);
    for (std::size_t i = 0; i < w.size(); ++i) {
      // Convex form of w + a*(x - w); exact at a = 0 and a = 1.
      const double a = c ? rate * c[i] : rate;
      const double next = (1.0 - a) * w[i] + a * x[i];
      max_change = std::max(max_change, std::abs(next - w[i]));
      w[i] = next;
    }
  }
  return max_change;
}

}  // namespace detail

/// One SOM update step for epoch `t`: w += L(t) * (x - w) * N(j, t).
inline SomMap update_weights(SomMap map, std::span<const double> x, int winner, int t, const TrainConfig& cfg) {
  detail::check_dim(map, x.size());
  if (t < 0 || t >= cfg.epochs) throw Error(Errc::InvalidArgument, "epoch index out of range");
  detail::update_in_place(map, x, winner, t, cfg, nullptr);
  return map;
}

/// MSOM update step: as update_weights with each component scaled by c[i].
inline SomMap msom_update_weights(SomMap map, std::span<const double> x, std::span<const double> c, int winner, int t,
                                  const TrainConfig& cfg) {
  detail::check_dim(map, x.size());
  detail::check_dim(map, c.size());
  if (t < 0 || t >= cfg.epochs) throw Error(Errc::InvalidArgument, "epoch index out of range");
  detail::update_in_place(map, x, winner, t, cfg, c.data());
  return map;
}

/// Called after every epoch with the epoch index and the current map.
using EpochObserver = std::function<void(int, const SomMap&)>;

namespace detail {

inline std::vector<double> training_mean(std::span<const FeatureVector> vectors) {
  std::vector<double> mean(kFeatureDim, 0.0);
  for (const auto& v : vectors)
    for (std::size_t i = 0; i < kFeatureDim; ++i) mean[i] += v.directions[i];
  for (auto& m : mean) m /= static_cast<double>(vectors.size());
  return mean;
}

// Majority vote per node; ties go to the class most frequent in the whole
// training set, then to enum order.
inline void label_nodes(SomMap& map, std::span<const FeatureVector> vectors, const std::vector<int>& winners) {
  std::vector<std::array<int, kNumClasses>> votes(map.nodes());
  std::array<int, kNumClasses> overall{};
  for (auto& v : votes) v.fill(0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (!vectors[i].class_label) continue;
    const auto c = static_cast<std::size_t>(*vectors[i].class_label);
    ++votes[winners[i]][c];
    ++overall[c];
  }
  for (int j = 0; j < map.nodes(); ++j) {
    std::optional<int> best;
    for (int c = 0; c < kNumClasses; ++c) {
      if (votes[j][c] == 0) continue;
      if (!best || votes[j][c] > votes[j][*best] || (votes[j][c] == votes[j][*best] && overall[c] > overall[*best]))
        best = c;
    }
    map.labels[j] = best ? std::optional(static_cast<FingerClass>(*best)) : std::nullopt;
  }
}

inline SomMap train(std::span<const FeatureVector> vectors, int m, TrainConfig cfg, bool weighted,
                    const EpochObserver& observer) {
  if (vectors.empty()) throw Error(Errc::EmptyTrainingSet, "no training vectors");
  if (m < 2) throw Error(Errc::InvalidArgument, "map side must be >= 2");
  cfg.validate();
  if (weighted) cfg.init = InitMode::Zero;

  SomMap map(m, m, kFeatureDim);
  map.x_avg = training_mean(vectors);

  std::mt19937_64 rng(cfg.seed);
  if (cfg.init == InitMode::SmallRandom) {
    std::uniform_real_distribution<double> u(0.0, 0.01);
    for (auto& w : map.weights) w = u(rng);
  }

  std::vector<std::vector<double>> inputs;
  inputs.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (weighted)
      inputs.push_back(msom_blend(v.directions, v.certainties, map.x_avg));
    else
      inputs.emplace_back(v.directions.begin(), v.directions.end());
  }

  auto winner_of = [&](std::size_t i) {
    return weighted ? msom_find_winner(map, inputs[i], vectors[i].certainties) : find_winner(map, inputs[i]);
  };

  std::vector<std::size_t> order(vectors.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int t = 0; t < cfg.epochs; ++t) {
    std::shuffle(order.begin(), order.end(), rng);
    double max_change = 0.0;
    for (const auto i : order) {
      const int win = winner_of(i);
      const double ch = update_in_place(map, inputs[i], win, t, cfg, weighted ? vectors[i].certainties.data() : nullptr);
      max_change = std::max(max_change, ch);
    }
    if (observer) observer(t, map);
    if (max_change < cfg.tolerance) break;
  }

  std::vector<int> winners(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) winners[i] = winner_of(i);
  label_nodes(map, vectors, winners);
  map.trained = true;
  return map;
}

}  // namespace detail

/// Conventional SOM: K epochs over a seeded shuffle of the inputs, early
/// stop when an epoch changes no weight by 1e-6 or more, then majority-vote
/// node labeling.
inline SomMap train_som(std::span<const FeatureVector> vectors, int m, const TrainConfig& cfg,
                        const EpochObserver& observer = {}) {
  return detail::train(vectors, m, cfg, false, observer);
}

/// Certainty-weighted SOM. Weights start at zero, inputs are blended with
/// the training mean, winners use the weighted norm and each component's
/// update is scaled by its certainty.
inline SomMap train_msom(std::span<const FeatureVector> vectors, int m, const TrainConfig& cfg,
                         const EpochObserver& observer = {}) {
  return detail::train(vectors, m, cfg, true, observer);
}

struct Classification {
  FingerClass label = FingerClass::Arch;
  int node = 0;         // winning node
  int label_node = 0;   // node whose label was used
};

inline Classification classify(const SomMap& map, std::span<const double> x,
                               std::optional<std::span<const double>> certainty = std::nullopt) {
  if (!map.trained) throw Error(Errc::UntrainedMap, "map has not been trained");
  int win = 0;
  if (certainty) {
    const auto blended = msom_blend(x, *certainty, map.x_avg);
    win = msom_find_winner(map, blended, *certainty);
  } else {
    win = find_winner(map, x);
  }
  if (map.labels[win]) return {*map.labels[win], win, win};

  std::optional<int> nearest;
  int best_d2 = 0;
  for (int j = 0; j < map.nodes(); ++j) {
    if (!map.labels[j]) continue;
    const int dr = map.grid_row(j) - map.grid_row(win);
    const int dc = map.grid_col(j) - map.grid_col(win);
    const int d2 = dr * dr + dc * dc;
    if (!nearest || d2 < best_d2) {
      nearest = j;
      best_d2 = d2;
    }
  }
  if (!nearest) throw Error(Errc::UntrainedMap, "map has no labeled node");
  return {*map.labels[*nearest], win, *nearest};
}

inline Classification classify(const SomMap& map, const FeatureVector& fv, bool use_certainty) {
  if (use_certainty) return classify(map, fv.directions, std::span<const double>(fv.certainties));
  return classify(map, fv.directions);
}

// SOM1 text format: "SOM1 m=<m> dim=<dim>", m*m label lines ('-' for
// unlabeled), m*m weight lines, then an "XAVG" line with the training mean.

inline constexpr int kSomDigits = 9;

inline std::string save_som(const SomMap& map) {
  if (map.rows != map.cols) throw Error(Errc::InvalidArgument, "SOM1 stores square maps only");
  std::string out = "SOM1 m=" + std::to_string(map.rows) + " dim=" + std::to_string(map.dim) + '\n';
  for (const auto& l : map.labels) {
    out += l ? std::string(to_string(*l)) : std::string("-");
    out += '\n';
  }
  auto write_row = [&](std::span<const double> row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ' ';
      out += text::format_double(row[i], kSomDigits);
    }
    out += '\n';
  };
  for (int j = 0; j < map.nodes(); ++j) write_row(map.node(j));
  out += "XAVG ";
  write_row(map.x_avg);
  return out;
}

inline SomMap load_som(std::string_view bytes) {
  const auto lines = text::lines(bytes);
  if (lines.empty()) throw Error(Errc::MalformedHeader, "empty SOM file", 1);
  const auto head = text::split_ws(lines[0]);
  if (head.size() != 3 || head[0] != "SOM1" || !head[1].starts_with("m=") || !head[2].starts_with("dim="))
    throw Error(Errc::MalformedHeader, "expected 'SOM1 m=<m> dim=<dim>'", 1);
  auto m = text::parse_int<int>(head[1].substr(2));
  auto dim = text::parse_int<std::size_t>(head[2].substr(4));
  if (!m || !dim || *m < 1 || *dim < 1) throw Error(Errc::MalformedHeader, "bad SOM dimensions", 1);

  SomMap map(*m, *m, *dim);
  const std::size_t nodes = static_cast<std::size_t>(map.nodes());
  if (lines.size() < 1 + 2 * nodes + 1) throw Error(Errc::MalformedLine, "truncated SOM file", lines.size());

  for (std::size_t j = 0; j < nodes; ++j) {
    const auto l = text::trim(lines[1 + j]);
    if (l == "-") continue;
    auto c = parse_finger_class(l);
    if (!c) throw Error(Errc::MalformedLine, "unknown class label", 2 + j);
    map.labels[j] = *c;
  }
  auto read_row = [&](std::string_view line, std::span<double> dst, std::size_t line_no) {
    const auto tok = text::split_ws(line);
    if (tok.size() != dst.size()) throw Error(Errc::MalformedLine, "wrong number of values", line_no);
    for (std::size_t i = 0; i < tok.size(); ++i) {
      auto v = text::parse_double(tok[i]);
      if (!v || !std::isfinite(*v)) throw Error(Errc::MalformedLine, "bad weight value", line_no);
      dst[i] = *v;
    }
  };
  for (std::size_t j = 0; j < nodes; ++j) read_row(lines[1 + nodes + j], map.node(static_cast<int>(j)), 2 + nodes + j);

  const std::size_t avg_line = 1 + 2 * nodes;
  auto avg = text::trim(lines[avg_line]);
  if (!avg.starts_with("XAVG")) throw Error(Errc::MalformedLine, "expected XAVG line", avg_line + 1);
  avg.remove_prefix(4);
  read_row(avg, map.x_avg, avg_line + 1);
  map.trained = true;
  return map;
}

}  // namespace fpv
