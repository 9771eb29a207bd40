#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fpv/core.hpp"
#include "fpv/error.hpp"
#include "fpv/text.hpp"

namespace fpv {

struct DistanceMatrix {
  int k = 0;
  std::vector<double> d;  // row-major k*k

  double operator()(int i, int j) const { return d[static_cast<std::size_t>(i) * k + j]; }
  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;
};

inline DistanceMatrix dist_matrix(std::span<const Point> centroids) {
  if (centroids.empty()) throw Error(Errc::InvalidArgument, "need at least one centroid");
  DistanceMatrix m;
  m.k = static_cast<int>(centroids.size());
  m.d.assign(centroids.size() * centroids.size(), 0.0);
  for (int i = 0; i < m.k; ++i)
    for (int j = 0; j < m.k; ++j)
      if (i != j) m.d[static_cast<std::size_t>(i) * m.k + j] = distance(centroids[i], centroids[j]);
  return m;
}

/// Undirected simple graph over centroid ids. Carries topology only.
class MinutiaeGraph {
 public:
  MinutiaeGraph() = default;

  /// Edges are normalized to (min, max) and sorted; self-loops, duplicates
  /// and out-of-range ids are rejected.
  MinutiaeGraph(int vertex_count, std::vector<std::pair<int, int>> edges) : n_(vertex_count) {
    if (vertex_count < 0) throw Error(Errc::InvalidArgument, "negative vertex count");
    for (auto& [a, b] : edges) {
      if (a == b) throw Error(Errc::InvalidArgument, "self-loop");
      if (a < 0 || b < 0 || a >= n_ || b >= n_) throw Error(Errc::InvalidArgument, "edge endpoint out of range");
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw Error(Errc::InvalidArgument, "duplicate edge");
    edges_ = std::move(edges);
  }

  int vertex_count() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  std::vector<int> degrees() const {
    std::vector<int> deg(n_, 0);
    for (auto [a, b] : edges_) {
      ++deg[a];
      ++deg[b];
    }
    return deg;
  }

  std::vector<std::vector<char>> adjacency() const {
    std::vector<std::vector<char>> adj(n_, std::vector<char>(n_, 0));
    for (auto [a, b] : edges_) adj[a][b] = adj[b][a] = 1;
    return adj;
  }

  friend bool operator==(const MinutiaeGraph&, const MinutiaeGraph&) = default;

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
};

/// Smallest gap, over all vertices, between the nearest and second-nearest
/// neighbour distance. Gaps near zero mean the NN graph can flip under
/// rounding-level perturbations. Infinity when k < 3.
inline double nn_tie_gap(const DistanceMatrix& d) {
  double gap = std::numeric_limits<double>::infinity();
  if (d.k < 3) return gap;
  for (int i = 0; i < d.k; ++i) {
    double first = std::numeric_limits<double>::infinity();
    double second = first;
    for (int j = 0; j < d.k; ++j) {
      if (j == i) continue;
      const double v = d(i, j);
      if (v < first) {
        second = first;
        first = v;
      } else if (v < second) {
        second = v;
      }
    }
    gap = std::min(gap, second - first);
  }
  return gap;
}

inline constexpr double kTieHazardGap = 1e-9;

/// Links every vertex to its nearest neighbour (ties go to the smallest id);
/// mutual nearest neighbours share one edge.
inline MinutiaeGraph build_nn_graph(const DistanceMatrix& d) {
  if (d.k < 2) throw Error(Errc::SingletonGraph, "nearest-neighbour graph needs at least two vertices");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < d.k; ++i) {
    int nn = -1;
    for (int j = 0; j < d.k; ++j) {
      if (j == i) continue;
      if (nn < 0 || d(i, j) < d(i, nn)) nn = j;
    }
    edges.emplace_back(std::min(i, nn), std::max(i, nn));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return MinutiaeGraph(d.k, std::move(edges));
}

/// Four-parameter graph index: vertex count, descending degree sequence,
/// highest degree and the number of vertices per degree.
struct GraphIndex {
  int vertex_count = 0;
  std::vector<int> degree_sequence;
  int max_degree = 0;
  std::map<int, int> degree_multiplicity;
  friend bool operator==(const GraphIndex&, const GraphIndex&) = default;
};

inline GraphIndex compute_index(const MinutiaeGraph& g) {
  GraphIndex idx;
  idx.vertex_count = g.vertex_count();
  idx.degree_sequence = g.degrees();
  std::sort(idx.degree_sequence.begin(), idx.degree_sequence.end(), std::greater<>());
  idx.max_degree = idx.degree_sequence.empty() ? 0 : idx.degree_sequence.front();
  for (int d : idx.degree_sequence) ++idx.degree_multiplicity[d];
  return idx;
}

/// Canonical form `V<count>|D<d1,d2,...>|H<max>|M<deg:cnt,...>`.
inline std::string index_string(const GraphIndex& idx) {
  std::string s = "V" + std::to_string(idx.vertex_count) + "|D";
  for (std::size_t i = 0; i < idx.degree_sequence.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(idx.degree_sequence[i]);
  }
  s += "|H" + std::to_string(idx.max_degree) + "|M";
  bool first = true;
  for (auto [deg, cnt] : idx.degree_multiplicity) {
    if (!first) s += ',';
    first = false;
    s += std::to_string(deg) + ':' + std::to_string(cnt);
  }
  return s;
}

inline GraphIndex parse_index(std::string_view s) {
  auto fail = [&] { return Error(Errc::MalformedLine, "bad index string '" + std::string(s) + "'"); };
  const auto parts = text::split(s, '|');
  if (parts.size() != 4 || !parts[0].starts_with('V') || !parts[1].starts_with('D') || !parts[2].starts_with('H') ||
      !parts[3].starts_with('M'))
    throw fail();

  GraphIndex idx;
  auto vc = text::parse_int<int>(parts[0].substr(1));
  auto hd = text::parse_int<int>(parts[2].substr(1));
  if (!vc || !hd) throw fail();
  idx.vertex_count = *vc;
  idx.max_degree = *hd;
  if (parts[1].size() > 1) {
    for (auto t : text::split(parts[1].substr(1), ',')) {
      auto v = text::parse_int<int>(t);
      if (!v) throw fail();
      idx.degree_sequence.push_back(*v);
    }
  }
  if (parts[3].size() > 1) {
    for (auto t : text::split(parts[3].substr(1), ',')) {
      const auto kv = text::split(t, ':');
      if (kv.size() != 2) throw fail();
      auto k = text::parse_int<int>(kv[0]);
      auto v = text::parse_int<int>(kv[1]);
      if (!k || !v || !idx.degree_multiplicity.emplace(*k, *v).second) throw fail();
    }
  }
  if (index_string(idx) != s) throw fail();

  // The four fields must describe one degree sequence.
  if (static_cast<int>(idx.degree_sequence.size()) != idx.vertex_count ||
      !std::is_sorted(idx.degree_sequence.begin(), idx.degree_sequence.end(), std::greater<>()))
    throw fail();
  std::map<int, int> counts;
  for (int d : idx.degree_sequence) ++counts[d];
  const int top = idx.degree_sequence.empty() ? 0 : idx.degree_sequence.front();
  if (counts != idx.degree_multiplicity || top != idx.max_degree) throw fail();
  return idx;
}

/// Enumerates adjacency-preserving bijections g1 -> g2 by backtracking over
/// degree-compatible candidates. `visit(mapping)` receives mapping[v1] = v2
/// and returns false to stop. Returns the number of mappings visited.
inline std::size_t for_each_isomorphism(const MinutiaeGraph& g1, const MinutiaeGraph& g2,
                                        const std::function<bool(const std::vector<int>&)>& visit) {
  const int n = g1.vertex_count();
  if (n != g2.vertex_count() || g1.edges().size() != g2.edges().size()) return 0;
  const auto deg1 = g1.degrees();
  const auto deg2 = g2.degrees();
  {
    auto s1 = deg1, s2 = deg2;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    if (s1 != s2) return 0;
  }
  const auto adj1 = g1.adjacency();
  const auto adj2 = g2.adjacency();

  // Visit order: repeatedly take the vertex with most already-ordered
  // neighbours (then highest degree) so constraints bite early.
  std::vector<int> order;
  std::vector<char> placed(n, 0);
  for (int step = 0; step < n; ++step) {
    int best = -1, best_links = -1;
    for (int v = 0; v < n; ++v) {
      if (placed[v]) continue;
      int links = 0;
      for (int u : order) links += adj1[v][u];
      if (links > best_links || (links == best_links && deg1[v] > deg1[best])) {
        best = v;
        best_links = links;
      }
    }
    placed[best] = 1;
    order.push_back(best);
  }

  std::vector<int> mapping(n, -1);
  std::vector<char> used(n, 0);
  std::size_t found = 0;
  bool stop = false;

  std::function<void(int)> extend = [&](int pos) {
    if (stop) return;
    if (pos == n) {
      ++found;
      if (!visit(mapping)) stop = true;
      return;
    }
    const int v = order[pos];
    for (int u = 0; u < n && !stop; ++u) {
      if (used[u] || deg2[u] != deg1[v]) continue;
      bool ok = true;
      for (int p = 0; p < pos && ok; ++p) {
        const int w = order[p];
        ok = adj1[v][w] == adj2[u][mapping[w]];
      }
      if (!ok) continue;
      mapping[v] = u;
      used[u] = 1;
      extend(pos + 1);
      used[u] = 0;
      mapping[v] = -1;
    }
  };
  extend(0);
  return found;
}

inline bool is_isomorphic(const MinutiaeGraph& g1, const MinutiaeGraph& g2) {
  return for_each_isomorphism(g1, g2, [](const std::vector<int>&) { return false; }) > 0;
}

/// 0 when the graphs are isomorphic (equivalent fingerprints), else 1.
inline int fingerprint_distance(const MinutiaeGraph& g1, const MinutiaeGraph& g2) {
  return is_isomorphic(g1, g2) ? 0 : 1;
}

}  // namespace fpv
