#pragma once

// Enrollment store and the two-stage verification pipeline:
// k-means clusters -> nearest-neighbour cluster graph -> index bucket,
// then isomorphism and modified Hausdorff gates.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fpv/cluster.hpp"
#include "fpv/core.hpp"
#include "fpv/error.hpp"
#include "fpv/graph.hpp"
#include "fpv/hausdorff.hpp"
#include "fpv/min1.hpp"
#include "fpv/text.hpp"

namespace fpv {

/// Everything the pipeline derives from one minutiae set.
struct FingerprintAnalysis {
  std::vector<Point> points;  // core-relative minutiae positions
  ClusterResult clusters;
  DistanceMatrix distances;
  MinutiaeGraph graph;
  GraphIndex index;
  std::string index_key;
  double tie_gap = 0.0;       // see nn_tie_gap
  bool tie_hazard() const { return tie_gap < kTieHazardGap; }
};

inline FingerprintAnalysis analyze(const MinutiaeSet& set, int k) {
  if (!set.core) throw Error(Errc::MissingCore, "minutiae set '" + set.source_id + "' has no core point");
  FingerprintAnalysis a;
  a.points = core_relative(set);
  a.clusters = kmeans_fing(set, k);
  a.distances = dist_matrix(a.clusters.centroids);
  a.graph = build_nn_graph(a.distances);
  a.index = compute_index(a.graph);
  a.index_key = index_string(a.index);
  a.tie_gap = nn_tie_gap(a.distances);
  return a;
}

struct TemplateRecord {
  std::string id;
  std::optional<FingerClass> class_label;
  std::string index_key;
  MinutiaeGraph graph;
  std::vector<Point> centroids;   // core-relative
  MinutiaeSet minutiae;           // core-relative, core at the origin
  std::int64_t enrolled_at = 0;   // unix seconds

  int k() const { return static_cast<int>(centroids.size()); }
  friend bool operator==(const TemplateRecord&, const TemplateRecord&) = default;
};

inline TemplateRecord make_record(const MinutiaeSet& set, std::string id, int k, std::optional<FingerClass> cls,
                                  std::int64_t enrolled_at) {
  auto a = analyze(set, k);
  TemplateRecord r;
  r.id = std::move(id);
  r.class_label = cls;
  r.index_key = a.index_key;
  r.graph = a.graph;
  r.centroids = a.clusters.centroids;
  r.minutiae.source_id = r.id;
  r.minutiae.core = CorePoint{0.0, 0.0};
  r.minutiae.minutiae = set.minutiae;
  for (std::size_t i = 0; i < r.minutiae.minutiae.size(); ++i) {
    r.minutiae.minutiae[i].x = a.points[i].x;
    r.minutiae.minutiae[i].y = a.points[i].y;
  }
  r.enrolled_at = enrolled_at;
  return r;
}

// Record file layout (values written with 17 significant digits):
//   FPVREC1
//   id <id>
//   class <name|->
//   enrolled_at <unix seconds>
//   index <index key>
//   centroids <k>      followed by k lines "<x> <y>"
//   edges <m>          followed by m lines "<i> <j>"
//   minutiae           followed by a MIN1 block to end of file

inline std::string serialize_record(const TemplateRecord& r) {
  constexpr int digits = text::kExactDigits;
  std::string out = "FPVREC1\n";
  out += "id " + r.id + '\n';
  out += "class " + (r.class_label ? std::string(to_string(*r.class_label)) : std::string("-")) + '\n';
  out += "enrolled_at " + std::to_string(r.enrolled_at) + '\n';
  out += "index " + r.index_key + '\n';
  out += "centroids " + std::to_string(r.centroids.size()) + '\n';
  for (const auto& c : r.centroids) out += text::format_double(c.x, digits) + ' ' + text::format_double(c.y, digits) + '\n';
  out += "edges " + std::to_string(r.graph.edges().size()) + '\n';
  for (auto [a, b] : r.graph.edges()) out += std::to_string(a) + ' ' + std::to_string(b) + '\n';
  out += "minutiae\n";
  out += serialize_minutiae(r.minutiae, digits);
  return out;
}

inline TemplateRecord parse_record(std::string_view bytes) {
  const auto lines = text::lines(bytes);
  std::size_t ln = 0;
  auto fail = [&](const std::string& why) { return Error(Errc::MalformedLine, "record: " + why, ln + 1); };
  auto next = [&]() -> std::string_view {
    if (ln >= lines.size()) throw fail("unexpected end of record");
    return lines[ln++];
  };
  auto field = [&](std::string_view key) {
    const auto line = next();
    if (!line.starts_with(key) || line.size() <= key.size() || line[key.size()] != ' ') throw fail("expected " + std::string(key));
    return line.substr(key.size() + 1);
  };

  if (text::trim(next()) != "FPVREC1") throw Error(Errc::MalformedHeader, "expected FPVREC1", 1);
  TemplateRecord r;
  r.id = std::string(field("id"));
  const auto cls = field("class");
  if (cls != "-") {
    auto c = parse_finger_class(cls);
    if (!c) throw fail("unknown class");
    r.class_label = *c;
  }
  auto ts = text::parse_int<std::int64_t>(field("enrolled_at"));
  if (!ts) throw fail("bad timestamp");
  r.enrolled_at = *ts;
  r.index_key = std::string(field("index"));

  auto k = text::parse_int<int>(field("centroids"));
  if (!k || *k < 0) throw fail("bad centroid count");
  for (int i = 0; i < *k; ++i) {
    const auto tok = text::split_ws(next());
    std::optional<double> x, y;
    if (tok.size() == 2) {
      x = text::parse_double(tok[0]);
      y = text::parse_double(tok[1]);
    }
    if (!x || !y) throw fail("bad centroid");
    r.centroids.push_back({*x, *y});
  }
  auto m = text::parse_int<int>(field("edges"));
  if (!m || *m < 0) throw fail("bad edge count");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < *m; ++i) {
    const auto tok = text::split_ws(next());
    std::optional<int> a, b;
    if (tok.size() == 2) {
      a = text::parse_int<int>(tok[0]);
      b = text::parse_int<int>(tok[1]);
    }
    if (!a || !b) throw fail("bad edge");
    edges.emplace_back(*a, *b);
  }
  r.graph = MinutiaeGraph(*k, std::move(edges));
  if (text::trim(next()) != "minutiae") throw fail("expected minutiae block");

  std::size_t offset = 0;
  for (std::size_t i = 0; i < ln; ++i) offset = bytes.find('\n', offset) + 1;
  r.minutiae = parse_minutiae(bytes.substr(offset), r.id);

  if (index_string(compute_index(r.graph)) != r.index_key) throw Error(Errc::MalformedLine, "index key does not match graph");
  return r;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file_atomic(const std::filesystem::path& p, std::string_view bytes) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw Error(Errc::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline bool valid_id(std::string_view id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
  });
}

}  // namespace detail

/// Template store. Directory-backed stores keep `manifest.txt` with lines
/// `id<TAB>index_key<TAB>file` plus one record file per template; every
/// enrollment is written through immediately. Single writer only.
class TemplateStore {
 public:
  TemplateStore() = default;

  static TemplateStore open(const std::filesystem::path& dir) {
    TemplateStore s;
    s.dir_ = dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create store directory " + dir.string());
    const auto manifest = dir / kManifest;
    if (!std::filesystem::exists(manifest)) return s;

    const auto bytes = detail::read_file(manifest);
    const auto lines = text::lines(bytes);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (text::trim(lines[i]).empty()) continue;
      const auto cols = text::split(lines[i], '\t');
      if (cols.size() != 3) throw Error(Errc::MalformedLine, "manifest: expected 3 tab-separated columns", i + 1);
      auto rec = parse_record(detail::read_file(dir / std::string(cols[2])));
      if (rec.id != cols[0] || rec.index_key != cols[1])
        throw Error(Errc::MalformedLine, "manifest entry disagrees with record file", i + 1);
      s.insert(std::move(rec));
    }
    return s;
  }

  const TemplateRecord& enroll(const MinutiaeSet& set, const std::string& id, int k,
                               std::optional<FingerClass> cls = std::nullopt,
                               std::optional<std::int64_t> enrolled_at = std::nullopt) {
    if (!detail::valid_id(id)) throw Error(Errc::InvalidArgument, "ids may contain only [A-Za-z0-9._-]: '" + id + "'");
    if (find(id)) throw Error(Errc::DuplicateId, "id '" + id + "' is already enrolled");
    const auto now = enrolled_at.value_or(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
    auto rec = make_record(set, id, k, cls, now);
    if (dir_) {
      detail::write_file_atomic(*dir_ / record_file(id), serialize_record(rec));
      insert(std::move(rec));
      write_manifest();
    } else {
      insert(std::move(rec));
    }
    return records_.back();
  }

  const TemplateRecord* find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  const TemplateRecord& at(std::string_view id) const {
    if (const auto* r = find(id)) return *r;
    throw Error(Errc::UnknownId, "no template enrolled as '" + std::string(id) + "'");
  }

  const std::vector<TemplateRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::optional<std::filesystem::path>& directory() const { return dir_; }

  static std::string record_file(std::string_view id) { return std::string(id) + ".rec"; }
  static constexpr const char* kManifest = "manifest.txt";

 private:
  void insert(TemplateRecord rec) {
    if (!by_id_.emplace(rec.id, records_.size()).second) throw Error(Errc::DuplicateId, "duplicate id '" + rec.id + "'");
    records_.push_back(std::move(rec));
  }

  void write_manifest() const {
    std::string out;
    for (const auto& r : records_) out += r.id + '\t' + r.index_key + '\t' + record_file(r.id) + '\n';
    detail::write_file_atomic(*dir_ / kManifest, out);
  }

  std::optional<std::filesystem::path> dir_;
  std::vector<TemplateRecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

enum class Gate { IndexBucket, Isomorphism, Distance };

inline std::string_view to_string(Gate g) {
  switch (g) {
    case Gate::IndexBucket: return "index-bucket";
    case Gate::Isomorphism: return "isomorphism";
    case Gate::Distance: return "distance";
  }
  return "?";
}

struct GateOutcome {
  Gate gate = Gate::IndexBucket;
  bool passed = false;
};

struct VerifyResult {
  std::string id;
  Decision decision = Decision::Reject;
  MatchScore score;
  std::vector<GateOutcome> trace;     // all three gates, in order
  std::optional<Gate> first_failed;
  std::string probe_index_key;
  double alignment_rotation = 0.0;    // rotation applied to the probe, radians
  bool structural_match() const { return trace.size() >= 2 && trace[0].passed && trace[1].passed; }
};

// Highly symmetric graphs have many automorphisms; alignment tries at most
// this many of them.
inline constexpr std::size_t kMaxAlignmentCandidates = 720;
inline constexpr int kRefineIterations = 30;

namespace detail {

// Iterative closest point, rotation only: pair every rotated probe point with
// its nearest template point and re-solve the rotation until it settles.
// Centroid correspondences give the starting angle; a minutia that changed
// cluster can pull that angle off by several degrees.
inline double refine_rotation(std::span<const Point> probe, std::span<const Point> templ, double rot) {
  std::vector<Point> nearest(probe.size());
  for (int it = 0; it < kRefineIterations; ++it) {
    const auto aligned = rotate_about_origin(probe, rot);
    for (std::size_t i = 0; i < aligned.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : templ) {
        const double d = squared_distance(aligned[i], q);
        if (d < best) {
          best = d;
          nearest[i] = q;
        }
      }
    }
    const double next = best_rotation_about_origin(probe, nearest);
    if (std::abs(std::remainder(next - rot, kTwoPi)) < 1e-12) return next;
    rot = next;
  }
  return rot;
}

}  // namespace detail

/// Scores an analyzed probe against one template. When the cluster graphs
/// are isomorphic, every isomorphism gives centroid correspondences; the
/// probe is rotated about its core by candidate rotations from those
/// correspondences, each refined on the minutiae, and the smallest MHD is kept.
inline VerifyResult verify_analysis(const TemplateRecord& templ, const FingerprintAnalysis& probe, double tau) {
  VerifyResult res;
  res.id = templ.id;
  res.probe_index_key = probe.index_key;

  const bool bucket = probe.index_key == templ.index_key;
  const auto tpts = core_relative(templ.minutiae);

  bool iso = false;
  std::size_t tried = 0;
  std::optional<MatchScore> best;
  if (bucket) {
    for_each_isomorphism(templ.graph, probe.graph, [&](const std::vector<int>& map) {
      iso = true;
      std::vector<Point> from, to;
      for (std::size_t v = 0; v < map.size(); ++v) {
        from.push_back(probe.clusters.centroids[map[v]]);
        to.push_back(templ.centroids[v]);
      }
      // least squares over all centroids, then each centroid pair alone:
      // a cluster that kept its members pins the angle by itself
      std::vector<double> starts{best_rotation_about_origin(from, to)};
      for (std::size_t v = 0; v < from.size(); ++v)
        starts.push_back(best_rotation_about_origin(std::span(from).subspan(v, 1), std::span(to).subspan(v, 1)));
      for (double start : starts) {
        for (double rot : {start, detail::refine_rotation(probe.points, tpts, start)}) {
          auto s = score_points(rotate_about_origin(probe.points, rot), tpts, tau);
          if (!best || s.mhd < best->mhd) {
            best = s;
            res.alignment_rotation = rot;
          }
        }
      }
      return ++tried < kMaxAlignmentCandidates;
    });
  }
  res.score = best ? *best : score_points(probe.points, tpts, tau);

  res.trace = {{Gate::IndexBucket, bucket}, {Gate::Isomorphism, iso}, {Gate::Distance, res.score.decision == Decision::Accept}};
  for (const auto& g : res.trace) {
    if (!g.passed) {
      res.first_failed = g.gate;
      break;
    }
  }
  res.decision = res.first_failed ? Decision::Reject : Decision::Accept;
  return res;
}

inline VerifyResult verify(const TemplateStore& store, const MinutiaeSet& probe, std::string_view claimed_id,
                           double tau = kDefaultMatchThreshold) {
  const auto& templ = store.at(claimed_id);
  return verify_analysis(templ, analyze(probe, templ.k()), tau);
}

/// Scores the probe against every template in its index bucket, best
/// (smallest MHD) first.
inline std::vector<VerifyResult> identify(const TemplateStore& store, const MinutiaeSet& probe,
                                          double tau = kDefaultMatchThreshold) {
  std::map<int, std::optional<FingerprintAnalysis>> by_k;
  std::vector<VerifyResult> out;
  for (const auto& rec : store.records()) {
    auto& a = by_k[rec.k()];
    if (!a) {
      if (probe.minutiae.size() < static_cast<std::size_t>(rec.k())) continue;
      a = analyze(probe, rec.k());
    }
    if (a->index_key != rec.index_key) continue;
    out.push_back(verify_analysis(rec, *a, tau));
  }
  std::stable_sort(out.begin(), out.end(), [](const VerifyResult& x, const VerifyResult& y) {
    if (x.score.mhd != y.score.mhd) return x.score.mhd < y.score.mhd;
    return x.id < y.id;
  });
  return out;
}

}  // namespace fpv
