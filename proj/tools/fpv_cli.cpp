// fpv: enrollment, verification, coarse classification and evaluation.
//
// Exit codes: 0 success/Accept, 1 Reject, 2 usage error, 3 data error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fpv/fpv.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

std::string fmt(double v) { return fpv::text::format_double(v, 6); }

fpv::MinutiaeSet load_minutiae(const std::string& path) {
  return fpv::parse_minutiae(fpv::detail::read_file(path), path);
}

std::optional<fpv::CorePoint> parse_core(const std::string& s) {
  const auto parts = fpv::text::split(s, ',');
  if (parts.size() != 2) return std::nullopt;
  auto x = fpv::text::parse_double(parts[0]);
  auto y = fpv::text::parse_double(parts[1]);
  if (!x || !y) return std::nullopt;
  return fpv::CorePoint{*x, *y};
}

fpv::FingerClass require_class(const std::string& s) {
  auto c = fpv::parse_finger_class(s);
  if (!c) throw CLI::ValidationError("--class", "unknown class '" + s + "'");
  return *c;
}

void print_result(const fpv::VerifyResult& r) {
  std::cout << "id " << r.id << '\n'
            << "decision " << (r.decision == fpv::Decision::Accept ? "accept" : "reject") << '\n'
            << "mhd " << fmt(r.score.mhd) << '\n'
            << "hausdorff " << fmt(r.score.hausdorff) << '\n'
            << "probe_index " << r.probe_index_key << '\n';
  for (const auto& g : r.trace) std::cout << "gate " << fpv::to_string(g.gate) << ' ' << (g.passed ? "pass" : "fail") << '\n';
}

fpv::FeatureVector image_features(const std::string& path) {
  const auto img = fpv::read_pgm(fpv::detail::read_file(path));
  const auto field = fpv::segment_by_certainty(fpv::estimate_block_directions(img));
  const auto core = fpv::detect_core(field);
  return fpv::extract_feature_vector(field, core.core);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level fingerprint indexing, verification and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fpv 0.1.0");

  // enroll
  std::string store_dir, id, input, klass, core_arg;
  int k = fpv::kDefaultClusters;
  double tau = fpv::kDefaultMatchThreshold;
  auto* enroll = app.add_subcommand("enroll", "enroll a MIN1 minutiae file");
  enroll->add_option("--store", store_dir, "store directory")->required();
  enroll->add_option("--id", id, "template id")->required();
  enroll->add_option("--k", k, "cluster count")->check(CLI::PositiveNumber);
  enroll->add_option("--class", klass, "finger class label");
  enroll->add_option("--core", core_arg, "core point X,Y when the file has none");
  enroll->add_option("file", input, "MIN1 file")->required();

  auto* verify = app.add_subcommand("verify", "verify a probe against a claimed id");
  verify->add_option("--store", store_dir)->required();
  verify->add_option("--id", id)->required();
  verify->add_option("--tau", tau, "MHD threshold in pixels")->check(CLI::PositiveNumber);
  verify->add_option("--core", core_arg, "core point X,Y when the file has none");
  verify->add_option("file", input)->required();

  auto* identify = app.add_subcommand("identify", "search the probe's index bucket");
  identify->add_option("--store", store_dir)->required();
  identify->add_option("--tau", tau)->check(CLI::PositiveNumber);
  identify->add_option("--core", core_arg, "core point X,Y when the file has none");
  identify->add_option("file", input)->required();

  std::string map_path;
  bool msom = false;
  auto* classify = app.add_subcommand("classify", "coarse class of a PGM image");
  classify->add_option("--map", map_path, "trained SOM1 map")->required();
  classify->add_flag("--msom", msom, "use certainty-weighted matching");
  classify->add_option("image", input)->required();

  std::string out_path;
  int m = 10;
  fpv::TrainConfig train_cfg;
  auto* train = app.add_subcommand("train", "train a SOM from a list of labeled PGM images");
  train->add_option("--out", out_path)->required();
  train->add_option("--m", m, "map side")->check(CLI::Range(2, 64));
  train->add_option("--epochs", train_cfg.epochs)->check(CLI::PositiveNumber);
  train->add_option("--seed", train_cfg.seed);
  train->add_option("--rate", train_cfg.initial_rate, "initial learning rate");
  train->add_flag("--msom", msom, "train the certainty-weighted variant");
  train->add_option("list", input, "lines of '<image.pgm> <Class>'")->required();

  std::string taus = "0:30:0.5";
  unsigned threads = 0;
  auto* eval = app.add_subcommand("eval", "FAR/FRR over a scenario and a tau sweep");
  eval->add_option("--scenario", input)->required();
  eval->add_option("--taus", taus, "lo:hi:step");
  eval->add_option("--out", out_path);
  eval->add_option("--threads", threads);

  std::string what;
  std::uint64_t seed = 0;
  fpv::SynthConfig synth_cfg;
  auto* synth = app.add_subcommand("synth", "synthetic minutiae or orientation images");
  synth->add_option("kind", what)->required()->check(CLI::IsMember({"minutiae", "field"}));
  synth->add_option("--seed", seed);
  synth->add_option("--class", klass);
  synth->add_option("--n", synth_cfg.n_minutiae)->check(CLI::PositiveNumber);
  synth->add_option("--noise", synth_cfg.orientation_noise, "orientation noise, radians");
  synth->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    auto with_core = [&](fpv::MinutiaeSet s) {
      if (!core_arg.empty()) {
        auto c = parse_core(core_arg);
        if (!c) throw CLI::ValidationError("--core", "expected X,Y");
        s.core = *c;
      }
      return s;
    };

    if (*enroll) {
      auto set = with_core(load_minutiae(input));
      auto store = fpv::TemplateStore::open(store_dir);
      std::optional<fpv::FingerClass> cls;
      if (!klass.empty()) cls = require_class(klass);
      const auto& rec = store.enroll(set, id, k, cls);
      std::cout << "enrolled " << rec.id << " index " << rec.index_key << '\n';
      return kExitAccept;
    }
    if (*verify) {
      const auto store = fpv::TemplateStore::open(store_dir);
      const auto res = fpv::verify(store, with_core(load_minutiae(input)), id, tau);
      print_result(res);
      return res.decision == fpv::Decision::Accept ? kExitAccept : kExitReject;
    }
    if (*identify) {
      const auto store = fpv::TemplateStore::open(store_dir);
      const auto hits = fpv::identify(store, with_core(load_minutiae(input)), tau);
      bool any = false;
      for (const auto& h : hits) {
        std::cout << h.id << '\t' << fmt(h.score.mhd) << '\t'
                  << (h.decision == fpv::Decision::Accept ? "accept" : "reject") << '\n';
        any = any || h.decision == fpv::Decision::Accept;
      }
      if (hits.empty()) std::cout << "no candidates\n";
      return any ? kExitAccept : kExitReject;
    }
    if (*classify) {
      const auto map = fpv::load_som(fpv::detail::read_file(map_path));
      const auto res = fpv::classify(map, image_features(input), msom);
      std::cout << fpv::to_string(res.label) << " node " << res.node << '\n';
      return kExitAccept;
    }
    if (*train) {
      const auto list = fpv::detail::read_file(input);
      const auto base = fs::path(input).parent_path();
      std::vector<fpv::FeatureVector> vectors;
      const auto lines = fpv::text::lines(list);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = fpv::text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto tok = fpv::text::split_ws(line);
        if (tok.size() != 2) throw fpv::Error(fpv::Errc::MalformedLine, "expected '<image> <Class>'", i + 1);
        auto cls = fpv::parse_finger_class(tok[1]);
        if (!cls) throw fpv::Error(fpv::Errc::MalformedLine, "unknown class", i + 1);
        auto fv = image_features((base / std::string(tok[0])).string());
        fv.class_label = *cls;
        vectors.push_back(fv);
      }
      const auto map = msom ? fpv::train_msom(vectors, m, train_cfg) : fpv::train_som(vectors, m, train_cfg);
      fpv::detail::write_file_atomic(out_path, fpv::save_som(map));
      int labeled = 0;
      for (const auto& l : map.labels) labeled += l.has_value();
      std::cout << "trained " << m << 'x' << m << " map on " << vectors.size() << " images, " << labeled
                << " labeled nodes\n";
      return kExitAccept;
    }
    if (*eval) {
      const auto sc = fpv::parse_scenario(fpv::detail::read_file(input), fs::path(input).parent_path());
      const auto tau_list = fpv::parse_tau_range(taus);
      const auto run = fpv::run_eval(sc, threads);
      const auto report = fpv::format_sweep(run.report, sc.tau, fpv::sweep(run.outcomes, tau_list));
      if (out_path.empty()) std::cout << report;
      else fpv::detail::write_file_atomic(out_path, report);
      std::cout << "FAR " << fmt(run.report.far_percent) << "% FRR " << fmt(run.report.frr_percent) << "% accuracy "
                << fmt(run.report.accuracy_percent) << "%\n";
      return kExitAccept;
    }
    if (*synth) {
      synth_cfg.seed = seed;
      if (!klass.empty()) synth_cfg.finger_class = require_class(klass);
      if (what == "minutiae") {
        fpv::detail::write_file_atomic(out_path, fpv::serialize_minutiae(fpv::gen_synthetic_minutiae(synth_cfg)));
      } else {
        const auto sf = fpv::gen_synthetic_orientation(synth_cfg);
        fpv::detail::write_file_atomic(out_path, fpv::write_pgm(fpv::render_field(sf.field)));
        std::cout << "core " << fmt(sf.core.x) << ' ' << fmt(sf.core.y) << '\n';
      }
      return kExitAccept;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "fpv: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fpv::Error& e) {
    std::cerr << "fpv: " << fpv::to_string(e.code()) << ": " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "fpv: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
