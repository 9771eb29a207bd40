#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fpv/error.hpp"
#include "fpv/min1.hpp"
#include "fpv/store.hpp"
#include "fpv/synth.hpp"
#include "fpv/text.hpp"

namespace fpv {

/// FAR = F / S * 100.
inline double compute_far(long wrongly_accepted, long trials) {
  if (trials < 1) throw Error(Errc::ZeroTrials, "FAR needs at least one trial");
  if (wrongly_accepted < 0 || wrongly_accepted > trials)
    throw Error(Errc::InvalidArgument, "wrong accepts must lie in [0, trials]");
  return 100.0 * static_cast<double>(wrongly_accepted) / static_cast<double>(trials);
}

struct EvalReport {
  double far_percent = 0.0;
  double frr_percent = 0.0;
  double accuracy_percent = 0.0;
  long wrongly_accepted = 0;  // F: imposter pairs accepted
  long wrongly_rejected = 0;  // R: genuine pairs rejected
  long trials = 0;            // S: all pairs
};

struct PairSpec {
  bool genuine = true;
  MinutiaeSet templ;
  MinutiaeSet probe;
};

struct Scenario {
  std::uint64_t seed = 1;
  int genuine_pairs = 0;
  int imposter_pairs = 0;
  SynthConfig synth;
  int k = kDefaultClusters;
  double tau = kDefaultMatchThreshold;
  std::vector<PairSpec> pairs;  // explicit pairs, evaluated after the generated ones

  std::size_t total_pairs() const {
    return static_cast<std::size_t>(genuine_pairs) + static_cast<std::size_t>(imposter_pairs) + pairs.size();
  }
};

/// Plain-text scenario description:
///
///   SCENARIO1
///   seed 7                    genuine 200           imposter 200
///   n_minutiae 30             disk_radius 120       jitter_sigma 1
///   max_rotation 3.14159      max_translation 40    k 5      tau 12
///   pair genuine|imposter <template.min> <probe.min>
///
/// one key per line; pair paths are relative to `base_dir`.
inline Scenario parse_scenario(std::string_view bytes, const std::filesystem::path& base_dir = {}) {
  const auto lines = text::lines(bytes);
  if (lines.empty() || text::trim(lines[0]) != "SCENARIO1") throw Error(Errc::MalformedHeader, "expected SCENARIO1", 1);
  Scenario sc;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = text::split_ws(line);
    auto bad = [&](const std::string& why) { return Error(Errc::MalformedLine, "scenario: " + why, i + 1); };
    const auto key = tok[0];

    if (key == "pair") {
      if (tok.size() != 4 || (tok[1] != "genuine" && tok[1] != "imposter")) throw bad("expected 'pair genuine|imposter A B'");
      const auto a = base_dir / std::string(tok[2]);
      const auto b = base_dir / std::string(tok[3]);
      sc.pairs.push_back({tok[1] == "genuine", parse_minutiae(detail::read_file(a), a.string()),
                          parse_minutiae(detail::read_file(b), b.string())});
      continue;
    }
    if (tok.size() != 2) throw bad("expected '<key> <value>'");
    auto num = [&] {
      auto v = text::parse_double(tok[1]);
      if (!v) throw bad("bad number for " + std::string(key));
      return *v;
    };
    auto integer = [&] {
      auto v = text::parse_int<long long>(tok[1]);
      if (!v || *v < 0) throw bad("bad integer for " + std::string(key));
      return *v;
    };
    if (key == "seed") sc.seed = static_cast<std::uint64_t>(integer());
    else if (key == "genuine") sc.genuine_pairs = static_cast<int>(integer());
    else if (key == "imposter") sc.imposter_pairs = static_cast<int>(integer());
    else if (key == "n_minutiae") sc.synth.n_minutiae = static_cast<int>(integer());
    else if (key == "disk_radius") sc.synth.disk_radius = num();
    else if (key == "jitter_sigma") sc.synth.jitter_sigma = num();
    else if (key == "max_rotation") sc.synth.max_rotation = num();
    else if (key == "max_translation") sc.synth.max_translation = num();
    else if (key == "k") sc.k = static_cast<int>(integer());
    else if (key == "tau") sc.tau = num();
    else throw bad("unknown key '" + std::string(key) + "'");
  }
  sc.synth.validate();
  return sc;
}

struct PairOutcome {
  bool genuine = true;
  bool structural = false;  // index bucket and isomorphism gates passed
  double mhd = 0.0;
  bool accepted(double tau) const { return structural && mhd <= tau; }
};

/// Materializes the generated pairs. Every pair draws fresh seeds from one
/// stream seeded by the scenario seed, so pair i is reproducible.
inline std::vector<PairSpec> expand_pairs(const Scenario& sc) {
  std::mt19937_64 rng(sc.seed);
  std::vector<PairSpec> out;
  out.reserve(sc.total_pairs());
  auto finger = [&](std::uint64_t s) {
    auto cfg = sc.synth;
    cfg.seed = s;
    return gen_synthetic_minutiae(cfg);
  };
  auto impression = [&](const MinutiaeSet& f, std::uint64_t s) {
    auto cfg = sc.synth;
    cfg.seed = s;
    return perturb_impression(f, cfg);
  };
  for (int i = 0; i < sc.genuine_pairs; ++i) {
    const auto f = finger(rng());
    out.push_back({true, f, impression(f, rng())});
  }
  for (int i = 0; i < sc.imposter_pairs; ++i) {
    const auto a = finger(rng());
    const auto b = finger(rng());
    out.push_back({false, a, impression(b, rng())});
  }
  out.insert(out.end(), sc.pairs.begin(), sc.pairs.end());
  return out;
}

inline PairOutcome evaluate_pair(const PairSpec& p, int k, double tau) {
  const auto rec = make_record(p.templ, "template", k, std::nullopt, 0);
  const auto res = verify_analysis(rec, analyze(p.probe, k), tau);
  return {p.genuine, res.structural_match(), res.score.mhd};
}

/// Scores every pair, in parallel across pairs; outcome i always belongs to
/// pair i regardless of scheduling.
inline std::vector<PairOutcome> evaluate_pairs(const std::vector<PairSpec>& pairs, int k, double tau,
                                               unsigned threads = 0) {
  std::vector<PairOutcome> out(pairs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, pairs.size())));
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < pairs.size(); i += threads) out[i] = evaluate_pair(pairs[i], k, tau);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline EvalReport report_at(const std::vector<PairOutcome>& outcomes, double tau) {
  if (outcomes.empty()) throw Error(Errc::EmptyScenario, "scenario has no pairs");
  EvalReport r;
  r.trials = static_cast<long>(outcomes.size());
  for (const auto& o : outcomes) {
    const bool acc = o.accepted(tau);
    if (!o.genuine && acc) ++r.wrongly_accepted;
    if (o.genuine && !acc) ++r.wrongly_rejected;
  }
  r.far_percent = compute_far(r.wrongly_accepted, r.trials);
  r.frr_percent = 100.0 * static_cast<double>(r.wrongly_rejected) / static_cast<double>(r.trials);
  r.accuracy_percent =
      100.0 * static_cast<double>(r.trials - r.wrongly_accepted - r.wrongly_rejected) / static_cast<double>(r.trials);
  return r;
}

struct EvalRun {
  std::vector<PairOutcome> outcomes;
  EvalReport report;  // at the scenario's tau
};

inline EvalRun run_eval(const Scenario& sc, unsigned threads = 0) {
  if (sc.total_pairs() == 0) throw Error(Errc::EmptyScenario, "scenario has no pairs");
  EvalRun run;
  run.outcomes = evaluate_pairs(expand_pairs(sc), sc.k, sc.tau, threads);
  run.report = report_at(run.outcomes, sc.tau);
  return run;
}

struct SweepRow {
  double tau = 0.0;
  EvalReport report;
};

inline std::vector<SweepRow> sweep(const std::vector<PairOutcome>& outcomes, const std::vector<double>& taus) {
  std::vector<SweepRow> rows;
  rows.reserve(taus.size());
  for (double t : taus) rows.push_back({t, report_at(outcomes, t)});
  return rows;
}

/// Inclusive range "lo:hi:step".
inline std::vector<double> parse_tau_range(std::string_view spec) {
  const auto parts = text::split(spec, ':');
  if (parts.size() != 3) throw Error(Errc::InvalidArgument, "tau range must be lo:hi:step");
  auto lo = text::parse_double(parts[0]);
  auto hi = text::parse_double(parts[1]);
  auto step = text::parse_double(parts[2]);
  if (!lo || !hi || !step || !(*step > 0.0) || *hi < *lo) throw Error(Errc::InvalidArgument, "bad tau range '" + std::string(spec) + "'");
  std::vector<double> taus;
  const long n = static_cast<long>(std::floor((*hi - *lo) / *step + 1e-9));
  for (long i = 0; i <= n; ++i) taus.push_back(*lo + static_cast<double>(i) * *step);
  return taus;
}

inline std::string format_sweep(const EvalReport& at_tau, double tau, const std::vector<SweepRow>& rows) {
  auto f = [](double v) { return text::format_double(v, 6); };
  std::string out;
  out += "# tau=" + f(tau) + " FAR=" + f(at_tau.far_percent) + "% FRR=" + f(at_tau.frr_percent) +
         "% accuracy=" + f(at_tau.accuracy_percent) + "% F=" + std::to_string(at_tau.wrongly_accepted) +
         " R=" + std::to_string(at_tau.wrongly_rejected) + " S=" + std::to_string(at_tau.trials) + '\n';
  out += "tau\tfar_percent\tfrr_percent\taccuracy_percent\tF\tR\tS\n";
  for (const auto& r : rows) {
    out += f(r.tau) + '\t' + f(r.report.far_percent) + '\t' + f(r.report.frr_percent) + '\t' +
           f(r.report.accuracy_percent) + '\t' + std::to_string(r.report.wrongly_accepted) + '\t' +
           std::to_string(r.report.wrongly_rejected) + '\t' + std::to_string(r.report.trials) + '\n';
  }
  return out;
}

}  // namespace fpv
