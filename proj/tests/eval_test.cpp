#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "fpv/eval.hpp"

namespace fpv {
namespace {

namespace fs = std::filesystem;

template <class F>
void expect_code(Errc code, F&& f) {
  try {
    f();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(Far, Fixtures) {
  EXPECT_EQ(compute_far(0, 100), 0.0);
  EXPECT_EQ(compute_far(5, 100), 5.0);
  EXPECT_EQ(compute_far(37, 37), 100.0);
  EXPECT_EQ(compute_far(1, 3), 100.0 / 3.0);
  expect_code(Errc::ZeroTrials, [] { compute_far(0, 0); });
  expect_code(Errc::InvalidArgument, [] { compute_far(4, 3); });
  expect_code(Errc::InvalidArgument, [] { compute_far(-1, 3); });
}

TEST(Report, CountsByHand) {
  // genuine: accepted, rejected by mhd, rejected by structure; imposter: accepted, rejected
  const std::vector<PairOutcome> o{{true, true, 3.0}, {true, true, 20.0}, {true, false, 0.0},
                                   {false, true, 5.0}, {false, true, 50.0}};
  const auto r = report_at(o, 12.0);
  EXPECT_EQ(r.trials, 5);
  EXPECT_EQ(r.wrongly_accepted, 1);
  EXPECT_EQ(r.wrongly_rejected, 2);
  EXPECT_EQ(r.far_percent, 20.0);
  EXPECT_EQ(r.frr_percent, 40.0);
  EXPECT_EQ(r.accuracy_percent, 40.0);
  expect_code(Errc::EmptyScenario, [] { report_at({}, 1.0); });
}

TEST(Scenario, Parse) {
  const auto sc = parse_scenario(
      "SCENARIO1\n# comment\nseed 9\ngenuine 4\nimposter 6\nn_minutiae 20\ndisk_radius 100\n"
      "jitter_sigma 0.5\nmax_rotation 0.25\nmax_translation 10\nk 4\ntau 7.5\n");
  EXPECT_EQ(sc.seed, 9u);
  EXPECT_EQ(sc.genuine_pairs, 4);
  EXPECT_EQ(sc.imposter_pairs, 6);
  EXPECT_EQ(sc.synth.n_minutiae, 20);
  EXPECT_EQ(sc.synth.disk_radius, 100.0);
  EXPECT_EQ(sc.synth.jitter_sigma, 0.5);
  EXPECT_EQ(sc.synth.max_rotation, 0.25);
  EXPECT_EQ(sc.synth.max_translation, 10.0);
  EXPECT_EQ(sc.k, 4);
  EXPECT_EQ(sc.tau, 7.5);
  EXPECT_EQ(sc.total_pairs(), 10u);
}

TEST(Scenario, ParseErrors) {
  expect_code(Errc::MalformedHeader, [] { parse_scenario("seed 1\n"); });
  expect_code(Errc::MalformedLine, [] { parse_scenario("SCENARIO1\nbogus 1\n"); });
  expect_code(Errc::MalformedLine, [] { parse_scenario("SCENARIO1\nseed x\n"); });
  expect_code(Errc::MalformedLine, [] { parse_scenario("SCENARIO1\ngenuine -3\n"); });
  expect_code(Errc::MalformedLine, [] { parse_scenario("SCENARIO1\ntau 1 2\n"); });
  expect_code(Errc::MalformedLine, [] { parse_scenario("SCENARIO1\npair maybe a b\n"); });
  try {
    parse_scenario("SCENARIO1\nseed 1\n\nk five\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(Scenario, ExplicitPairsFromFiles) {
  const auto dir = fs::temp_directory_path() / ("fpv-eval-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  SynthConfig cfg;
  cfg.seed = 5;
  const auto a = gen_synthetic_minutiae(cfg);
  cfg.seed = 6;
  const auto b = gen_synthetic_minutiae(cfg);
  detail::write_file_atomic(dir / "a.min", serialize_minutiae(a));
  detail::write_file_atomic(dir / "b.min", serialize_minutiae(b));
  const auto sc = parse_scenario("SCENARIO1\npair genuine a.min a.min\npair imposter a.min b.min\n", dir);
  ASSERT_EQ(sc.pairs.size(), 2u);
  EXPECT_TRUE(sc.pairs[0].genuine);
  EXPECT_FALSE(sc.pairs[1].genuine);
  const auto run = run_eval(sc, 1);
  EXPECT_TRUE(run.outcomes[0].structural);
  EXPECT_EQ(run.outcomes[0].mhd, 0.0);
  EXPECT_EQ(run.report.wrongly_rejected, 0);
  expect_code(Errc::Io, [&] { parse_scenario("SCENARIO1\npair genuine nope.min a.min\n", dir); });
  fs::remove_all(dir);
}

TEST(Eval, SelfPairsWithoutNoiseAreAllCorrect) {
  Scenario sc;
  sc.seed = 3;
  sc.genuine_pairs = 30;
  sc.synth.jitter_sigma = 0;
  const auto run = run_eval(sc);
  EXPECT_EQ(run.report.trials, 30);
  EXPECT_EQ(run.report.wrongly_accepted, 0);
  EXPECT_EQ(run.report.wrongly_rejected, 0);
  EXPECT_EQ(run.report.accuracy_percent, 100.0);
  for (const auto& o : run.outcomes) EXPECT_LT(o.mhd, 1e-9);
}

TEST(Eval, ImpostersAtTinyTauNeverAccepted) {
  Scenario sc;
  sc.seed = 4;
  sc.imposter_pairs = 100;
  sc.tau = 0.5;
  const auto run = run_eval(sc);
  EXPECT_EQ(run.report.far_percent, 0.0);
  EXPECT_EQ(run.report.accuracy_percent, 100.0);
}

TEST(Eval, SweepIsMonotone) {
  Scenario sc;
  sc.seed = 5;
  sc.genuine_pairs = 60;
  sc.imposter_pairs = 60;
  const auto run = run_eval(sc);
  const auto rows = sweep(run.outcomes, parse_tau_range("0:60:2"));
  ASSERT_EQ(rows.size(), 31u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].report.far_percent, rows[i - 1].report.far_percent);
    EXPECT_LE(rows[i].report.frr_percent, rows[i - 1].report.frr_percent);
  }
}

TEST(Eval, ThreadCountDoesNotChangeResults) {
  Scenario sc;
  sc.seed = 6;
  sc.genuine_pairs = 25;
  sc.imposter_pairs = 25;
  const auto one = run_eval(sc, 1);
  for (unsigned t : {2u, 3u, 8u}) {
    const auto many = run_eval(sc, t);
    ASSERT_EQ(many.outcomes.size(), one.outcomes.size());
    for (std::size_t i = 0; i < one.outcomes.size(); ++i) {
      EXPECT_EQ(many.outcomes[i].structural, one.outcomes[i].structural);
      EXPECT_EQ(many.outcomes[i].mhd, one.outcomes[i].mhd);
    }
  }
  Scenario empty;
  expect_code(Errc::EmptyScenario, [&] { run_eval(empty); });
}

TEST(TauRange, ParseAndFormat) {
  EXPECT_EQ(parse_tau_range("1:2:0.5"), (std::vector<double>{1.0, 1.5, 2.0}));
  EXPECT_EQ(parse_tau_range("3:3:1"), (std::vector<double>{3.0}));
  EXPECT_EQ(parse_tau_range("0:1:0.1").size(), 11u);
  for (const char* bad : {"1:2", "2:1:1", "0:1:0", "a:1:1", "0:1:-1"})
    EXPECT_THROW(parse_tau_range(bad), Error) << bad;

  const std::vector<PairOutcome> o{{true, true, 1.0}, {false, true, 3.0}};
  const auto text = format_sweep(report_at(o, 2.0), 2.0, sweep(o, {0.0, 2.0, 4.0}));
  const auto lines = text::lines(text);
  ASSERT_GE(lines.size(), 5u);
  EXPECT_EQ(lines[0].substr(0, 6), "# tau=");
  EXPECT_EQ(lines[1], "tau\tfar_percent\tfrr_percent\taccuracy_percent\tF\tR\tS");
  EXPECT_EQ(text::split(lines[2], '\t').back(), "2");
  EXPECT_EQ(text::split(lines[4], '\t')[4], "1");
}

}  // namespace
}  // namespace fpv
