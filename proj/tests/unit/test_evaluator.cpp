#include <gtest/gtest.h>

#include <fstream>

#include "helpers.hpp"

using namespace flagtune;
using testutil::linear_landscape;
using testutil::temp_dir;

namespace {

CompilerTarget shell_target(const std::filesystem::path& dir, std::string compile, std::string run = "{BIN}") {
  std::ofstream(dir / "dummy.c") << "int main(void) { return 0; }\n";
  CompilerTarget t;
  t.compile_cmd = std::move(compile);
  t.run_cmd = std::move(run);
  t.sources = {(dir / "dummy.c").string()};
  t.workdir = dir / "work";
  t.run_timeout_s = 0.5;
  t.compile_timeout_s = 10;
  return t;
}

FlagCatalog two_flags() { return FlagCatalog({make_flag("a", CompilerFamily::gcc_like), make_flag("b", CompilerFamily::gcc_like)}, CompilerFamily::gcc_like); }

TunerConfig one_repeat() {
  TunerConfig cfg;
  cfg.repeats_per_measurement = 1;
  return cfg;
}

}  // namespace

TEST(Landscape, FormulaValues) {
  const auto land = linear_landscape({-0.1, 0.2, 0.0});
  EXPECT_NEAR(land.time(Sequence{1, 0, 0}), 0.9, 1e-12);
  EXPECT_NEAR(land.time(Sequence{0, 0, 0}), 1.0, 1e-12);
}

TEST(Landscape, TrapBlockDeceptive) {
  SyntheticLandscape land(3, 1.0, {0, 0, 0}, {}, {TrapBlock{{0, 1, 2}, 0.3}}, 0.0, 0);
  EXPECT_NEAR(land.time(Sequence{0, 0, 0}), 1.0, 1e-12);
  EXPECT_NEAR(land.time(Sequence{1, 0, 0}), 1.1, 1e-12);
  EXPECT_NEAR(land.time(Sequence{1, 1, 0}), 1.2, 1e-12);
  EXPECT_NEAR(land.time(Sequence{1, 1, 1}), 0.7, 1e-12);
}

TEST(Landscape, NoiseIsDeterministic) {
  SyntheticLandscape land(4, 1.0, {0.1, 0, 0, 0}, {}, {}, 0.05, 9);
  const Sequence s{1, 0, 1, 0};
  EXPECT_EQ(land.sample(s, 0), land.sample(s, 0));
  EXPECT_NE(land.sample(s, 0), land.sample(s, 1));
}

TEST(Landscape, GeneratedTimesPositive) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto land = generate_landscape(10, seed);
    for (std::uint64_t i = 0; i < space_size(10); ++i) EXPECT_GT(land.time(Sequence::from_index(i, 10)), 0.0);
  }
}

TEST(BruteForce, TwoBitExample) {
  SyntheticLandscape land(2, 1.0, {-0.1, -0.2}, {PairTerm{0, 1, 0.5}}, {}, 0.0, 0);
  EXPECT_NEAR(land.time(Sequence{0, 0}), 1.0, 1e-12);
  EXPECT_NEAR(land.time(Sequence{1, 0}), 0.9, 1e-12);
  EXPECT_NEAR(land.time(Sequence{1, 1}), 1.2, 1e-12);
  const auto r = brute_force_best(land);
  EXPECT_EQ(r.best, (Sequence{0, 1}));
  EXPECT_NEAR(r.time_s, 0.8, 1e-12);
}

TEST(BruteForce, TiesGoToAllZeros) {
  const auto r = brute_force_best(linear_landscape({0, 0, 0}, 2.5));
  EXPECT_EQ(r.best, (Sequence{0, 0, 0}));
  EXPECT_DOUBLE_EQ(r.time_s, 2.5);
}

TEST(BruteForce, RefusesWideLandscape) {
  EXPECT_THROW(brute_force_best(linear_landscape(std::vector<double>(21, 0.0))), ConfigError);
}

TEST(Evaluator, SyntheticMeasurementAndBaseline) {
  auto ev = testutil::synthetic_evaluator(linear_landscape({-0.1, 0.2, 0.0}));
  EXPECT_NEAR(ev.measure_baseline().exec_time_s, 1.0, 1e-12);
  const auto& m = ev.measure(Sequence{1, 0, 0});
  EXPECT_NEAR(m.exec_time_s, 0.9, 1e-12);
  EXPECT_EQ(m.status, MeasureStatus::ok);
  EXPECT_EQ(m.repeats.size(), 3u);
}

TEST(Evaluator, SimulatedClockChargesRepeats) {
  auto ev = testutil::synthetic_evaluator(linear_landscape({-0.1, 0.2, 0.0}));
  ev.measure(Sequence{1, 0, 0});
  EXPECT_NEAR(ev.elapsed(), 2.7, 1e-12);
}

TEST(Evaluator, CacheHitIsFree) {
  const auto dir = temp_dir("cache");
  auto ev = Evaluator(shell_target(dir, "cp /bin/true {OUT} # {FLAGS} {SRC}"), two_flags(), one_repeat());
  ev.measure_baseline();
  const auto first = ev.measure(Sequence{1, 0});
  const auto calls = ev.compiler_invocations();
  const auto evals = ev.evaluations();
  const auto& again = ev.measure(Sequence{1, 0});
  EXPECT_EQ(ev.compiler_invocations(), calls);
  EXPECT_EQ(ev.evaluations(), evals);
  EXPECT_EQ(again.exec_time_s, first.exec_time_s);
  EXPECT_EQ(again.status, first.status);
}

TEST(Evaluator, CompileErrorIsPenalized) {
  const auto dir = temp_dir("cerr");
  auto ev = Evaluator(shell_target(dir, "case '{FLAGS}' in *'-fa '*) exit 1;; *) cp /bin/true {OUT};; esac # {SRC}"),
                      two_flags(), one_repeat());
  const auto base = ev.measure_baseline().exec_time_s;
  const auto& m = ev.measure(Sequence{1, 1});
  EXPECT_EQ(m.status, MeasureStatus::compile_error);
  EXPECT_TRUE(m.penalized);
  EXPECT_DOUBLE_EQ(m.exec_time_s, 2.0 * base);
}

TEST(Evaluator, PenaltyUsesWorstOkTime) {
  const auto dir = temp_dir("worst");
  auto ev = Evaluator(shell_target(dir, "case '{FLAGS}' in *'-fa '*) exit 1;; *) cp /bin/true {OUT};; esac # {SRC}"),
                      two_flags(), one_repeat());
  ev.measure_baseline();
  const auto ok = ev.measure(Sequence{0, 0}).exec_time_s;
  const auto& bad = ev.measure(Sequence{1, 0});
  EXPECT_DOUBLE_EQ(bad.exec_time_s, 2.0 * ok);
}

TEST(Evaluator, RuntimeErrorIsPenalized) {
  const auto dir = temp_dir("rerr");
  auto ev = Evaluator(shell_target(dir, "case '{FLAGS}' in *-fa*) cp /bin/false {OUT};; *) cp /bin/true {OUT};; esac # {SRC}"),
                      two_flags(), one_repeat());
  ev.measure_baseline();
  const auto& m = ev.measure(Sequence{1, 0});
  EXPECT_EQ(m.status, MeasureStatus::runtime_error);
  EXPECT_TRUE(m.penalized);
}

TEST(Evaluator, TimeoutIsPenalized) {
  const auto dir = temp_dir("tmo");
  auto ev = Evaluator(shell_target(dir, "cp /bin/sleep {OUT} # {FLAGS} {SRC}", "{BIN} 0; case {BIN} in *seq_*) sleep 5;; esac"),
                      two_flags(), one_repeat());
  ev.measure_baseline();
  const auto& m = ev.measure(Sequence{1, 0});
  EXPECT_EQ(m.status, MeasureStatus::timeout);
  EXPECT_TRUE(m.penalized);
}

TEST(Evaluator, ExpectedOutputMismatchIsRuntimeError) {
  const auto dir = temp_dir("out");
  std::ofstream(dir / "expected.txt") << "hello\n";
  auto t = shell_target(dir, "cp /bin/echo {OUT} # {FLAGS} {SRC}", "case {BIN} in *seq_*) {BIN} bye;; *) {BIN} hello;; esac");
  t.expected_output = dir / "expected.txt";
  auto ev = Evaluator(t, two_flags(), one_repeat());
  EXPECT_EQ(ev.measure_baseline().status, MeasureStatus::ok);
  EXPECT_EQ(ev.measure(Sequence{0, 1}).status, MeasureStatus::runtime_error);
}

TEST(Evaluator, MissingCompilerIsFatal) {
  const auto dir = temp_dir("nocc");
  auto ev = Evaluator(shell_target(dir, "no-such-compiler-flagtune {FLAGS} {SRC} -o {OUT}"), two_flags(), one_repeat());
  EXPECT_THROW(ev.measure_baseline(), EnvironmentError);
}

TEST(Evaluator, RealCompilerBaseline) {
  if (std::system("command -v cc >/dev/null 2>&1") != 0) GTEST_SKIP() << "no C compiler";
  const auto dir = temp_dir("cc");
  auto ev = Evaluator(shell_target(dir, "cc {FLAGS} {SRC} -o {OUT}"), two_flags(), one_repeat());
  const auto m = ev.measure_baseline();
  EXPECT_EQ(m.status, MeasureStatus::ok);
  EXPECT_GT(m.exec_time_s, 0.0);
}

TEST(Evaluator, BudgetByEvaluationCount) {
  TunerConfig cfg;
  cfg.max_evaluations = 2;
  auto ev = testutil::synthetic_evaluator(linear_landscape({0.1, 0.1}), cfg);
  ev.measure(Sequence{0, 1});
  EXPECT_FALSE(ev.exhausted());
  ev.measure(Sequence{1, 1});
  EXPECT_TRUE(ev.exhausted());
}

TEST(Journal, LineRoundTrip) {
  Measurement m{Sequence{1, 0, 1, 1, 0}, 0.125, MeasureStatus::timeout, true, {0.1, 0.2}};
  const auto back = MeasurementCache::parse_journal_line(MeasurementCache::journal_line(m), 5);
  EXPECT_EQ(back.sequence, m.sequence);
  EXPECT_EQ(back.exec_time_s, m.exec_time_s);
  EXPECT_EQ(back.status, m.status);
  EXPECT_EQ(back.repeats, m.repeats);
}

TEST(Journal, ResumeRestoresCache) {
  const auto dir = temp_dir("journal");
  const auto land = linear_landscape({0.1, -0.2, 0.3});
  {
    Evaluator ev(land, FlagCatalog::synthetic(3), TunerConfig{}, dir / "j.txt");
    ev.measure(Sequence{1, 1, 0});
    ev.measure(Sequence{0, 1, 0});
  }
  const auto previous = MeasurementCache::load_journal(dir / "j.txt", 3);
  ASSERT_EQ(previous.size(), 2u);
  Evaluator ev(land, FlagCatalog::synthetic(3), TunerConfig{});
  ev.restore(previous);
  EXPECT_TRUE(ev.cached(Sequence{0, 1, 0}));
  EXPECT_EQ(ev.evaluations(), 0u);
}
