#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"

using namespace flagtune;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SubstreamsDiffer) {
  auto a = Rng::substream(7, 0), b = Rng::substream(7, 1);
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(Rng, BelowStaysInRange) {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(r.below(7), 7u);
}

TEST(Rng, Uniform01InUnitInterval) {
  Rng r(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Catalog, GccLikeTokens) {
  std::istringstream in("ssa-phiopt\nipa-cp\n");
  const auto cat = parse_catalog(in, CompilerFamily::gcc_like);
  ASSERT_EQ(cat.size(), 2u);
  EXPECT_EQ(cat[0].on_token, "-fssa-phiopt");
  EXPECT_EQ(cat[0].off_token, "-fno-ssa-phiopt");
  EXPECT_EQ(cat[1].on_token, "-fipa-cp");
  EXPECT_EQ(cat[1].off_token, "-fno-ipa-cp");
}

TEST(Catalog, EmptyInputRejected) {
  std::istringstream in("");
  try {
    parse_catalog(in, CompilerFamily::gcc_like);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("empty catalog"), std::string::npos);
  }
}

TEST(Catalog, CommentsOnlyIsEmpty) {
  std::istringstream in("# nothing\n\n");
  EXPECT_THROW(parse_catalog(in, CompilerFamily::gcc_like), ConfigError);
}

TEST(Catalog, DuplicateNameReportsLine) {
  std::istringstream in("ipa-cp\ngcse\nipa-cp\n");
  try {
    parse_catalog(in, CompilerFamily::gcc_like);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Catalog, ExplicitTriple) {
  std::istringstream in("vec|-mllvm -vectorize|\n");
  const auto cat = parse_catalog(in, CompilerFamily::llvm_like);
  EXPECT_EQ(cat[0].name, "vec");
  EXPECT_EQ(cat[0].on_token, "-mllvm -vectorize");
  EXPECT_EQ(cat[0].off_token, "");
}

TEST(Catalog, FlagTokensFollowBits) {
  std::istringstream in("a\nb\nc\n");
  const auto cat = parse_catalog(in, CompilerFamily::gcc_like);
  EXPECT_EQ(join(flag_tokens(cat, Sequence{1, 0, 1})), "-fa -fno-b -fc");
}

TEST(Catalog, FileLoadsSampleCatalog) {
  const auto cat = catalog_from_file(std::string(FLAGTUNE_SAMPLES_DIR) + "/kernel/gcc10.txt");
  EXPECT_EQ(cat.size(), 10u);
}

TEST(RandomSequence, DeterministicForSeed) {
  Rng a(99), b(99);
  EXPECT_EQ(random_sequence(a, 4), random_sequence(b, 4));
}

TEST(RandomSequence, SingleBit) {
  Rng r(1);
  const auto s = random_sequence(r, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_LE(s[0], 1);
}

TEST(RandomSequence, PerBitMeanNearHalf) {
  Rng r(2024);
  constexpr std::size_t n = 64, draws = 10000;
  std::vector<std::size_t> ones(n, 0);
  for (std::size_t d = 0; d < draws; ++d) {
    const auto s = random_sequence(r, n);
    for (std::size_t i = 0; i < n; ++i) ones[i] += s[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = double(ones[i]) / draws;
    EXPECT_GE(mean, 0.47) << "bit " << i;
    EXPECT_LE(mean, 0.53) << "bit " << i;
  }
}

TEST(Sequence, IndexOrderIsLexicographic) {
  EXPECT_EQ(Sequence::from_index(1, 3), (Sequence{0, 0, 1}));
  EXPECT_EQ(Sequence::from_index(4, 3), (Sequence{1, 0, 0}));
  EXPECT_LT(Sequence::from_index(3, 3), Sequence::from_index(4, 3));
}

TEST(Sequence, StringRoundTrip) {
  const Sequence s{1, 0, 1, 1, 0};
  EXPECT_EQ(s.to_string(), "10110");
  EXPECT_EQ(Sequence::from_string("10110"), s);
  EXPECT_THROW(Sequence::from_string("10a"), Error);
}

// Property: hex packing round-trips for every width and bit pattern sampled.
TEST(Sequence, HexRoundTripProperty) {
  Rng r(11);
  for (std::size_t n = 1; n <= 70; ++n)
    for (int k = 0; k < 20; ++k) {
      const auto s = random_sequence(r, n);
      EXPECT_EQ(Sequence::from_hex(s.to_hex(), n), s) << s.to_string();
    }
}

TEST(Sequence, HexNibbleLayout) {
  // bit 4k is the most significant bit of nibble k
  EXPECT_EQ((Sequence{1, 0, 0, 0}).to_hex(), "8");
  EXPECT_EQ((Sequence{0, 0, 0, 1, 1}).to_hex(), "18");
}

TEST(Dataset, RejectsDuplicatesAndTracksBest) {
  Dataset d;
  EXPECT_TRUE(d.insert(Sequence{0, 1}, 2.0));
  EXPECT_TRUE(d.insert(Sequence{1, 1}, 1.5));
  EXPECT_FALSE(d.insert(Sequence{0, 1}, 0.1));
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.best().sequence, (Sequence{1, 1}));
  EXPECT_TRUE(d.contains(Sequence{1, 1}));
  EXPECT_FALSE(d.contains(Sequence{0, 0}));
}

TEST(Speedup, BaselineOverMeasured) {
  EXPECT_DOUBLE_EQ(compute_speedup(2.0, 1.6), 1.25);
}

TEST(TunerConfig, DefaultsValidate) {
  TunerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.ini_size, 2u);
  EXPECT_EQ(cfg.max_training, 50u);
  EXPECT_DOUBLE_EQ(cfg.acc_threshold_select, 0.95);
  EXPECT_DOUBLE_EQ(cfg.acc_threshold_stop, 0.96);
  EXPECT_EQ(cfg.candidate_pool, 1000u);
  EXPECT_DOUBLE_EQ(cfg.omega, 0.6);
  EXPECT_DOUBLE_EQ(cfg.v_max, 4.0);
  cfg.ini_size = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, UnknownKeysRejected) {
  auto j = json::parse(R"({"target": {"synthetic": {"n": 3, "generate_seed": 1}}, "tunr": {}})");
  EXPECT_THROW(parse_run_config(j, "."), ConfigError);
  j = json::parse(R"({"target": {"synthetic": {"n": 3, "generate_seed": 1}}, "tuner": {"omegaa": 1}})");
  EXPECT_THROW(parse_run_config(j, "."), ConfigError);
}

TEST(Config, ExactlyOneTarget) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"target": {}})"), "."), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({})"), "."), ConfigError);
}

TEST(Config, WrongTypeRejected) {
  auto j = json::parse(R"({"seed": "one", "target": {"synthetic": {"n": 3, "generate_seed": 1}}})");
  EXPECT_THROW(parse_run_config(j, "."), ConfigError);
}

TEST(Config, SampleConfigsLoad) {
  const std::string dir = FLAGTUNE_SAMPLES_DIR;
  const auto a = load_run_config(dir + "/synthetic_n12.json");
  EXPECT_EQ(a.catalog.size(), 12u);
  EXPECT_EQ(a.tuner.max_evaluations, 80u);
  const auto b = load_run_config(dir + "/synthetic_n2.json");
  EXPECT_EQ(b.catalog.size(), 2u);
  const auto c = load_run_config(dir + "/kernel/config.json");
  EXPECT_EQ(c.catalog.size(), 10u);
  EXPECT_TRUE(std::holds_alternative<CompilerTarget>(c.target));
}
