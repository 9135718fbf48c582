#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace flagtune;

namespace {

// Test-side oracle: Phi(z) = 0.5 + integral_0^z phi, composite Simpson.
double simpson_cdf(double z) {
  const int steps = 20000;
  const double h = z / steps;
  auto f = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = f(0.0) + f(z);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return 0.5 + s * h / 3.0;
}

Dataset exhaustive(const SyntheticLandscape& land) {
  Dataset d;
  for (std::uint64_t i = 0; i < space_size(land.size()); ++i) {
    const auto s = Sequence::from_index(i, land.size());
    d.insert(s, land.time(s));
  }
  return d;
}

}  // namespace

TEST(Forest, ConstantTargetsGiveSingleLeaves) {
  Dataset d;
  Rng r(1);
  while (d.size() < 12) d.insert(random_sequence(r, 5), 3.7);
  const auto f = Forest::fit(d, {}, 17);
  EXPECT_EQ(f.size(), 100u);
  for (const auto& t : f.trees()) {
    ASSERT_EQ(t.nodes().size(), 1u);
    EXPECT_DOUBLE_EQ(t.nodes()[0].value, 3.7);
  }
  const auto p = f.predict(Sequence{1, 0, 1, 0, 1});
  EXPECT_NEAR(p.mean, 3.7, 1e-12);
  EXPECT_NEAR(p.variance, 0.0, 1e-24);
  EXPECT_LT(p.sigma(), kSigmaFloor);
}

TEST(Forest, TwoPointFit) {
  Dataset d;
  d.insert(Sequence{0}, 1.0);
  d.insert(Sequence{1}, 2.0);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto f = Forest::fit(d, {}, seed);
    for (const auto& t : f.trees()) {
      const double v = t.predict(Sequence{0});
      EXPECT_TRUE(v == 1.0 || v == 1.5 || v == 2.0) << v;
      if (t.nodes().size() > 1) EXPECT_EQ(t.nodes()[0].feature, 0);
    }
    total += f.predict_mean(Sequence{0});
  }
  const double avg = total / 50.0;
  EXPECT_GT(avg, 1.0);
  EXPECT_LT(avg, 2.0);
}

TEST(Forest, TreeWithEveryRowIsExactInSample) {
  const auto land = generate_landscape(3, 5);
  const auto d = exhaustive(land);
  std::vector<Sequence> x;
  std::vector<double> y;
  for (const auto& e : d.entries()) {
    x.push_back(e.sequence);
    y.push_back(e.time_s);
  }
  // a bootstrap-like multiset that still contains all 8 rows
  std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5, 6, 7, 3, 3, 6};
  const auto tree = RegressionTree::fit(x, y, rows, {});
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(tree.predict(x[i]), y[i]);
}

TEST(Forest, NoBootstrapForestIsExactInSample) {
  const auto land = generate_landscape(6, 8);
  const auto d = exhaustive(land);
  ForestParams p;
  p.trees = 5;
  p.bootstrap = false;
  const auto f = Forest::fit(d, p, 1);
  for (const auto& e : d.entries()) EXPECT_DOUBLE_EQ(f.predict_mean(e.sequence), e.time_s);
}

TEST(Forest, SingleTreeHasZeroVariance) {
  const auto d = exhaustive(generate_landscape(4, 2));
  ForestParams p;
  p.trees = 1;
  const auto f = Forest::fit(d, p, 3);
  Rng r(4);
  for (int i = 0; i < 20; ++i) EXPECT_DOUBLE_EQ(f.predict(random_sequence(r, 4)).variance, 0.0);
}

TEST(Forest, MeanAndVarianceOfPerTreeValues) {
  const auto d = exhaustive(generate_landscape(5, 3));
  const auto f = Forest::fit(d, {}, 9);
  const Sequence x{1, 1, 0, 0, 1};
  const auto p = f.predict(x);
  ASSERT_EQ(p.per_tree.size(), 100u);
  double mean = 0.0;
  for (double v : p.per_tree) mean += v;
  mean /= 100.0;
  double var = 0.0;
  for (double v : p.per_tree) var += (v - mean) * (v - mean);
  var /= 100.0;
  EXPECT_NEAR(p.mean, mean, 1e-12);
  EXPECT_NEAR(p.variance, var, 1e-12);
  EXPECT_NEAR(f.predict_mean(x), p.mean, 1e-12);
}

TEST(Forest, DeterministicForSeed) {
  const auto d = exhaustive(generate_landscape(6, 4));
  const auto a = Forest::fit(d, {}, 77), b = Forest::fit(d, {}, 77);
  Rng r(5);
  for (int i = 0; i < 30; ++i) {
    const auto x = random_sequence(r, 6);
    EXPECT_EQ(a.predict(x).per_tree, b.predict(x).per_tree);
  }
}

// Property: predictions lie within the range of the training targets.
TEST(Forest, PredictionsInsideTargetRange) {
  Rng r(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto land = generate_landscape(8, 100 + trial);
    Dataset d;
    while (d.size() < 20) {
      const auto s = random_sequence(r, 8);
      d.insert(s, land.time(s));
    }
    double lo = 1e300, hi = -1e300;
    for (const auto& e : d.entries()) {
      lo = std::min(lo, e.time_s);
      hi = std::max(hi, e.time_s);
    }
    const auto f = Forest::fit(d, {}, trial);
    for (int i = 0; i < 50; ++i) {
      const double m = f.predict_mean(random_sequence(r, 8));
      EXPECT_GE(m, lo - 1e-12);
      EXPECT_LE(m, hi + 1e-12);
    }
  }
}

TEST(Forest, WidthMismatchRejected) {
  const auto d = exhaustive(generate_landscape(3, 1));
  const auto f = Forest::fit(d, {}, 1);
  EXPECT_THROW(f.predict(Sequence{1, 0}), Error);
}

TEST(Normal, PdfCdfValues) {
  EXPECT_NEAR(normal_pdf(0.0), 0.3989423, 1e-7);
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021, 1e-7);
}

TEST(Normal, CdfMatchesQuadratureOracle) {
  for (double z = -8.0; z <= 8.0; z += 0.25) EXPECT_NEAR(normal_cdf(z), simpson_cdf(z), 1e-7) << z;
}

TEST(Normal, CdfSymmetry) {
  for (double z = 0.0; z <= 6.0; z += 0.1) EXPECT_NEAR(normal_cdf(z) + normal_cdf(-z), 1.0, 1e-15);
}

TEST(ExpectedImprovement, TabulatedCases) {
  EXPECT_NEAR(expected_improvement(10.0, 1.0, 10.0), 0.3989423, 1e-4);
  EXPECT_DOUBLE_EQ(expected_improvement(11.0, 0.0, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(expected_improvement(9.0, 0.0, 10.0), 1.0);
  const double oracle = 1.0 * simpson_cdf(0.5) + 2.0 * std::exp(-0.125) / std::sqrt(2.0 * M_PI);
  EXPECT_NEAR(oracle, 1.3956, 1e-4);
  EXPECT_NEAR(expected_improvement(9.0, 2.0, 10.0), oracle, 1e-10);
}

TEST(ExpectedImprovement, SigmaFloor) {
  EXPECT_DOUBLE_EQ(expected_improvement(9.5, 1e-13, 10.0), 0.5);
  EXPECT_GT(expected_improvement(9.5, 1e-6, 10.0), 0.0);
}

// Property: EI >= 0 and non-increasing in the predicted mean.
TEST(ExpectedImprovement, NonNegativeAndMonotoneInMean) {
  for (double sigma : {0.0, 0.01, 0.5, 2.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
      const double mu = 5.0 + 0.1 * i;
      const double ei = expected_improvement(mu, sigma, 10.0);
      EXPECT_GE(ei, 0.0);
      EXPECT_LE(ei, prev + 1e-15);
      prev = ei;
    }
  }
}
