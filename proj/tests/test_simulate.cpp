#include "costat/simulate.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "costat/roc.hpp"
#include "oracles.hpp"

using namespace costat;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.n = 6;
  c.m = 5;
  c.k = 2;
  c.mu = 2.0;
  c.n_de = 10;
  c.n_null = 10;
  c.seed = 42;
  return c;
}

}  // namespace

TEST(Simulate, ShapeAndLabels) {
  const SimConfig c = small_config();
  const SimulatedDataset sim = generate_dataset(c);
  EXPECT_EQ(sim.data.gene_count(), 20u);
  EXPECT_EQ(sim.data.sample_count(), 11u);
  EXPECT_EQ(sim.data.count_label(kNormalLabel), 6u);
  EXPECT_EQ(sim.data.count_label(kCancerLabel), 5u);
  EXPECT_EQ(std::accumulate(sim.de_mask.begin(), sim.de_mask.end(), 0), 10);
  EXPECT_EQ(sim.data.gene_ids.front(), "DE_1");
  EXPECT_EQ(sim.data.gene_ids.back(), "NULL_10");
}

TEST(Simulate, ConfigValidation) {
  SimConfig c = small_config();
  c.k = 0;
  EXPECT_THROW(generate_dataset(c), std::invalid_argument);
  c = small_config();
  c.k = c.m + 1;
  EXPECT_THROW(generate_dataset(c), std::invalid_argument);
  c = small_config();
  c.mu = -1.0;
  EXPECT_THROW(generate_dataset(c), std::invalid_argument);
  c = small_config();
  c.n_de = 0;
  EXPECT_THROW(generate_dataset(c), std::invalid_argument);
}

TEST(Simulate, DeterministicAndWorkerIndependent) {
  const SimConfig c = small_config();
  const auto a = generate_dataset(c, 1);
  const auto b = generate_dataset(c, 4);
  const auto r = generate_dataset(c, 1);
  EXPECT_EQ(a.data.values, b.data.values);
  EXPECT_EQ(a.data.values, r.data.values);
}

TEST(Simulate, SeedChangesValues) {
  SimConfig c = small_config();
  const auto a = generate_dataset(c);
  c.seed += 1;
  const auto b = generate_dataset(c);
  EXPECT_NE(a.data.values, b.data.values);
}

TEST(Simulate, AppendingGenesKeepsExistingRows) {
  SimConfig c = small_config();
  const auto small = generate_dataset(c);
  c.n_null += 15;
  const auto grown = generate_dataset(c);
  const std::size_t shared = small.data.values.size();
  for (std::size_t i = 0; i < shared; ++i) {
    ASSERT_EQ(grown.data.values[i], small.data.values[i]);
  }
}

TEST(Simulate, FullActivationShiftsGroupMean) {
  SimConfig c;
  c.n = 20;
  c.m = 20;
  c.k = 20;
  c.mu = 5.0;
  c.n_de = 300;
  c.n_null = 1;
  c.seed = 7;
  const auto sim = generate_dataset(c);
  double diff_sum = 0.0;
  for (int i = 0; i < c.n_de; ++i) {
    const auto row = sim.data.gene(static_cast<std::size_t>(i));
    double xbar = 0.0, ybar = 0.0;
    for (int j = 0; j < c.n; ++j) xbar += row[static_cast<std::size_t>(j)];
    for (int j = c.n; j < c.n + c.m; ++j) ybar += row[static_cast<std::size_t>(j)];
    diff_sum += ybar / c.m - xbar / c.n;
  }
  EXPECT_NEAR(diff_sum / c.n_de, c.mu, 0.1);
}

TEST(Simulate, ZeroShiftMakesClassesExchangeable) {
  SimConfig c = small_config();
  c.mu = 0.0;
  const auto sim = generate_dataset(c);
  // With mu = 0 the DE rows are plain standard normal draws; spot-check the
  // overall mean and variance.
  double sum = 0.0, sumsq = 0.0;
  for (double v : sim.data.values) {
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(sim.data.values.size());
  EXPECT_NEAR(sum / n, 0.0, 0.2);
  EXPECT_NEAR(sumsq / n, 1.0, 0.3);
}

TEST(Simulate, CancerColumnPermutationLeavesScoresUnchanged) {
  SimConfig c = small_config();
  c.seed = 17;
  const auto sim = generate_dataset(c);
  ExpressionDataset permuted = sim.data;
  // Swap two cancer columns (both labelled 1).
  const std::size_t a = static_cast<std::size_t>(c.n);
  const std::size_t b = static_cast<std::size_t>(c.n) + 3;
  for (std::size_t i = 0; i < permuted.gene_count(); ++i) {
    std::swap(permuted.gene(i)[a], permuted.gene(i)[b]);
  }
  StatContext ctx;
  for (Statistic s : {Statistic::T, Statistic::Copa, Statistic::Os, Statistic::Ort}) {
    const auto base = score_genes(sim.data.values, sim.data.gene_count(), sim.data.sample_count(),
                                  sim.data.labels, s, ctx);
    const auto swapped = score_genes(permuted.values, permuted.gene_count(),
                                     permuted.sample_count(), permuted.labels, s, ctx);
    ASSERT_EQ(base.size(), swapped.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_TRUE(oracle::close(base[i], swapped[i]));
    }
  }
}

TEST(RunStudy, ShapesAndDeterminism) {
  SimConfig c = small_config();
  const MomentTable table = estimate_moments(c.m, 20000, 5);
  StatContext ctx;
  ctx.moments = &table;
  const auto a = run_study(c, kAllStatistics, ctx, 1);
  const auto b = run_study(c, kAllStatistics, ctx, 3);
  ASSERT_EQ(a.size(), 5u);
  for (Statistic s : kAllStatistics) {
    const LabeledScores& ls = a.at(s);
    EXPECT_LE(ls.de_scores.size(), 10u);
    EXPECT_LE(ls.null_scores.size(), 10u);
    EXPECT_EQ(ls.de_scores.size() + ls.null_scores.size() + static_cast<std::size_t>(ls.excluded),
              20u);
    EXPECT_EQ(ls.de_scores, b.at(s).de_scores);
    EXPECT_EQ(ls.null_scores, b.at(s).null_scores);
    EXPECT_EQ(ls.excluded, b.at(s).excluded);
  }
}

TEST(RunStudy, StrongSignalSeparates) {
  SimConfig c;
  c.n = 10;
  c.m = 10;
  c.k = 10;
  c.mu = 6.0;
  c.n_de = 50;
  c.n_null = 50;
  c.seed = 3;
  StatContext ctx;
  const std::vector<Statistic> stats{Statistic::T};
  const auto results = run_study(c, stats, ctx);
  const auto& ls = results.at(Statistic::T);
  const auto curve = build_roc(ls.de_scores, ls.null_scores);
  EXPECT_GT(curve.auc, 0.95);
}
