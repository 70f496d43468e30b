#include "costat/fdr.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "costat/simulate.hpp"
#include "oracles.hpp"

using namespace costat;

namespace {

SimulatedDataset noise_dataset(std::uint64_t seed, int genes = 60) {
  SimConfig c;
  c.n = 8;
  c.m = 8;
  c.k = 1;
  c.mu = 0.0;  // pure noise: labels carry no signal
  c.n_de = 1;
  c.n_null = genes - 1;
  c.seed = seed;
  return generate_dataset(c);
}

}  // namespace

TEST(BuildFdrTable, SeparationGivesZeroFdr) {
  const std::vector<double> observed{10, 11, 12};
  const std::vector<std::vector<double>> permuted{{1, 2, 3}, {0, 2, 4}};
  const FdrTable t = build_fdr_table(observed, permuted);
  ASSERT_EQ(t.rows.size(), 3u);
  for (const FdrRow& row : t.rows) {
    EXPECT_DOUBLE_EQ(row.expected_false, 0.0);
    EXPECT_DOUBLE_EQ(row.fdr, 0.0);
  }
  // Descending thresholds, non-decreasing `called`, top row calls nothing.
  EXPECT_DOUBLE_EQ(t.rows[0].threshold, 12.0);
  EXPECT_EQ(t.rows[0].called, 0);
  EXPECT_EQ(t.rows[1].called, 1);
  EXPECT_EQ(t.rows[2].called, 2);
}

TEST(BuildFdrTable, CountsStrictlyAbove) {
  const std::vector<double> observed{1, 2, 3};
  const std::vector<std::vector<double>> permuted{{2.5, 0.5, 3.5}};
  const FdrTable t = build_fdr_table(observed, permuted);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_DOUBLE_EQ(t.rows[0].threshold, 3.0);
  EXPECT_DOUBLE_EQ(t.rows[0].expected_false, 1.0);  // 3.5 > 3
  EXPECT_DOUBLE_EQ(t.rows[1].expected_false, 2.0);  // {2.5, 3.5} > 2
  EXPECT_DOUBLE_EQ(t.rows[2].expected_false, 2.0);  // 0.5 is not > 1
  EXPECT_DOUBLE_EQ(t.rows[1].fdr, 1.0);             // min(1, 2/1)
  EXPECT_DOUBLE_EQ(t.rows[2].fdr, 1.0);
}

TEST(BuildFdrTable, Pi0Scales) {
  const std::vector<double> observed{1, 2, 3};
  const std::vector<std::vector<double>> permuted{{2.5, 0.5, 1.5}};
  FdrOptions opt;
  opt.pi0 = 0.5;
  const FdrTable t = build_fdr_table(observed, permuted, opt);
  // At threshold 1: called 2, expected_false 2 -> fdr = 0.5 * 2 / 2 = 0.5.
  EXPECT_DOUBLE_EQ(t.rows[2].fdr, 0.5);
}

TEST(BuildFdrTable, MedianCountsSwitch) {
  const std::vector<double> observed{0.0};
  const std::vector<std::vector<double>> permuted{{1, 1}, {1, -1}, {-1, -1}};
  FdrOptions mean_opt;
  const FdrTable mean_table = build_fdr_table(observed, permuted, mean_opt);
  ASSERT_EQ(mean_table.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(mean_table.rows[0].expected_false, 1.0);  // (2 + 1 + 0) / 3

  FdrOptions med_opt;
  med_opt.median_counts = true;
  const FdrTable med_table = build_fdr_table(observed, permuted, med_opt);
  EXPECT_DOUBLE_EQ(med_table.rows[0].expected_false, 1.0);  // median{0,1,2}

  const std::vector<std::vector<double>> skewed{{1, 1}, {-1, -1}, {-1, -1}, {-1, -1}};
  const FdrTable skew_med = build_fdr_table(observed, skewed, med_opt);
  EXPECT_DOUBLE_EQ(skew_med.rows[0].expected_false, 0.0);  // median{2,0,0,0}
  const FdrTable skew_mean = build_fdr_table(observed, skewed, mean_opt);
  EXPECT_DOUBLE_EQ(skew_mean.rows[0].expected_false, 0.5);
}

TEST(BuildFdrTable, NanScoresExcluded) {
  const double nan = std::nan("");
  const std::vector<double> observed{5, nan, 7};
  const std::vector<std::vector<double>> permuted{{nan, 6.0}};
  const FdrTable t = build_fdr_table(observed, permuted);
  EXPECT_EQ(t.excluded_observed, 1);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(t.rows[1].expected_false, 1.0);  // only the finite 6 counts
}

TEST(BuildFdrTable, InvalidInputsThrow) {
  EXPECT_THROW(build_fdr_table(std::vector<double>{1}, {}), std::invalid_argument);
  const std::vector<std::vector<double>> permuted{{1.0}};
  FdrOptions opt;
  opt.pi0 = 1.5;
  EXPECT_THROW(build_fdr_table(std::vector<double>{1}, permuted, opt), std::invalid_argument);
}

TEST(FdrCurve, DeterministicAcrossRunsAndWorkers) {
  const SimulatedDataset sim = noise_dataset(11);
  StatContext ctx;
  const FdrTable a = fdr_curve(sim.data, Statistic::T, 24, 5, ctx, {}, 1);
  const FdrTable b = fdr_curve(sim.data, Statistic::T, 24, 5, ctx, {}, 4);
  const FdrTable c = fdr_curve(sim.data, Statistic::T, 24, 5, ctx, {}, 1);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].threshold, b.rows[i].threshold);
    EXPECT_EQ(a.rows[i].called, b.rows[i].called);
    EXPECT_EQ(a.rows[i].expected_false, b.rows[i].expected_false);
    EXPECT_EQ(a.rows[i].fdr, c.rows[i].fdr);
  }
}

TEST(FdrCurve, SeedChangesPermutations) {
  const SimulatedDataset sim = noise_dataset(13);
  StatContext ctx;
  const FdrTable a = fdr_curve(sim.data, Statistic::T, 16, 1, ctx);
  const FdrTable b = fdr_curve(sim.data, Statistic::T, 16, 2, ctx);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    any_diff |= a.rows[i].expected_false != b.rows[i].expected_false;
  }
  EXPECT_TRUE(any_diff);
}

TEST(FdrCurve, TableInvariants) {
  const SimulatedDataset sim = noise_dataset(17);
  StatContext ctx;
  const FdrTable t = fdr_curve(sim.data, Statistic::Ort, 20, 9, ctx);
  ASSERT_FALSE(t.rows.empty());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const FdrRow& row = t.rows[i];
    EXPECT_GE(row.fdr, 0.0);
    EXPECT_LE(row.fdr, 1.0);
    EXPECT_GE(row.expected_false, 0.0);
    if (i > 0) {
      EXPECT_LT(row.threshold, t.rows[i - 1].threshold);
      EXPECT_GE(row.called, t.rows[i - 1].called);
      // expected_false is monotone in the threshold.
      EXPECT_GE(row.expected_false, t.rows[i - 1].expected_false);
    }
  }
}

TEST(FdrCurve, PureNoiseHasHighFdrAtLowThresholds) {
  // With no signal, thresholds that call many genes should see estimated
  // FDR near 1 on average.
  const SimulatedDataset sim = noise_dataset(23, 120);
  StatContext ctx;
  const FdrTable t = fdr_curve(sim.data, Statistic::T, 60, 3, ctx);
  double acc = 0.0;
  int n = 0;
  for (const FdrRow& row : t.rows) {
    if (row.called >= 60) {
      acc += row.fdr;
      ++n;
    }
  }
  ASSERT_GT(n, 0);
  EXPECT_GE(acc / n, 0.5);
}

TEST(FdrCurve, GeneRowOrderIrrelevant) {
  const SimulatedDataset sim = noise_dataset(29);
  ExpressionDataset reordered = sim.data;
  std::reverse(reordered.gene_ids.begin(), reordered.gene_ids.end());
  const std::size_t s = reordered.sample_count();
  std::vector<double> flipped(reordered.values.size());
  for (std::size_t i = 0; i < reordered.gene_count(); ++i) {
    std::copy_n(sim.data.values.begin() + static_cast<std::ptrdiff_t>(i * s), s,
                flipped.begin() + static_cast<std::ptrdiff_t>((reordered.gene_count() - 1 - i) * s));
  }
  reordered.values = std::move(flipped);

  StatContext ctx;
  const FdrTable a = fdr_curve(sim.data, Statistic::Copa, 12, 7, ctx);
  const FdrTable b = fdr_curve(reordered, Statistic::Copa, 12, 7, ctx);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].threshold, b.rows[i].threshold);
    EXPECT_EQ(a.rows[i].expected_false, b.rows[i].expected_false);
  }
}

TEST(FdrCurve, RejectsZeroPermutations) {
  const SimulatedDataset sim = noise_dataset(31);
  StatContext ctx;
  EXPECT_THROW(fdr_curve(sim.data, Statistic::T, 0, 1, ctx), std::invalid_argument);
}

TEST(FdrVsCalled, ProjectsOnePointPerCalledValue) {
  const std::vector<double> observed{1, 2, 3, 4};
  const std::vector<std::vector<double>> permuted{{0.5, 2.5}};
  const FdrTable t = build_fdr_table(observed, permuted);
  const auto points = fdr_vs_called(t);
  ASSERT_EQ(points.size(), t.rows.size());
  for (std::size_t i = 1; i < points.size(); ++i) {
    EXPECT_GT(points[i].first, points[i - 1].first);
  }
}

TEST(FdrCsv, Formats) {
  const std::vector<double> observed{1, 2};
  const std::vector<std::vector<double>> permuted{{1.5}};
  const FdrTable t = build_fdr_table(observed, permuted);
  const std::string csv = fdr_csv(t);
  EXPECT_EQ(csv.rfind("threshold,called,expected_false,fdr\n", 0), 0u);
  EXPECT_NE(csv.find("\n2,0,0,0\n"), std::string::npos);
  EXPECT_NE(csv.find("\n1,1,1,1\n"), std::string::npos);
  const std::string called = fdr_called_csv(t);
  EXPECT_EQ(called.rfind("called,fdr\n", 0), 0u);
}
