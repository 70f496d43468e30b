#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "costat/dataset.hpp"
#include "costat/detectors.hpp"
#include "costat/parallel.hpp"
#include "costat/rng.hpp"

namespace costat {

struct FdrRow {
  double threshold = 0.0;
  int called = 0;              // observed scores strictly above the threshold
  double expected_false = 0.0; // permutation estimate of false calls
  double fdr = 0.0;            // min(1, pi0 * expected_false / called); 0 when called = 0
};

struct FdrTable {
  Statistic statistic = Statistic::T;
  int permutations = 0;
  std::uint64_t seed = 0;
  double pi0 = 1.0;
  bool median_counts = false;
  int excluded_observed = 0;   // degenerate genes dropped from the observed set
  std::vector<FdrRow> rows;    // descending threshold, `called` non-decreasing
};

struct FdrOptions {
  double pi0 = 1.0;            // conservative default: all genes treated as null
  bool median_counts = false;  // median instead of mean of per-permutation false calls
};

// Assembles the table from raw score sets. Thresholds are the distinct
// observed scores; calls use strict `score > threshold`, matching the ROC
// sweep. NaN scores (degenerate genes) are dropped from whichever set they
// occur in.
inline FdrTable build_fdr_table(std::span<const double> observed,
                                std::span<const std::vector<double>> permuted_sets,
                                const FdrOptions& opt = {}) {
  if (permuted_sets.empty()) throw std::invalid_argument("build_fdr_table: no permutations");
  if (!(opt.pi0 >= 0.0 && opt.pi0 <= 1.0)) {
    throw std::invalid_argument("build_fdr_table: pi0 must be in [0, 1]");
  }
  FdrTable table;
  table.permutations = static_cast<int>(permuted_sets.size());
  table.pi0 = opt.pi0;
  table.median_counts = opt.median_counts;

  std::vector<double> obs;
  obs.reserve(observed.size());
  for (double s : observed) {
    if (std::isnan(s)) {
      ++table.excluded_observed;
    } else {
      obs.push_back(s);
    }
  }
  if (obs.empty()) throw std::invalid_argument("build_fdr_table: no usable observed scores");
  std::sort(obs.begin(), obs.end());

  std::vector<double> thresholds(obs);
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const std::size_t n_thresh = thresholds.size();  // ascending here, reported descending

  const std::size_t n_perm = permuted_sets.size();
  std::vector<std::vector<int>> counts(n_perm, std::vector<int>(n_thresh));
  std::vector<double> perm;
  for (std::size_t b = 0; b < n_perm; ++b) {
    perm.clear();
    for (double s : permuted_sets[b]) {
      if (!std::isnan(s)) perm.push_back(s);
    }
    std::sort(perm.begin(), perm.end());
    for (std::size_t ti = 0; ti < n_thresh; ++ti) {
      const auto above = perm.end() - std::upper_bound(perm.begin(), perm.end(), thresholds[ti]);
      counts[b][ti] = static_cast<int>(above);
    }
  }

  table.rows.resize(n_thresh);
  std::vector<int> column(n_perm);
  for (std::size_t ti = 0; ti < n_thresh; ++ti) {
    const std::size_t ri = n_thresh - 1 - ti;  // report descending thresholds
    FdrRow& row = table.rows[ri];
    row.threshold = thresholds[ti];
    row.called = static_cast<int>(obs.end() -
                                  std::upper_bound(obs.begin(), obs.end(), thresholds[ti]));
    if (opt.median_counts) {
      for (std::size_t b = 0; b < n_perm; ++b) column[b] = counts[b][ti];
      std::sort(column.begin(), column.end());
      const std::size_t mid = n_perm / 2;
      row.expected_false = (n_perm % 2 == 1)
                               ? column[mid]
                               : 0.5 * (column[mid - 1] + column[mid]);
    } else {
      long long total = 0;
      for (std::size_t b = 0; b < n_perm; ++b) total += counts[b][ti];
      row.expected_false = static_cast<double>(total) / static_cast<double>(n_perm);
    }
    row.fdr = row.called > 0
                  ? std::min(1.0, opt.pi0 * row.expected_false / static_cast<double>(row.called))
                  : 0.0;
  }
  return table;
}

// SAM-style permutation FDR: score the dataset, rescore under B uniform
// label permutations (class sizes preserved), and estimate the expected
// false calls at each observed-score threshold. Deterministic in the seed
// and independent of the worker count.
inline FdrTable fdr_curve(const ExpressionDataset& d, Statistic stat, int permutations,
                          std::uint64_t seed, const StatContext& ctx, const FdrOptions& opt = {},
                          int workers = 1) {
  if (permutations < 1) throw std::invalid_argument("fdr_curve: permutations must be >= 1");
  const std::uint64_t stream_seed = salt_seed(seed, kFdrStreamTag);

  const std::vector<double> observed =
      score_genes(d.values, d.gene_count(), d.sample_count(), d.labels, stat, ctx, workers);

  const auto n_perm = static_cast<std::size_t>(permutations);
  std::vector<std::vector<double>> permuted(n_perm);
  for_each_chunk(n_perm, 1, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      StreamRng rng(stream_seed, b);
      std::vector<std::uint8_t> labels(d.labels);
      shuffle(labels, rng);
      permuted[b] =
          score_genes(d.values, d.gene_count(), d.sample_count(), labels, stat, ctx, 1);
    }
  });

  FdrTable table = build_fdr_table(observed, permuted, opt);
  table.statistic = stat;
  table.seed = seed;
  return table;
}

// Projection used for plotting FDR against the number of genes called.
inline std::vector<std::pair<int, double>> fdr_vs_called(const FdrTable& table) {
  std::vector<std::pair<int, double>> points;
  points.reserve(table.rows.size());
  for (const FdrRow& row : table.rows) {
    if (!points.empty() && points.back().first == row.called) continue;
    points.emplace_back(row.called, row.fdr);
  }
  return points;
}

// CSV: `threshold,called,expected_false,fdr`.
inline std::string fdr_csv(const FdrTable& table) {
  std::ostringstream out;
  out << "threshold,called,expected_false,fdr\n";
  for (const FdrRow& row : table.rows) {
    out << format_double(row.threshold) << ',' << row.called << ','
        << format_double(row.expected_false) << ',' << format_double(row.fdr) << '\n';
  }
  return out.str();
}

// CSV of the plotting projection: `called,fdr`.
inline std::string fdr_called_csv(const FdrTable& table) {
  std::ostringstream out;
  out << "called,fdr\n";
  for (const auto& [called, fdr] : fdr_vs_called(table)) {
    out << called << ',' << format_double(fdr) << '\n';
  }
  return out.str();
}

}  // namespace costat
