#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "costat/dataset.hpp"
#include "costat/detectors.hpp"
#include "costat/parallel.hpp"
#include "costat/rng.hpp"

namespace costat {

// Two-class synthetic study: standard-normal expression with a constant
// shift mu added to k cancer samples of each differentially expressed gene.
struct SimConfig {
  int n = 20;        // normal samples
  int m = 20;        // cancer samples
  int k = 1;         // activated cancer samples, 1 <= k <= m
  double mu = 2.0;   // activation shift
  int n_de = 1000;   // differentially expressed genes
  int n_null = 1000; // null genes
  std::uint64_t seed = 0;
};

inline void validate(const SimConfig& c) {
  if (c.n < 1 || c.m < 1) throw std::invalid_argument("sim: sample counts must be positive");
  if (c.k < 1 || c.k > c.m) throw std::invalid_argument("sim: k must satisfy 1 <= k <= m");
  if (!std::isfinite(c.mu) || c.mu < 0.0) throw std::invalid_argument("sim: mu must be finite and >= 0");
  if (c.n_de < 1 || c.n_null < 1) throw std::invalid_argument("sim: gene counts must be positive");
}

struct SimulatedDataset {
  ExpressionDataset data;
  std::vector<std::uint8_t> de_mask;  // 1 for the first n_de genes
};

// Deterministic in the seed; each gene row draws from its own stream, so
// appending genes never perturbs existing rows. DE genes come first and get
// mu added to the first k cancer columns.
inline SimulatedDataset generate_dataset(const SimConfig& c, int workers = 1) {
  validate(c);
  const std::uint64_t stream_seed = salt_seed(c.seed, kSimStreamTag);
  const std::size_t n_genes = static_cast<std::size_t>(c.n_de) + static_cast<std::size_t>(c.n_null);
  const std::size_t n_samples = static_cast<std::size_t>(c.n) + static_cast<std::size_t>(c.m);

  SimulatedDataset sim;
  ExpressionDataset& d = sim.data;
  d.source = "simulated";
  d.values.resize(n_genes * n_samples);
  d.gene_ids.reserve(n_genes);
  for (int i = 0; i < c.n_de; ++i) d.gene_ids.push_back("DE_" + std::to_string(i + 1));
  for (int i = 0; i < c.n_null; ++i) d.gene_ids.push_back("NULL_" + std::to_string(i + 1));
  d.sample_names.reserve(n_samples);
  for (int j = 0; j < c.n; ++j) d.sample_names.push_back("N" + std::to_string(j + 1));
  for (int j = 0; j < c.m; ++j) d.sample_names.push_back("C" + std::to_string(j + 1));
  d.labels.assign(n_samples, kNormalLabel);
  for (std::size_t j = static_cast<std::size_t>(c.n); j < n_samples; ++j) d.labels[j] = kCancerLabel;

  sim.de_mask.assign(n_genes, 0);
  for (int i = 0; i < c.n_de; ++i) sim.de_mask[static_cast<std::size_t>(i)] = 1;

  for_each_chunk(n_genes, 512, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      StreamRng rng(stream_seed, i);
      double* row = d.values.data() + i * n_samples;
      for (std::size_t j = 0; j < n_samples; ++j) row[j] = rng.next_normal();
      if (sim.de_mask[i]) {
        for (int j = 0; j < c.k; ++j) row[static_cast<std::size_t>(c.n + j)] += c.mu;
      }
    }
  });
  return sim;
}

// Scores of one statistic on the simulated genes, split by the DE mask.
// Degenerate genes are counted and excluded.
struct LabeledScores {
  Statistic statistic = Statistic::T;
  std::vector<double> de_scores;
  std::vector<double> null_scores;
  int excluded = 0;
};

inline std::map<Statistic, LabeledScores> run_study(const SimConfig& c,
                                                    std::span<const Statistic> stats,
                                                    const StatContext& ctx, int workers = 1) {
  const SimulatedDataset sim = generate_dataset(c, workers);
  const ExpressionDataset& d = sim.data;
  std::map<Statistic, LabeledScores> out;
  for (Statistic s : stats) {
    const std::vector<double> scores =
        score_genes(d.values, d.gene_count(), d.sample_count(), d.labels, s, ctx, workers);
    LabeledScores ls;
    ls.statistic = s;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (std::isnan(scores[i])) {
        ++ls.excluded;
        continue;
      }
      (sim.de_mask[i] ? ls.de_scores : ls.null_scores).push_back(scores[i]);
    }
    out.emplace(s, std::move(ls));
  }
  return out;
}

}  // namespace costat
