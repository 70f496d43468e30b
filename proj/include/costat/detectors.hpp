#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "costat/dataset.hpp"
#include "costat/moments.hpp"
#include "costat/parallel.hpp"
#include "costat/robust.hpp"

namespace costat {

// The five per-gene statistics. All are oriented so that larger values mean
// higher expression in the cancer class.
enum class Statistic : int { T = 0, Copa = 1, Os = 2, Ort = 3, Most = 4 };

inline constexpr int kStatisticCount = 5;
inline constexpr std::array<Statistic, kStatisticCount> kAllStatistics = {
    Statistic::T, Statistic::Copa, Statistic::Os, Statistic::Ort, Statistic::Most};

inline std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::T: return "T";
    case Statistic::Copa: return "COPA";
    case Statistic::Os: return "OS";
    case Statistic::Ort: return "ORT";
    case Statistic::Most: return "MOST";
  }
  return "?";
}

inline std::optional<Statistic> parse_statistic(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Statistic s : kAllStatistics) {
    if (upper == to_string(s)) return s;
  }
  return std::nullopt;
}

// One gene's expression values split by class: x = normal, y = cancer.
struct GenePair {
  std::span<const double> normal;
  std::span<const double> cancer;
};

namespace detail {

struct PooledLocation {
  double median = 0.0;
  double mad = 0.0;  // scaled by 1.4826
};

inline PooledLocation pooled_location(GenePair g) {
  std::vector<double> pooled;
  pooled.reserve(g.normal.size() + g.cancer.size());
  pooled.insert(pooled.end(), g.normal.begin(), g.normal.end());
  pooled.insert(pooled.end(), g.cancer.begin(), g.cancer.end());
  std::sort(pooled.begin(), pooled.end());
  PooledLocation loc;
  loc.median = sorted_median(pooled);
  for (double& v : pooled) v = std::abs(v - loc.median);
  std::sort(pooled.begin(), pooled.end());
  loc.mad = kMadScale * sorted_median(pooled);
  return loc;
}

// Scaled median of the deviations |x - med_x| pooled with |y - med_y|; the
// denominator shared by ORT and MOST.
inline double split_center_scale(GenePair g, double med_x, double med_y) {
  std::vector<double> dev;
  dev.reserve(g.normal.size() + g.cancer.size());
  for (double v : g.normal) dev.push_back(std::abs(v - med_x));
  for (double v : g.cancer) dev.push_back(std::abs(v - med_y));
  std::sort(dev.begin(), dev.end());
  return kMadScale * sorted_median(dev);
}

}  // namespace detail

// Two-sample t statistic without the sample-size factor, (ybar - xbar) / s.
inline std::optional<double> t_stat(GenePair g) {
  if (g.normal.size() < 2 || g.cancer.size() < 2) {
    throw std::invalid_argument("t_stat: needs at least 2 samples per class");
  }
  const double sd = pooled_sd(g.normal, g.cancer);
  if (sd == 0.0) return std::nullopt;
  return (mean(g.cancer) - mean(g.normal)) / sd;
}

// COPA: r-th percentile of the cancer samples, centered at the pooled
// median and scaled by the pooled MAD.
inline std::optional<double> copa_stat(GenePair g, double r = 90.0) {
  if (g.cancer.empty()) throw std::invalid_argument("copa_stat: cancer class empty");
  if (g.normal.size() + g.cancer.size() < 2) {
    throw std::invalid_argument("copa_stat: needs at least 2 samples");
  }
  const auto loc = detail::pooled_location(g);
  if (loc.mad == 0.0) return std::nullopt;
  return (percentile(g.cancer, r) - loc.median) / loc.mad;
}

// Outlier sum: cancer values above q75 + IQR of the pooled samples, summed
// as deviations from the pooled median and scaled by the pooled MAD.
inline std::optional<double> os_stat(GenePair g) {
  if (g.cancer.empty()) throw std::invalid_argument("os_stat: cancer class empty");
  if (g.normal.size() + g.cancer.size() < 2) {
    throw std::invalid_argument("os_stat: needs at least 2 samples");
  }
  std::vector<double> pooled;
  pooled.reserve(g.normal.size() + g.cancer.size());
  pooled.insert(pooled.end(), g.normal.begin(), g.normal.end());
  pooled.insert(pooled.end(), g.cancer.begin(), g.cancer.end());
  std::sort(pooled.begin(), pooled.end());
  const double threshold =
      2.0 * detail::sorted_percentile(pooled, 75.0) - detail::sorted_percentile(pooled, 25.0);
  const auto loc = detail::pooled_location(g);
  if (loc.mad == 0.0) return std::nullopt;
  double sum = 0.0;
  for (double v : g.cancer) {
    if (v > threshold) sum += v - loc.median;
  }
  return sum / loc.mad;
}

// Outlier robust t: outliers and centering defined from the normal class
// only; scale from deviations about the per-class medians.
inline std::optional<double> ort_stat(GenePair g) {
  if (g.normal.size() < 2) throw std::invalid_argument("ort_stat: needs at least 2 normal samples");
  if (g.cancer.empty()) throw std::invalid_argument("ort_stat: cancer class empty");
  const std::vector<double> xs = detail::sorted_copy(g.normal);
  const double q75 = detail::sorted_percentile(xs, 75.0);
  const double threshold = 2.0 * q75 - detail::sorted_percentile(xs, 25.0);
  const double med_x = detail::sorted_median(xs);
  const double med_y = median(g.cancer);
  const double scale = detail::split_center_scale(g, med_x, med_y);
  if (scale == 0.0) return std::nullopt;
  double sum = 0.0;
  for (double v : g.cancer) {
    if (v > threshold) sum += v - med_x;
  }
  return sum / scale;
}

struct MostScore {
  double value = 0.0;
  int k_hat = 0;  // maximizing outlier count; smallest k on exact ties
};

// Maximum over k of the standardized top-k partial-sum statistics. The
// partial sums of descending cancer values (centered at the normal median,
// scaled like ORT) are standardized by the moment table for group size m.
inline std::optional<MostScore> most_stat(GenePair g, const MomentTable& moments) {
  const auto m = static_cast<int>(g.cancer.size());
  if (g.normal.size() < 2) {
    throw std::invalid_argument("most_stat: needs at least 2 normal samples");
  }
  if (m < 1) throw std::invalid_argument("most_stat: cancer class empty");
  if (moments.m != m) {
    throw std::invalid_argument("most_stat: moment table built for m=" + std::to_string(moments.m) +
                                ", dataset has m=" + std::to_string(m));
  }
  const double med_x = median(g.normal);
  const double med_y = median(g.cancer);
  const double scale = detail::split_center_scale(g, med_x, med_y);
  if (scale == 0.0) return std::nullopt;

  std::vector<double> y(g.cancer.begin(), g.cancer.end());
  std::sort(y.begin(), y.end(), std::greater<>());
  MostScore best;
  best.value = -std::numeric_limits<double>::infinity();
  double partial = 0.0;
  for (int k = 1; k <= m; ++k) {
    partial += y[k - 1] - med_x;
    const double z = (partial / scale - moments.mu[k - 1]) / moments.sigma[k - 1];
    if (z > best.value) {
      best.value = z;
      best.k_hat = k;
    }
  }
  return best;
}

// Shared scoring configuration: COPA percentile and the moment table
// (required whenever MOST is scored).
struct StatContext {
  double copa_percentile = 90.0;
  const MomentTable* moments = nullptr;
};

// Per-gene results for a set of requested statistics. A degenerate flag
// marks a zero denominator; such genes carry no value for that statistic
// and are excluded from downstream rankings.
struct GeneScores {
  std::string gene_id;
  std::array<std::optional<double>, kStatisticCount> values;
  std::array<bool, kStatisticCount> degenerate{};
  std::optional<int> k_hat;

  std::optional<double> value(Statistic s) const { return values[static_cast<int>(s)]; }
  bool is_degenerate(Statistic s) const { return degenerate[static_cast<int>(s)]; }
};

namespace detail {

// Column indices per class, in dataset order.
struct ClassIndex {
  std::vector<std::size_t> normal, cancer;
};

inline ClassIndex split_by_label(std::span<const std::uint8_t> labels) {
  ClassIndex idx;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    (labels[j] == kCancerLabel ? idx.cancer : idx.normal).push_back(j);
  }
  return idx;
}

inline void gather(std::span<const double> row, const std::vector<std::size_t>& cols,
                   std::vector<double>& out) {
  out.clear();
  for (std::size_t j : cols) out.push_back(row[j]);
}

inline void check_preconditions(std::span<const Statistic> stats, std::size_t n, std::size_t m,
                                const StatContext& ctx) {
  for (Statistic s : stats) {
    switch (s) {
      case Statistic::T:
        if (n < 2 || m < 2) throw std::invalid_argument("T needs at least 2 samples per class");
        break;
      case Statistic::Copa:
        if (m < 1 || n + m < 2) throw std::invalid_argument("COPA needs m >= 1 and n + m >= 2");
        if (!(ctx.copa_percentile >= 0.0 && ctx.copa_percentile <= 100.0)) {
          throw std::invalid_argument("COPA percentile must be in [0, 100]");
        }
        break;
      case Statistic::Os:
        if (m < 1 || n + m < 2) throw std::invalid_argument("OS needs m >= 1 and n + m >= 2");
        break;
      case Statistic::Ort:
        if (n < 2 || m < 1) throw std::invalid_argument("ORT needs n >= 2 and m >= 1");
        break;
      case Statistic::Most:
        if (n < 2 || m < 1) throw std::invalid_argument("MOST needs n >= 2 and m >= 1");
        if (ctx.moments == nullptr) throw std::invalid_argument("MOST needs a moment table");
        if (ctx.moments->m != static_cast<int>(m)) {
          throw std::invalid_argument("moment table size does not match cancer group size");
        }
        break;
    }
  }
}

}  // namespace detail

// Scores every gene with every requested statistic, preserving gene order.
// Per-gene degeneracy is recorded, never aborts the run; output does not
// depend on the worker count.
inline std::vector<GeneScores> score_all(const ExpressionDataset& d,
                                         std::span<const Statistic> stats, const StatContext& ctx,
                                         int workers = 1) {
  const auto idx = detail::split_by_label(d.labels);
  detail::check_preconditions(stats, idx.normal.size(), idx.cancer.size(), ctx);

  std::vector<GeneScores> out(d.gene_count());
  for_each_chunk(d.gene_count(), 256, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> x, y;
    x.reserve(idx.normal.size());
    y.reserve(idx.cancer.size());
    for (std::size_t i = begin; i < end; ++i) {
      detail::gather(d.gene(i), idx.normal, x);
      detail::gather(d.gene(i), idx.cancer, y);
      const GenePair g{x, y};
      GeneScores& r = out[i];
      r.gene_id = d.gene_ids[i];
      for (Statistic s : stats) {
        const int si = static_cast<int>(s);
        std::optional<double> v;
        switch (s) {
          case Statistic::T: v = t_stat(g); break;
          case Statistic::Copa: v = copa_stat(g, ctx.copa_percentile); break;
          case Statistic::Os: v = os_stat(g); break;
          case Statistic::Ort: v = ort_stat(g); break;
          case Statistic::Most: {
            const auto ms = most_stat(g, *ctx.moments);
            if (ms) {
              v = ms->value;
              r.k_hat = ms->k_hat;
            }
            break;
          }
        }
        r.values[si] = v;
        r.degenerate[si] = !v.has_value();
      }
    }
  });
  return out;
}

// Bulk single-statistic scorer used by the simulation and permutation
// paths; NaN marks degenerate genes.
inline std::vector<double> score_genes(std::span<const double> matrix, std::size_t n_genes,
                                       std::size_t n_samples, std::span<const std::uint8_t> labels,
                                       Statistic stat, const StatContext& ctx, int workers = 1) {
  const auto idx = detail::split_by_label(labels);
  detail::check_preconditions({&stat, 1}, idx.normal.size(), idx.cancer.size(), ctx);
  std::vector<double> scores(n_genes);
  for_each_chunk(n_genes, 256, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> x, y;
    x.reserve(idx.normal.size());
    y.reserve(idx.cancer.size());
    for (std::size_t i = begin; i < end; ++i) {
      const std::span<const double> row{matrix.data() + i * n_samples, n_samples};
      detail::gather(row, idx.normal, x);
      detail::gather(row, idx.cancer, y);
      const GenePair g{x, y};
      std::optional<double> v;
      switch (stat) {
        case Statistic::T: v = t_stat(g); break;
        case Statistic::Copa: v = copa_stat(g, ctx.copa_percentile); break;
        case Statistic::Os: v = os_stat(g); break;
        case Statistic::Ort: v = ort_stat(g); break;
        case Statistic::Most: {
          const auto ms = most_stat(g, *ctx.moments);
          if (ms) v = ms->value;
          break;
        }
      }
      scores[i] = v ? *v : std::numeric_limits<double>::quiet_NaN();
    }
  });
  return scores;
}

}  // namespace costat
