#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "costat/io_util.hpp"

namespace costat {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Step curve from sweeping a call threshold over the observed scores
// (a gene is called when score > threshold). Points start at (0,0), end at
// (1,1) and are non-decreasing in both coordinates; tied scores across
// classes appear as diagonal segments.
struct RocCurve {
  std::string statistic;
  std::vector<RocPoint> points;
  double auc = 0.0;
};

inline double trapezoid_auc(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += 0.5 * (points[i].tpr + points[i - 1].tpr) * (points[i].fpr - points[i - 1].fpr);
  }
  return area;
}

inline RocCurve build_roc(std::span<const double> de_scores, std::span<const double> null_scores,
                          std::string statistic = "") {
  if (de_scores.empty() || null_scores.empty()) {
    throw std::invalid_argument("build_roc: both score sets must be non-empty");
  }
  struct Entry {
    double score;
    bool is_de;
  };
  std::vector<Entry> entries;
  entries.reserve(de_scores.size() + null_scores.size());
  for (double s : de_scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("build_roc: non-finite score");
    entries.push_back({s, true});
  }
  for (double s : null_scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("build_roc: non-finite score");
    entries.push_back({s, false});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });

  RocCurve curve;
  curve.statistic = std::move(statistic);
  curve.points.push_back({0.0, 0.0});
  const double n_de = static_cast<double>(de_scores.size());
  const double n_null = static_cast<double>(null_scores.size());
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    while (j < entries.size() && entries[j].score == entries[i].score) {
      (entries[j].is_de ? tp : fp) += 1;
      ++j;
    }
    curve.points.push_back({static_cast<double>(fp) / n_null, static_cast<double>(tp) / n_de});
    i = j;
  }
  curve.auc = trapezoid_auc(curve.points);
  return curve;
}

// CSV of curve points: `statistic,fpr,tpr`, one row per point.
inline std::string roc_points_csv(std::span<const RocCurve> curves) {
  std::ostringstream out;
  out << "statistic,fpr,tpr\n";
  for (const RocCurve& c : curves) {
    for (const RocPoint& p : c.points) {
      out << c.statistic << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
    }
  }
  return out.str();
}

struct RocSummaryRow {
  std::string statistic;
  double auc = 0.0;
  int n_de = 0;
  int n_null = 0;
  int excluded = 0;
};

// Companion summary CSV: `statistic,auc,n_de,n_null,excluded`.
inline std::string roc_summary_csv(std::span<const RocSummaryRow> rows) {
  std::ostringstream out;
  out << "statistic,auc,n_de,n_null,excluded\n";
  for (const RocSummaryRow& r : rows) {
    out << r.statistic << ',' << format_double(r.auc) << ',' << r.n_de << ',' << r.n_null << ','
        << r.excluded << '\n';
  }
  return out.str();
}

}  // namespace costat
