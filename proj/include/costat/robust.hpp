#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace costat {

// MAD consistency factor for the normal scale, 1 / Phi^-1(0.75).
inline constexpr double kMadScale = 1.4826;

namespace detail {

inline void require_nonempty(std::span<const double> v, const char* fn) {
  if (v.empty()) throw std::invalid_argument(std::string(fn) + ": empty input");
}

inline double sorted_median(const std::vector<double>& s) {
  const std::size_t n = s.size();
  const std::size_t mid = n / 2;
  return (n % 2 == 1) ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
}

// Linear interpolation at fractional rank h = (r/100) * (n-1).
inline double sorted_percentile(const std::vector<double>& s, double r) {
  const std::size_t n = s.size();
  if (n == 1) return s[0];
  const double h = (r / 100.0) * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo >= n - 1) return s[n - 1];
  const double frac = h - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

inline std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace detail

inline double median(std::span<const double> v) {
  detail::require_nonempty(v, "median");
  return detail::sorted_median(detail::sorted_copy(v));
}

// Median absolute deviation about `center`, times 1.4826 when scaled.
inline double mad(std::span<const double> v, double center, bool scaled = true) {
  detail::require_nonempty(v, "mad");
  std::vector<double> dev;
  dev.reserve(v.size());
  for (double x : v) dev.push_back(std::abs(x - center));
  std::sort(dev.begin(), dev.end());
  const double m = detail::sorted_median(dev);
  return scaled ? kMadScale * m : m;
}

inline double percentile(std::span<const double> v, double r) {
  detail::require_nonempty(v, "percentile");
  if (!(r >= 0.0 && r <= 100.0)) {
    throw std::invalid_argument("percentile: rank must be in [0, 100]");
  }
  return detail::sorted_percentile(detail::sorted_copy(v), r);
}

inline double iqr(std::span<const double> v) {
  detail::require_nonempty(v, "iqr");
  const std::vector<double> s = detail::sorted_copy(v);
  return detail::sorted_percentile(s, 75.0) - detail::sorted_percentile(s, 25.0);
}

inline double mean(std::span<const double> v) {
  detail::require_nonempty(v, "mean");
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

inline double pooled_sd(std::span<const double> x, std::span<const double> y) {
  detail::require_nonempty(x, "pooled_sd");
  detail::require_nonempty(y, "pooled_sd");
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  if (n + m < 3) throw std::invalid_argument("pooled_sd: needs n + m - 2 > 0");
  const double xbar = mean(x);
  const double ybar = mean(y);
  double ss = 0.0;
  for (double v : x) ss += (v - xbar) * (v - xbar);
  for (double v : y) ss += (v - ybar) * (v - ybar);
  return std::sqrt(ss / static_cast<double>(n + m - 2));
}

}  // namespace costat
