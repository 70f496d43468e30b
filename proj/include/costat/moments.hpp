#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "costat/io_util.hpp"
#include "costat/parallel.hpp"
#include "costat/rng.hpp"

namespace costat {

// Mean and standard deviation of the sum of the k largest among m
// independent standard-normal draws, for k = 1..m. Estimated once by Monte
// Carlo and reused to standardize top-k partial sums.
struct MomentTable {
  int m = 0;
  std::vector<double> mu;     // mu[k-1] = E[top-k sum]
  std::vector<double> sigma;  // sigma[k-1] = sd of top-k sum, all > 0
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kDefaultMomentReplicates = 1000000;
inline constexpr std::uint64_t kDefaultMomentSeed = 20127;
inline constexpr std::uint64_t kMinMomentReplicates = 1000;

// Monte-Carlo estimate; bit-identical for fixed (m, replicates, seed)
// regardless of the worker count. Each replicate draws from its own stream
// and results accumulate per fixed-size chunk, combined in chunk order.
inline MomentTable estimate_moments(int m, std::uint64_t replicates, std::uint64_t seed,
                                    int workers = 1) {
  if (m < 1) throw std::invalid_argument("estimate_moments: m must be >= 1");
  if (replicates < kMinMomentReplicates) {
    throw std::invalid_argument("estimate_moments: replicates must be >= 1000");
  }
  const std::uint64_t stream_seed = salt_seed(seed, kMomentStreamTag);
  const auto mz = static_cast<std::size_t>(m);

  constexpr std::size_t kChunk = 8192;
  const std::size_t n_chunks = (replicates + kChunk - 1) / kChunk;
  struct Accum {
    std::vector<double> sum, sumsq;
  };
  std::vector<Accum> chunks(n_chunks);

  for_each_chunk(replicates, kChunk, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Accum acc;
    acc.sum.assign(mz, 0.0);
    acc.sumsq.assign(mz, 0.0);
    std::vector<double> draw(mz);
    for (std::size_t rep = begin; rep < end; ++rep) {
      StreamRng rng(stream_seed, rep);
      for (double& d : draw) d = rng.next_normal();
      std::sort(draw.begin(), draw.end(), std::greater<>());
      double partial = 0.0;
      for (std::size_t k = 0; k < mz; ++k) {
        partial += draw[k];
        acc.sum[k] += partial;
        acc.sumsq[k] += partial * partial;
      }
    }
    chunks[c] = std::move(acc);
  });

  std::vector<double> sum(mz, 0.0), sumsq(mz, 0.0);
  for (const Accum& acc : chunks) {
    for (std::size_t k = 0; k < mz; ++k) {
      sum[k] += acc.sum[k];
      sumsq[k] += acc.sumsq[k];
    }
  }

  MomentTable table;
  table.m = m;
  table.replicates = replicates;
  table.seed = seed;
  table.mu.resize(mz);
  table.sigma.resize(mz);
  const auto r = static_cast<double>(replicates);
  for (std::size_t k = 0; k < mz; ++k) {
    table.mu[k] = sum[k] / r;
    const double var = (sumsq[k] - sum[k] * sum[k] / r) / (r - 1.0);
    table.sigma[k] = std::sqrt(std::max(var, 0.0));
    if (!(table.sigma[k] > 0.0)) {
      throw std::runtime_error("estimate_moments: zero variance for k=" + std::to_string(k + 1));
    }
  }
  return table;
}

// Cache file: line 1 is `# m=<m> replicates=<R> seed=<S> version=1`,
// then one `k<TAB>mu<TAB>sigma` line per k with 17 significant digits.
inline std::string moment_table_text(const MomentTable& t) {
  std::ostringstream out;
  out << "# m=" << t.m << " replicates=" << t.replicates << " seed=" << t.seed << " version=1\n";
  for (int k = 1; k <= t.m; ++k) {
    out << k << '\t' << format_double17(t.mu[k - 1]) << '\t' << format_double17(t.sigma[k - 1])
        << '\n';
  }
  return out.str();
}

inline void write_moment_table(const MomentTable& t, const std::filesystem::path& path) {
  write_file_atomic(path, moment_table_text(t));
}

inline MomentTable read_moment_table(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("moment table: empty file");
  MomentTable t;
  int version = 0;
  unsigned long long replicates = 0, seed = 0;
  if (std::sscanf(header.c_str(), "# m=%d replicates=%llu seed=%llu version=%d", &t.m, &replicates,
                  &seed, &version) != 4 ||
      version != 1 || t.m < 1) {
    throw std::runtime_error("moment table: bad header in " + path.string());
  }
  t.replicates = replicates;
  t.seed = seed;
  t.mu.resize(static_cast<std::size_t>(t.m));
  t.sigma.resize(static_cast<std::size_t>(t.m));
  std::string line;
  for (int k = 1; k <= t.m; ++k) {
    if (!std::getline(in, line)) throw std::runtime_error("moment table: truncated " + path.string());
    std::istringstream row(line);
    int kk = 0;
    std::string mu_s, sigma_s;
    if (!(row >> kk >> mu_s >> sigma_s) || kk != k) {
      throw std::runtime_error("moment table: bad row " + std::to_string(k) + " in " + path.string());
    }
    const auto mu = parse_double(mu_s);
    const auto sigma = parse_double(sigma_s);
    if (!mu || !sigma || !(*sigma > 0.0)) {
      throw std::runtime_error("moment table: bad values at row " + std::to_string(k));
    }
    t.mu[k - 1] = *mu;
    t.sigma[k - 1] = *sigma;
  }
  return t;
}

inline std::filesystem::path moment_cache_path(const std::filesystem::path& dir, int m,
                                               std::uint64_t replicates, std::uint64_t seed) {
  return dir / ("moments_m" + std::to_string(m) + "_r" + std::to_string(replicates) + "_s" +
                std::to_string(seed) + ".tsv");
}

// Returns the cached table when one exists for exactly (m, replicates,
// seed); otherwise builds and persists it. A corrupt cache file triggers a
// rebuild, an unwritable directory falls back to in-memory; both warn on
// `diag` when given.
inline MomentTable load_or_build(int m, std::uint64_t replicates, std::uint64_t seed,
                                 const std::filesystem::path& cache_dir, int workers = 1,
                                 std::ostream* diag = nullptr) {
  namespace fs = std::filesystem;
  const fs::path path = moment_cache_path(cache_dir, m, replicates, seed);
  std::error_code ec;
  if (fs::exists(path, ec)) {
    try {
      MomentTable t = read_moment_table(path);
      if (t.m == m && t.replicates == replicates && t.seed == seed) {
        if (diag) *diag << "moment table cache hit: " << path.string() << "\n";
        return t;
      }
      if (diag) *diag << "warning: cache key mismatch in " << path.string() << ", rebuilding\n";
    } catch (const std::exception& e) {
      if (diag) *diag << "warning: corrupt moment cache (" << e.what() << "), rebuilding\n";
    }
  }
  MomentTable t = estimate_moments(m, replicates, seed, workers);
  try {
    fs::create_directories(cache_dir);
    write_moment_table(t, path);
  } catch (const std::exception& e) {
    if (diag) *diag << "warning: moment cache not writable (" << e.what()
                    << "), continuing in memory\n";
  }
  return t;
}

}  // namespace costat
