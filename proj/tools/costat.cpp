// Command-line front end: per-gene scoring of expression matrices, the
// synthetic ROC study, permutation FDR curves, and moment-table building.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "costat/dataset.hpp"
#include "costat/detectors.hpp"
#include "costat/fdr.hpp"
#include "costat/io_util.hpp"
#include "costat/moments.hpp"
#include "costat/roc.hpp"
#include "costat/simulate.hpp"
#include "costat/svg.hpp"
#include "costat/version.hpp"

namespace fs = std::filesystem;
using namespace costat;

namespace {

std::vector<Statistic> parse_stats_list(const std::string& csv) {
  std::vector<Statistic> stats;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    const auto s = parse_statistic(token);
    if (!s) throw std::invalid_argument("unknown statistic \"" + token + "\"");
    if (std::find(stats.begin(), stats.end(), *s) == stats.end()) stats.push_back(*s);
  }
  if (stats.empty()) throw std::invalid_argument("--stats selected no statistics");
  return stats;
}

struct MomentFlags {
  std::string cache_dir;
  std::uint64_t replicates = kDefaultMomentReplicates;
  std::uint64_t seed = kDefaultMomentSeed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--moments-cache", cache_dir, "Directory for cached moment tables");
    cmd->add_option("--moment-replicates", replicates, "Monte-Carlo replicates for moment tables");
    cmd->add_option("--moment-seed", seed, "Seed for moment tables");
  }

  MomentTable get(int m, int workers) const {
    if (!cache_dir.empty()) return load_or_build(m, replicates, seed, cache_dir, workers, &std::cerr);
    std::cerr << "note: no --moments-cache given, building moment table in memory\n";
    return estimate_moments(m, replicates, seed, workers);
  }
};

struct PreprocessFlags {
  bool normalize = false;
  bool log2 = false;
  double log_floor = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_flag("--normalize", normalize, "Median-scale each sample column to the grand median");
    cmd->add_flag("--log2", log2, "Replace values by log2(max(value, floor))");
    cmd->add_option("--log-floor", log_floor, "Floor applied before log2")->capture_default_str();
  }

  ExpressionDataset apply(ExpressionDataset d) const {
    if (normalize || log2) d = preprocess(std::move(d), normalize, log2, log_floor);
    return d;
  }
};

std::string stats_names(const std::vector<Statistic>& stats) {
  std::string names;
  for (Statistic s : stats) {
    if (!names.empty()) names += ',';
    names += to_string(s);
  }
  return names;
}

// One reproducibility line per run on the diagnostics stream.
void repro_line(const std::string& detail) {
  std::cerr << "# costat " << kVersionString << " " << detail << "\n";
}

fs::path with_suffix(const fs::path& path, const std::string& suffix, const std::string& ext) {
  fs::path out = path.parent_path() / path.stem();
  out += suffix;
  out += ext;
  return out;
}

// ---------------------------------------------------------------- score --

struct ScoreArgs {
  std::string input, labels, out;
  std::string stats_csv = "T,COPA,OS,ORT,MOST";
  double copa_r = 90.0;
  int workers = 1;
  MomentFlags moments;
  PreprocessFlags pre;
};

std::string score_table_csv(const std::vector<GeneScores>& scores,
                            const std::vector<Statistic>& stats) {
  std::ostringstream out;
  out << "gene_id";
  for (Statistic s : stats) out << ',' << to_string(s);
  out << ",k_hat,degenerate_flags\n";
  for (const GeneScores& g : scores) {
    out << g.gene_id;
    for (Statistic s : stats) {
      out << ',';
      if (const auto v = g.value(s)) out << format_double(*v);
    }
    out << ',';
    if (g.k_hat) out << *g.k_hat;
    out << ',';
    bool first = true;
    for (Statistic s : stats) {
      if (!g.is_degenerate(s)) continue;
      if (!first) out << ';';
      out << to_string(s);
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

int run_score(const ScoreArgs& a) {
  const std::vector<Statistic> stats = parse_stats_list(a.stats_csv);
  repro_line("score input=" + a.input + " stats=" + stats_names(stats) +
             " copa-r=" + format_double(a.copa_r) +
             " moment-replicates=" + std::to_string(a.moments.replicates) +
             " moment-seed=" + std::to_string(a.moments.seed) +
             " workers=" + std::to_string(a.workers));

  ExpressionDataset d = parse_matrix(fs::path(a.input),
                                     a.labels.empty() ? std::optional<fs::path>{}
                                                      : std::optional<fs::path>{a.labels});
  d = a.pre.apply(std::move(d));

  StatContext ctx;
  ctx.copa_percentile = a.copa_r;
  MomentTable table;
  if (std::find(stats.begin(), stats.end(), Statistic::Most) != stats.end()) {
    table = a.moments.get(static_cast<int>(d.count_label(kCancerLabel)), a.workers);
    ctx.moments = &table;
  }

  std::vector<GeneScores> scores = score_all(d, stats, ctx, a.workers);
  const Statistic sort_key = stats.front();
  std::stable_sort(scores.begin(), scores.end(), [&](const GeneScores& l, const GeneScores& r) {
    const auto lv = l.value(sort_key);
    const auto rv = r.value(sort_key);
    if (lv && rv) return *lv > *rv;
    return lv.has_value() && !rv.has_value();  // degenerate genes last
  });

  write_file_atomic(a.out, score_table_csv(scores, stats));
  std::cerr << "wrote " << a.out << " (" << scores.size() << " genes)\n";
  return 0;
}

// ------------------------------------------------------------- simulate --

struct SimulateArgs {
  SimConfig config;
  std::string stats_csv = "T,COPA,OS,ORT,MOST";
  double copa_r = 90.0;
  std::string out_dir = ".";
  std::string grid_file;
  bool svg = false;
  int workers = 1;
  MomentFlags moments;
};

std::vector<std::pair<double, int>> parse_grid(const fs::path& path) {
  std::vector<std::pair<double, int>> cells;
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double mu = 0.0;
    int k = 0;
    if (!(row >> mu >> k)) {
      throw std::invalid_argument(path.string() + " line " + std::to_string(line_no) +
                                  ": expected `mu k`");
    }
    cells.emplace_back(mu, k);
  }
  if (cells.empty()) throw std::invalid_argument(path.string() + ": empty grid");
  return cells;
}

void run_simulate_cell(const SimulateArgs& a, const std::vector<Statistic>& stats,
                       const StatContext& ctx, double mu, int k) {
  SimConfig c = a.config;
  c.mu = mu;
  c.k = k;
  validate(c);
  const auto results = run_study(c, stats, ctx, a.workers);

  std::vector<RocCurve> curves;
  std::vector<RocSummaryRow> summary;
  std::vector<SvgSeries> series;
  for (Statistic s : stats) {
    const LabeledScores& ls = results.at(s);
    RocCurve curve = build_roc(ls.de_scores, ls.null_scores, std::string(to_string(s)));
    summary.push_back({curve.statistic, curve.auc, static_cast<int>(ls.de_scores.size()),
                       static_cast<int>(ls.null_scores.size()), ls.excluded});
    if (a.svg) {
      SvgSeries sv;
      sv.label = curve.statistic;
      for (const RocPoint& p : curve.points) sv.points.emplace_back(p.fpr, p.tpr);
      series.push_back(std::move(sv));
    }
    curves.push_back(std::move(curve));
  }

  const std::string suffix = "_mu" + format_double(mu) + "_k" + std::to_string(k);
  const fs::path dir(a.out_dir);
  write_file_atomic(dir / ("roc" + suffix + ".csv"), roc_points_csv(curves));
  write_file_atomic(dir / ("auc" + suffix + ".csv"), roc_summary_csv(summary));
  if (a.svg) {
    write_file_atomic(dir / ("roc" + suffix + ".svg"),
                      line_chart_svg("false positive rate", "true positive rate", series, 1.0, 1.0,
                                     /*diagonal=*/true));
  }
  std::cerr << "wrote ROC outputs for mu=" << format_double(mu) << " k=" << k << " in " << a.out_dir
            << "\n";
}

int run_simulate(const SimulateArgs& a) {
  const std::vector<Statistic> stats = parse_stats_list(a.stats_csv);
  repro_line("simulate n=" + std::to_string(a.config.n) + " m=" + std::to_string(a.config.m) +
             " seed=" + std::to_string(a.config.seed) + " n-de=" + std::to_string(a.config.n_de) +
             " n-null=" + std::to_string(a.config.n_null) + " stats=" + stats_names(stats) +
             " copa-r=" + format_double(a.copa_r) +
             " moment-replicates=" + std::to_string(a.moments.replicates) +
             " moment-seed=" + std::to_string(a.moments.seed) +
             " workers=" + std::to_string(a.workers));

  std::vector<std::pair<double, int>> cells;
  if (!a.grid_file.empty()) {
    cells = parse_grid(a.grid_file);
  } else {
    cells.emplace_back(a.config.mu, a.config.k);
  }
  for (const auto& [mu, k] : cells) {
    SimConfig c = a.config;
    c.mu = mu;
    c.k = k;
    validate(c);
  }

  StatContext ctx;
  ctx.copa_percentile = a.copa_r;
  MomentTable table;
  if (std::find(stats.begin(), stats.end(), Statistic::Most) != stats.end()) {
    table = a.moments.get(a.config.m, a.workers);
    ctx.moments = &table;
  }

  fs::create_directories(a.out_dir);
  for (const auto& [mu, k] : cells) run_simulate_cell(a, stats, ctx, mu, k);
  return 0;
}

// ------------------------------------------------------------------ fdr --

struct FdrArgs {
  std::string input, labels, out;
  std::string stat_name = "MOST";
  int permutations = 200;
  std::uint64_t seed = 0;
  double copa_r = 90.0;
  FdrOptions options;
  bool svg = false;
  int workers = 1;
  MomentFlags moments;
  PreprocessFlags pre;
};

int run_fdr(const FdrArgs& a) {
  const auto stat = parse_statistic(a.stat_name);
  if (!stat) throw std::invalid_argument("unknown statistic \"" + a.stat_name + "\"");
  if (a.permutations < 1) throw std::invalid_argument("--permutations must be >= 1");
  repro_line("fdr input=" + a.input + " stat=" + std::string(to_string(*stat)) +
             " permutations=" + std::to_string(a.permutations) + " seed=" + std::to_string(a.seed) +
             " pi0=" + format_double(a.options.pi0) +
             " counts=" + std::string(a.options.median_counts ? "median" : "mean") +
             " moment-replicates=" + std::to_string(a.moments.replicates) +
             " moment-seed=" + std::to_string(a.moments.seed) +
             " workers=" + std::to_string(a.workers));

  ExpressionDataset d = parse_matrix(fs::path(a.input),
                                     a.labels.empty() ? std::optional<fs::path>{}
                                                      : std::optional<fs::path>{a.labels});
  d = a.pre.apply(std::move(d));

  StatContext ctx;
  ctx.copa_percentile = a.copa_r;
  MomentTable table;
  if (*stat == Statistic::Most) {
    table = a.moments.get(static_cast<int>(d.count_label(kCancerLabel)), a.workers);
    ctx.moments = &table;
  }

  const FdrTable result = fdr_curve(d, *stat, a.permutations, a.seed, ctx, a.options, a.workers);
  const fs::path out_path(a.out);
  write_file_atomic(out_path, fdr_csv(result));
  write_file_atomic(with_suffix(out_path, "_called", ".csv"), fdr_called_csv(result));
  if (a.svg) {
    const auto points = fdr_vs_called(result);
    double max_called = 1.0;
    for (const auto& [called, _] : points) max_called = std::max(max_called, double(called));
    SvgSeries series;
    series.label = to_string(*stat);
    for (const auto& [called, fdr] : points) series.points.emplace_back(called, fdr);
    write_file_atomic(with_suffix(out_path, "_called", ".svg"),
                      line_chart_svg("genes called significant", "estimated FDR", {&series, 1},
                                     max_called, 1.0));
  }
  std::cerr << "wrote " << a.out << " (" << result.rows.size() << " thresholds, "
            << result.excluded_observed << " degenerate genes excluded)\n";
  return 0;
}

// -------------------------------------------------------------- moments --

struct MomentsArgs {
  int m = 0;
  std::uint64_t replicates = kDefaultMomentReplicates;
  std::uint64_t seed = kDefaultMomentSeed;
  std::string cache_dir;
  int workers = 1;
};

int run_moments(const MomentsArgs& a) {
  repro_line("moments m=" + std::to_string(a.m) + " replicates=" + std::to_string(a.replicates) +
             " seed=" + std::to_string(a.seed) + " workers=" + std::to_string(a.workers));
  const MomentTable table =
      a.cache_dir.empty() ? estimate_moments(a.m, a.replicates, a.seed, a.workers)
                          : load_or_build(a.m, a.replicates, a.seed, a.cache_dir, a.workers,
                                          &std::cerr);
  std::cout << moment_table_text(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cancer outlier differential expression statistics"};
  app.set_version_flag("--version", kVersionString);
  app.require_subcommand(1);

  ScoreArgs score;
  CLI::App* score_cmd = app.add_subcommand("score", "Score a dataset gene by gene");
  score_cmd->add_option("--input", score.input, "Expression matrix TSV")->required();
  score_cmd->add_option("--labels", score.labels, "Sidecar label file (sample<TAB>0|1)");
  score_cmd->add_option("--stats", score.stats_csv, "Comma-separated statistics")
      ->capture_default_str();
  score_cmd->add_option("--copa-r", score.copa_r, "COPA percentile")->capture_default_str();
  score_cmd->add_option("--out", score.out, "Output CSV path")->required();
  score_cmd->add_option("--workers", score.workers, "Worker threads")->capture_default_str();
  score.moments.attach(score_cmd);
  score.pre.attach(score_cmd);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run the synthetic ROC study");
  sim_cmd->add_option("--n", sim.config.n, "Normal samples")->capture_default_str();
  sim_cmd->add_option("--m", sim.config.m, "Cancer samples")->capture_default_str();
  sim_cmd->add_option("--k", sim.config.k, "Activated cancer samples")->capture_default_str();
  sim_cmd->add_option("--mu", sim.config.mu, "Activation shift")->capture_default_str();
  sim_cmd->add_option("--n-de", sim.config.n_de, "DE gene count")->capture_default_str();
  sim_cmd->add_option("--n-null", sim.config.n_null, "Null gene count")->capture_default_str();
  sim_cmd->add_option("--seed", sim.config.seed, "Simulation seed")->capture_default_str();
  sim_cmd->add_option("--stats", sim.stats_csv, "Comma-separated statistics")
      ->capture_default_str();
  sim_cmd->add_option("--copa-r", sim.copa_r, "COPA percentile")->capture_default_str();
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  sim_cmd->add_option("--grid", sim.grid_file, "Grid file of `mu k` rows to sweep");
  sim_cmd->add_flag("--svg", sim.svg, "Also write SVG ROC plots");
  sim_cmd->add_option("--workers", sim.workers, "Worker threads")->capture_default_str();
  sim.moments.attach(sim_cmd);

  FdrArgs fdr;
  CLI::App* fdr_cmd = app.add_subcommand("fdr", "Permutation FDR for one statistic");
  fdr_cmd->add_option("--input", fdr.input, "Expression matrix TSV")->required();
  fdr_cmd->add_option("--labels", fdr.labels, "Sidecar label file (sample<TAB>0|1)");
  fdr_cmd->add_option("--stat", fdr.stat_name, "Statistic")->capture_default_str();
  fdr_cmd->add_option("--permutations", fdr.permutations, "Label permutations")
      ->capture_default_str();
  fdr_cmd->add_option("--seed", fdr.seed, "Permutation seed")->capture_default_str();
  fdr_cmd->add_option("--copa-r", fdr.copa_r, "COPA percentile")->capture_default_str();
  fdr_cmd->add_option("--pi0", fdr.options.pi0, "Assumed null proportion")->capture_default_str();
  fdr_cmd->add_flag("--median-counts", fdr.options.median_counts,
                    "Median instead of mean of permutation false-call counts");
  fdr_cmd->add_option("--out", fdr.out, "Output CSV path")->required();
  fdr_cmd->add_flag("--svg", fdr.svg, "Also write an SVG of FDR vs genes called");
  fdr_cmd->add_option("--workers", fdr.workers, "Worker threads")->capture_default_str();
  fdr.moments.attach(fdr_cmd);
  fdr.pre.attach(fdr_cmd);

  MomentsArgs moments;
  CLI::App* moments_cmd = app.add_subcommand("moments", "Build or load a moment table");
  moments_cmd->add_option("--m", moments.m, "Cancer group size")->required();
  moments_cmd->add_option("--replicates", moments.replicates, "Monte-Carlo replicates")
      ->capture_default_str();
  moments_cmd->add_option("--seed", moments.seed, "Seed")->capture_default_str();
  moments_cmd->add_option("--cache-dir", moments.cache_dir, "Cache directory");
  moments_cmd->add_option("--workers", moments.workers, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {  // --help / --version
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (score_cmd->parsed()) return run_score(score);
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (fdr_cmd->parsed()) return run_fdr(fdr);
    if (moments_cmd->parsed()) return run_moments(moments);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
