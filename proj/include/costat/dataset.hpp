#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "costat/io_util.hpp"
#include "costat/robust.hpp"

namespace costat {

inline constexpr std::uint8_t kNormalLabel = 0;
inline constexpr std::uint8_t kCancerLabel = 1;

// Gene-by-sample expression matrix with a binary class label per sample.
// Rows are genes (row-major storage), columns are samples.
struct ExpressionDataset {
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_names;
  std::vector<std::uint8_t> labels;  // kNormalLabel / kCancerLabel per sample
  std::vector<double> values;        // gene_count() x sample_count(), row-major
  std::string source;
  std::vector<std::string> transforms;

  std::size_t gene_count() const { return gene_ids.size(); }
  std::size_t sample_count() const { return sample_names.size(); }

  std::span<const double> gene(std::size_t i) const {
    return {values.data() + i * sample_count(), sample_count()};
  }
  std::span<double> gene(std::size_t i) {
    return {values.data() + i * sample_count(), sample_count()};
  }

  std::size_t count_label(std::uint8_t label) const {
    std::size_t c = 0;
    for (std::uint8_t l : labels) c += (l == label);
    return c;
  }
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string::npos) pos = text.size();
    std::size_t end = pos;
    if (end > start && text[end - 1] == '\r') --end;
    lines.emplace_back(text.substr(start, end - start));
    start = pos + 1;
  }
  return lines;
}

inline bool is_label_row_marker(std::string_view cell) {
  std::string lower(cell);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower == "label" || lower == "labels" || lower == "class";
}

inline std::uint8_t parse_label_value(std::string_view cell, const std::string& where) {
  if (cell == "0") return kNormalLabel;
  if (cell == "1") return kCancerLabel;
  throw std::invalid_argument(where + ": label must be 0 (normal) or 1 (cancer), got \"" +
                              std::string(cell) + "\"");
}

}  // namespace detail

// Sidecar label file: one `sample_name<TAB>{0|1}` row per sample.
inline std::unordered_map<std::string, std::uint8_t> parse_label_file(
    const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw std::invalid_argument("label file not found: " + path.string());
  }
  const std::string text = read_file(path);
  std::unordered_map<std::string, std::uint8_t> labels;
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = detail::split_tabs(lines[i]);
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (fields.size() != 2) {
      throw std::invalid_argument(where + ": expected `sample<TAB>0|1`");
    }
    const std::string name(fields[0]);
    if (labels.count(name)) {
      throw std::invalid_argument(where + ": duplicate sample \"" + name + "\"");
    }
    labels[name] = detail::parse_label_value(fields[1], where);
  }
  if (labels.empty()) throw std::invalid_argument(path.string() + ": no labels found");
  return labels;
}

// Parses a tab-separated expression matrix: first row sample names, first
// column gene ids. Labels come from the sidecar map when given, otherwise
// from an inline second row whose first cell is `label`/`labels`/`class`.
inline ExpressionDataset parse_matrix(
    const std::filesystem::path& path,
    const std::optional<std::unordered_map<std::string, std::uint8_t>>& label_spec) {
  if (!std::filesystem::exists(path)) {
    throw std::invalid_argument("matrix file not found: " + path.string());
  }
  const std::string text = read_file(path);
  const auto lines = detail::split_lines(text);
  const std::string file = path.string();
  if (lines.empty()) throw std::invalid_argument(file + ": empty file");

  const auto header = detail::split_tabs(lines[0]);
  if (header.size() < 2) throw std::invalid_argument(file + ": header has no sample columns");

  ExpressionDataset d;
  d.source = file;
  d.sample_names.assign(header.begin() + 1, header.end());
  const std::size_t n_samples = d.sample_names.size();
  {
    std::unordered_set<std::string> seen;
    for (const std::string& s : d.sample_names) {
      if (s.empty()) throw std::invalid_argument(file + ": empty sample name in header");
      if (!seen.insert(s).second) {
        throw std::invalid_argument(file + ": duplicate sample name \"" + s + "\"");
      }
    }
  }

  std::size_t first_data_line = 1;
  std::optional<std::vector<std::uint8_t>> inline_labels;
  if (lines.size() > 1) {
    const auto second = detail::split_tabs(lines[1]);
    if (!second.empty() && detail::is_label_row_marker(second[0])) {
      if (second.size() != n_samples + 1) {
        throw std::invalid_argument(file + " line 2: label row has " +
                                    std::to_string(second.size() - 1) + " entries, expected " +
                                    std::to_string(n_samples));
      }
      std::vector<std::uint8_t> labels(n_samples);
      for (std::size_t j = 0; j < n_samples; ++j) {
        labels[j] = detail::parse_label_value(second[j + 1], file + " line 2");
      }
      inline_labels = std::move(labels);
      first_data_line = 2;
    }
  }

  std::unordered_set<std::string> seen_genes;
  for (std::size_t li = first_data_line; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto fields = detail::split_tabs(lines[li]);
    const std::size_t row = d.gene_ids.size() + 1;  // 1-based data row
    if (fields.size() != n_samples + 1) {
      throw std::invalid_argument(file + ": row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size() - 1) + " columns, expected " +
                                  std::to_string(n_samples));
    }
    std::string gene(fields[0]);
    if (gene.empty()) {
      throw std::invalid_argument(file + ": row " + std::to_string(row) + " has empty gene id");
    }
    if (!seen_genes.insert(gene).second) {
      throw std::invalid_argument(file + ": duplicate gene id \"" + gene + "\" at row " +
                                  std::to_string(row));
    }
    for (std::size_t j = 0; j < n_samples; ++j) {
      const auto v = parse_double(fields[j + 1]);
      if (!v || !std::isfinite(*v)) {
        throw std::invalid_argument(file + ": non-numeric cell \"" + std::string(fields[j + 1]) +
                                    "\" at row " + std::to_string(row) + ", column " +
                                    std::to_string(j + 1));
      }
      d.values.push_back(*v);
    }
    d.gene_ids.push_back(std::move(gene));
  }
  if (d.gene_ids.empty()) throw std::invalid_argument(file + ": no data rows");

  if (label_spec) {
    for (const auto& [name, _] : *label_spec) {
      bool known = false;
      for (const std::string& s : d.sample_names) known |= (s == name);
      if (!known) {
        throw std::invalid_argument(file + ": unknown sample \"" + name + "\" in label spec");
      }
    }
    d.labels.resize(n_samples);
    for (std::size_t j = 0; j < n_samples; ++j) {
      const auto it = label_spec->find(d.sample_names[j]);
      if (it == label_spec->end()) {
        throw std::invalid_argument(file + ": sample \"" + d.sample_names[j] +
                                    "\" missing from label spec");
      }
      d.labels[j] = it->second;
    }
  } else if (inline_labels) {
    d.labels = std::move(*inline_labels);
  } else {
    throw std::invalid_argument(file + ": no labels given (sidecar file or inline label row)");
  }

  if (d.count_label(kNormalLabel) == 0) {
    throw std::invalid_argument(file + ": class with zero samples: normal");
  }
  if (d.count_label(kCancerLabel) == 0) {
    throw std::invalid_argument(file + ": class with zero samples: cancer");
  }
  return d;
}

inline ExpressionDataset parse_matrix(const std::filesystem::path& path,
                                      const std::optional<std::filesystem::path>& labels_path) {
  std::optional<std::unordered_map<std::string, std::uint8_t>> spec;
  if (labels_path) spec = parse_label_file(*labels_path);
  return parse_matrix(path, spec);
}

// TSV serialization with an inline label row; numeric cells round-trip
// exactly through parse_matrix.
inline std::string serialize_matrix(const ExpressionDataset& d) {
  std::ostringstream out;
  out << "gene_id";
  for (const std::string& s : d.sample_names) out << '\t' << s;
  out << "\nlabels";
  for (std::uint8_t l : d.labels) out << '\t' << static_cast<int>(l);
  out << '\n';
  for (std::size_t i = 0; i < d.gene_count(); ++i) {
    out << d.gene_ids[i];
    for (double v : d.gene(i)) out << '\t' << format_double(v);
    out << '\n';
  }
  return out.str();
}

inline void write_matrix(const ExpressionDataset& d, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_matrix(d));
}

// Optional preprocessing: median-scale each sample column to the grand
// median, then log2 with a positive floor. Applied transforms are recorded
// in the dataset's provenance.
inline ExpressionDataset preprocess(ExpressionDataset d, bool normalize, bool log2,
                                    double floor = 1.0) {
  const std::size_t n_samples = d.sample_count();
  const std::size_t n_genes = d.gene_count();
  if (normalize) {
    std::vector<double> col(n_genes);
    std::vector<double> col_medians(n_samples);
    for (std::size_t j = 0; j < n_samples; ++j) {
      for (std::size_t i = 0; i < n_genes; ++i) col[i] = d.values[i * n_samples + j];
      col_medians[j] = median(col);
    }
    const double grand = median(col_medians);
    if (!(grand > 0.0)) {
      throw std::invalid_argument("preprocess: nonpositive grand median under normalize");
    }
    for (std::size_t j = 0; j < n_samples; ++j) {
      if (!(col_medians[j] > 0.0)) {
        throw std::invalid_argument("preprocess: nonpositive median in sample column " +
                                    std::to_string(j + 1));
      }
      const double factor = grand / col_medians[j];
      for (std::size_t i = 0; i < n_genes; ++i) d.values[i * n_samples + j] *= factor;
    }
    d.transforms.push_back("normalize(median-scale)");
  }
  if (log2) {
    if (!(floor > 0.0)) throw std::invalid_argument("preprocess: log2 floor must be > 0");
    for (double& v : d.values) v = std::log2(std::max(v, floor));
    d.transforms.push_back("log2(floor=" + format_double(floor) + ")");
  }
  return d;
}

}  // namespace costat
