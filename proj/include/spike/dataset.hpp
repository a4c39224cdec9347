#pragma once

#include "spike/common.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace spike {

enum class Orientation { samples_as_rows, features_as_rows };

/// A labelled two-class data set, feature-major: one column per sample.
struct DatasetTable {
  Matrix features;  // p x N
  std::vector<int> labels;  // N entries, each 1 or 2
  std::vector<std::string> feature_names;
  std::vector<std::string> sample_names;
  std::string label_name;

  Eigen::Index p() const { return features.rows(); }
  Eigen::Index n() const { return features.cols(); }

  /// Columns of one class, in file order.
  Matrix class_matrix(int label) const {
    const Eigen::Index count = std::count(labels.begin(), labels.end(), label);
    Matrix out(features.rows(), count);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < features.cols(); ++j)
      if (labels[static_cast<std::size_t>(j)] == label)
        out.col(c++) = features.col(j);
    return out;
  }
};

namespace detail {

/// Reads a whole file through zlib, which transparently handles both plain
/// and gzip-compressed content.
inline std::string read_maybe_gzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw IngestError("cannot open '" + path + "'");
  std::string out;
  char buf[1 << 16];
  int got;
  while ((got = gzread(f, buf, sizeof buf)) > 0) out.append(buf, got);
  const bool bad = got < 0;
  gzclose(f);
  if (bad) throw IngestError("read error in '" + path + "'");
  return out;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& c : cells) {
    while (!c.empty() && (c.front() == ' ' || c.front() == '\t'))
      c.remove_prefix(1);
    while (!c.empty() && (c.back() == ' ' || c.back() == '\t' ||
                          c.back() == '\r'))
      c.remove_suffix(1);
  }
  return cells;
}

inline double parse_cell(std::string_view cell, std::size_t line_no,
                         const std::string& col_name) {
  const auto where = [&] {
    return "line " + std::to_string(line_no) + ", column '" + col_name + "'";
  };
  if (cell.empty())
    throw IngestError("missing value at " + where());
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(),
                                   value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
      !std::isfinite(value))
    throw IngestError("bad numeric value '" + std::string(cell) + "' at " +
                      where());
  return value;
}

inline int parse_label(std::string_view cell, std::size_t line_no) {
  if (cell == "1") return 1;
  if (cell == "2") return 2;
  throw IngestError("label '" + std::string(cell) + "' at line " +
                    std::to_string(line_no) + " is not 1 or 2");
}

}  // namespace detail

/// Loads a CSV (optionally gzip-compressed) with a header line. With
/// samples-as-rows the label column is named label_column and every other
/// column is a feature; with features-as-rows the first column holds row
/// names, columns are samples, and the row named label_column holds the
/// labels. An empty label_column means the file is unlabeled and every
/// column (row) is a feature. Missing or non-finite values are rejected
/// with their location; duplicate feature names are allowed.
inline DatasetTable ingest_csv(const std::string& path,
                               Orientation orientation,
                               const std::string& label_column) {
  const std::string content = detail::read_maybe_gzip(path);
  std::vector<std::string_view> lines;
  {
    std::string_view rest = content;
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      std::string_view line =
          nl == std::string_view::npos ? rest : rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.size() < 2)
    throw IngestError("'" + path + "' has no data rows");

  DatasetTable table;
  table.label_name = label_column;
  const auto header = detail::split_csv_line(lines[0]);

  const bool labeled = !label_column.empty();

  if (orientation == Orientation::samples_as_rows) {
    std::ptrdiff_t label_idx = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (labeled && header[c] == label_column) {
        if (label_idx >= 0)
          throw IngestError("label column '" + label_column +
                            "' appears twice in the header");
        label_idx = static_cast<std::ptrdiff_t>(c);
      } else {
        table.feature_names.emplace_back(header[c]);
      }
    }
    if (labeled && label_idx < 0)
      throw IngestError("label column '" + label_column + "' not found");
    const std::size_t ncols = header.size();
    const Eigen::Index p = static_cast<Eigen::Index>(table.feature_names.size());
    const Eigen::Index n = static_cast<Eigen::Index>(lines.size() - 1);
    table.features.resize(p, n);
    if (labeled) table.labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::size_t line_no = static_cast<std::size_t>(j) + 2;
      const auto cells = detail::split_csv_line(lines[static_cast<std::size_t>(j) + 1]);
      if (cells.size() != ncols)
        throw IngestError("line " + std::to_string(line_no) + " has " +
                          std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(ncols));
      Eigen::Index g = 0;
      for (std::size_t c = 0; c < ncols; ++c) {
        if (static_cast<std::ptrdiff_t>(c) == label_idx) {
          table.labels[static_cast<std::size_t>(j)] =
              detail::parse_label(cells[c], line_no);
        } else {
          table.features(g, j) = detail::parse_cell(
              cells[c], line_no, table.feature_names[static_cast<std::size_t>(g)]);
          ++g;
        }
      }
      table.sample_names.push_back("sample" + std::to_string(j + 1));
    }
  } else {
    for (std::size_t c = 1; c < header.size(); ++c)
      table.sample_names.emplace_back(header[c]);
    const Eigen::Index n = static_cast<Eigen::Index>(table.sample_names.size());
    if (n == 0) throw IngestError("'" + path + "' has no sample columns");

    std::ptrdiff_t label_row = -1;
    for (std::size_t r = 1; labeled && r < lines.size(); ++r) {
      const auto cells = detail::split_csv_line(lines[r]);
      if (cells.empty()) continue;
      if (cells[0] == label_column) {
        if (label_row >= 0)
          throw IngestError("label row '" + label_column + "' appears twice");
        label_row = static_cast<std::ptrdiff_t>(r);
      }
    }
    if (labeled && label_row < 0)
      throw IngestError("label row '" + label_column + "' not found");

    const Eigen::Index p =
        static_cast<Eigen::Index>(lines.size()) - (labeled ? 2 : 1);
    if (p < 1) throw IngestError("'" + path + "' has no feature rows");
    table.features.resize(p, n);
    if (labeled) table.labels.resize(static_cast<std::size_t>(n));
    Eigen::Index g = 0;
    for (std::size_t r = 1; r < lines.size(); ++r) {
      const std::size_t line_no = r + 1;
      const auto cells = detail::split_csv_line(lines[r]);
      if (cells.size() != static_cast<std::size_t>(n) + 1)
        throw IngestError("line " + std::to_string(line_no) + " has " +
                          std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(n + 1));
      if (static_cast<std::ptrdiff_t>(r) == label_row) {
        for (Eigen::Index j = 0; j < n; ++j)
          table.labels[static_cast<std::size_t>(j)] =
              detail::parse_label(cells[static_cast<std::size_t>(j) + 1], line_no);
        continue;
      }
      table.feature_names.emplace_back(cells[0]);
      for (Eigen::Index j = 0; j < n; ++j)
        table.features(g, j) =
            detail::parse_cell(cells[static_cast<std::size_t>(j) + 1], line_no,
                               table.feature_names.back());
      ++g;
    }
  }

  if (table.features.rows() < 1) throw IngestError("no features ingested");
  return table;
}

/// Writes a table as plain or gzip CSV (by suffix), samples as rows, with
/// full round-trip precision.
inline void write_csv(const DatasetTable& table, const std::string& path) {
  const bool labeled = !table.labels.empty();
  std::string out;
  out.reserve(static_cast<std::size_t>(table.features.size()) * 12);
  for (Eigen::Index g = 0; g < table.p(); ++g) {
    out += table.feature_names[static_cast<std::size_t>(g)];
    if (labeled || g + 1 < table.p()) out += ',';
  }
  if (labeled)
    out += table.label_name.empty() ? std::string("label") : table.label_name;
  out += '\n';
  char buf[64];
  for (Eigen::Index j = 0; j < table.n(); ++j) {
    for (Eigen::Index g = 0; g < table.p(); ++g) {
      std::snprintf(buf, sizeof buf, "%.17g", table.features(g, j));
      out += buf;
      if (labeled || g + 1 < table.p()) out += ',';
    }
    if (labeled) out += std::to_string(table.labels[static_cast<std::size_t>(j)]);
    out += '\n';
  }
  const bool gz = path.size() > 3 && path.substr(path.size() - 3) == ".gz";
  gzFile f = gzopen(path.c_str(), gz ? "wb" : "wbT");  // T: no compression
  if (!f) throw IngestError("cannot write '" + path + "'");
  const bool ok =
      gzwrite(f, out.data(), static_cast<unsigned>(out.size())) ==
      static_cast<int>(out.size());
  gzclose(f);
  if (!ok) throw IngestError("write error in '" + path + "'");
}

}  // namespace spike
