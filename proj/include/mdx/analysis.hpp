#pragma once

// Agreement between evaluation metrics: Pearson and Spearman correlation
// over a table of (system, song, stem) rows.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "mdx/error.hpp"
#include "mdx/metrics.hpp"
#include "mdx/table_io.hpp"

namespace mdx {

enum class CorrelationKind { Pearson, Spearman };

inline std::string_view correlation_name(CorrelationKind k) {
  return k == CorrelationKind::Pearson ? "pearson" : "spearman";
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInputError("correlation inputs differ in length");
  if (x.size() < 2) throw InvalidInputError("correlation needs at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("correlation is undefined for a constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Fractional ranks starting at 1; tied values share their average rank.
inline std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInputError("correlation inputs differ in length");
  auto rx = fractional_ranks(x);
  auto ry = fractional_ranks(y);
  return pearson(rx, ry);
}

inline double correlation(CorrelationKind kind, std::span<const double> x, std::span<const double> y) {
  return kind == CorrelationKind::Pearson ? pearson(x, y) : spearman(x, y);
}

struct MetricRowKey {
  std::string system_id;
  std::string song_id;
  std::string stem;
  auto operator<=>(const MetricRowKey&) const = default;
};

// Rows of metric values; absent values are std::nullopt.
class MetricTable {
 public:
  explicit MetricTable(std::vector<MetricKey> columns = suite_keys()) : columns_(std::move(columns)) {}

  const std::vector<MetricKey>& columns() const { return columns_; }
  const std::vector<MetricRowKey>& rows() const { return rows_; }
  const std::vector<std::optional<double>>& values(std::size_t row) const { return values_[row]; }
  std::size_t size() const { return rows_.size(); }

  void add_row(MetricRowKey key, std::vector<std::optional<double>> values) {
    if (values.size() != columns_.size()) throw InvalidInputError("metric row has the wrong number of values");
    for (const auto& v : values)
      if (v && !std::isfinite(*v)) throw InvalidInputError("metric values must be finite");
    if (!keys_.insert(key).second)
      throw InvalidInputError("duplicate metric row " + key.system_id + "/" + key.song_id + "/" + key.stem);
    rows_.push_back(std::move(key));
    values_.push_back(std::move(values));
  }

  void add_suite(MetricRowKey key, const std::map<MetricKey, double>& suite) {
    std::vector<std::optional<double>> v;
    for (const auto& c : columns_) {
      auto it = suite.find(c);
      v.push_back(it == suite.end() ? std::nullopt : std::optional<double>(it->second));
    }
    add_row(std::move(key), std::move(v));
  }

  // Rows whose system and stem match (empty filter matches everything).
  MetricTable filtered(const std::string& system_id, const std::string& stem) const {
    MetricTable out(columns_);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (!system_id.empty() && rows_[i].system_id != system_id) continue;
      if (!stem.empty() && rows_[i].stem != stem) continue;
      out.add_row(rows_[i], values_[i]);
    }
    return out;
  }

  std::string to_csv() const {
    std::vector<std::string> header = {"system_id", "song_id", "stem"};
    for (const auto& c : columns_) header.push_back(metric_key_name(c));
    std::string out = csv_line(header);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      std::vector<std::string> f = {rows_[i].system_id, rows_[i].song_id, rows_[i].stem};
      for (const auto& v : values_[i]) f.push_back(v ? format_sig6(*v) : "");
      out += csv_line(f);
    }
    return out;
  }

  static MetricTable from_csv(const std::string& text) {
    auto rows = parse_csv(text);
    if (rows.empty() || rows.front().size() < 4 || rows.front()[0] != "system_id" || rows.front()[1] != "song_id" ||
        rows.front()[2] != "stem")
      throw InvalidInputError("metric table needs a system_id,song_id,stem,... header");
    std::vector<MetricKey> cols;
    for (std::size_t i = 3; i < rows.front().size(); ++i) {
      auto k = parse_metric_key(rows.front()[i]);
      if (!k) throw InvalidInputError("unknown metric column '" + rows.front()[i] + "'");
      cols.push_back(*k);
    }
    MetricTable t(cols);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& f = rows[r];
      if (f.size() != cols.size() + 3) throw InvalidInputError("metric table row " + std::to_string(r) + " is ragged");
      std::vector<std::optional<double>> v;
      for (std::size_t i = 3; i < f.size(); ++i)
        v.push_back(f[i].empty() ? std::nullopt : std::optional<double>(parse_double(f[i], "metric value")));
      t.add_row({f[0], f[1], f[2]}, std::move(v));
    }
    return t;
  }

 private:
  std::vector<MetricKey> columns_;
  std::vector<MetricRowKey> rows_;
  std::vector<std::vector<std::optional<double>>> values_;
  std::set<MetricRowKey> keys_;
};

struct CorrelationMatrix {
  CorrelationKind kind = CorrelationKind::Pearson;
  std::vector<MetricKey> columns;
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<std::vector<std::size_t>> support;  // co-present rows per pair
  std::vector<std::string> notes;                 // why cells are absent

  std::optional<double> at(const MetricKey& a, const MetricKey& b) const {
    auto ia = std::find(columns.begin(), columns.end(), a);
    auto ib = std::find(columns.begin(), columns.end(), b);
    if (ia == columns.end() || ib == columns.end()) return std::nullopt;
    return cells[ia - columns.begin()][ib - columns.begin()];
  }

  std::string to_csv() const {
    std::vector<std::string> header = {"metric"};
    for (const auto& c : columns) header.push_back(metric_key_name(c));
    std::string out = csv_line(header);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      std::vector<std::string> f = {metric_key_name(columns[i])};
      for (const auto& v : cells[i]) f.push_back(v ? format_sig6(*v) : "");
      out += csv_line(f);
    }
    return out;
  }

  // One line per metric pair. Correlations are sign-adjusted so that two
  // metrics agreeing on which estimate is better count as positive (MAE/MSE
  // fall as SDR rises); pairs under `threshold` are flagged LOW.
  std::string report(double threshold = 0.9) const {
    std::string out = std::string(correlation_name(kind)) + " correlation report (threshold " +
                      format_sig6(threshold) + ")\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      for (std::size_t j = i + 1; j < columns.size(); ++j) {
        std::string line = metric_key_name(columns[i]) + " vs " + metric_key_name(columns[j]) + ": ";
        if (!cells[i][j]) {
          line += "absent";
        } else {
          const bool flip = higher_is_better(columns[i].id) != higher_is_better(columns[j].id);
          const double agreement = flip ? -*cells[i][j] : *cells[i][j];
          line += format_sig6(*cells[i][j]) + " (agreement " + format_sig6(agreement) + ", n=" +
                  std::to_string(support[i][j]) + ")" + (agreement < threshold ? " LOW" : "");
        }
        out += line + "\n";
      }
    for (const auto& n : notes) out += "note: " + n + "\n";
    return out;
  }
};

// Pairwise correlation over rows where both metrics are present.
inline CorrelationMatrix correlation_matrix(const MetricTable& table, CorrelationKind kind) {
  CorrelationMatrix m;
  m.kind = kind;
  m.columns = table.columns();
  const std::size_t n = m.columns.size();
  m.cells.assign(n, std::vector<std::optional<double>>(n));
  m.support.assign(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      std::vector<double> x, y;
      for (std::size_t r = 0; r < table.size(); ++r) {
        const auto& v = table.values(r);
        if (v[i] && v[j]) {
          x.push_back(*v[i]);
          y.push_back(*v[j]);
        }
      }
      m.support[i][j] = m.support[j][i] = x.size();
      const std::string pair = metric_key_name(m.columns[i]) + " vs " + metric_key_name(m.columns[j]);
      if (x.size() < 2) {
        m.notes.push_back(pair + ": fewer than 2 co-present rows");
        continue;
      }
      try {
        // The diagonal still goes through correlation() so constant columns stay absent.
        double r = correlation(kind, x, i == j ? x : y);
        m.cells[i][j] = m.cells[j][i] = i == j ? 1.0 : r;
      } catch (const UndefinedCorrelationError&) {
        m.notes.push_back(pair + ": constant values");
      }
    }
  return m;
}

}  // namespace mdx
