#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "synaudit/common.hpp"

namespace synaudit {

// ---------------------------------------------------------------------------
// Schema & dataset types
// ---------------------------------------------------------------------------

enum class ColumnKind { numeric, categorical };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> categories;  // categorical only; sorted, duplicate-free

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

/// Same column names and kinds. Category vocabularies may differ; encoders
/// union them at fit time.
inline bool schema_compatible(const std::vector<ColumnSchema>& a,
                              const std::vector<ColumnSchema>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || a[i].kind != b[i].kind) return false;
  return true;
}

using Value = std::variant<double, std::string>;
using Row = std::vector<Value>;

/// Immutable mixed-type table. Construction validates that every row matches
/// the schema: one value per column, categorical labels within the column's
/// vocabulary, numeric values finite.
class TabularDataset {
 public:
  TabularDataset() = default;

  TabularDataset(std::vector<ColumnSchema> schema, std::vector<Row> rows)
      : schema_(std::move(schema)), rows_(std::move(rows)) {
    validate();
  }

  const std::vector<ColumnSchema>& schema() const { return schema_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return schema_.size(); }
  const std::vector<Row>& rows() const { return rows_; }
  const Row& row(std::size_t i) const { return rows_[i]; }

  double numeric_at(std::size_t r, std::size_t c) const {
    return std::get<double>(rows_[r][c]);
  }
  const std::string& category_at(std::size_t r, std::size_t c) const {
    return std::get<std::string>(rows_[r][c]);
  }

  /// Subset by row indices, preserving order of `indices`.
  TabularDataset take(const std::vector<std::size_t>& indices) const {
    std::vector<Row> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(rows_[i]);
    return TabularDataset(schema_, std::move(out));
  }

  friend bool operator==(const TabularDataset& a, const TabularDataset& b) {
    return a.schema_ == b.schema_ && a.rows_ == b.rows_;
  }

 private:
  void validate() const {
    for (std::size_t c = 0; c < schema_.size(); ++c) {
      for (std::size_t d = c + 1; d < schema_.size(); ++d)
        if (schema_[c].name == schema_[d].name)
          throw Error("duplicate column name '" + schema_[c].name + "'");
      if (schema_[c].kind == ColumnKind::categorical) {
        const auto& cats = schema_[c].categories;
        if (cats.empty())
          throw Error("categorical column '" + schema_[c].name + "' has no categories");
        const std::set<std::string> distinct(cats.begin(), cats.end());
        if (distinct.size() != cats.size())
          throw Error("duplicate category in column '" + schema_[c].name + "'");
      }
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].size() != schema_.size())
        throw Error("row " + std::to_string(r) + " has " + std::to_string(rows_[r].size()) +
                    " values, schema has " + std::to_string(schema_.size()) + " columns");
      for (std::size_t c = 0; c < schema_.size(); ++c) {
        if (schema_[c].kind == ColumnKind::numeric) {
          const double* v = std::get_if<double>(&rows_[r][c]);
          if (v == nullptr || !std::isfinite(*v))
            throw Error("row " + std::to_string(r) + ", column '" + schema_[c].name +
                        "': expected a finite number");
        } else {
          const std::string* v = std::get_if<std::string>(&rows_[r][c]);
          if (v == nullptr)
            throw Error("row " + std::to_string(r) + ", column '" + schema_[c].name +
                        "': expected a category label");
          const auto& cats = schema_[c].categories;
          if (std::find(cats.begin(), cats.end(), *v) == cats.end())
            throw Error("row " + std::to_string(r) + ", column '" + schema_[c].name +
                        "': label '" + *v + "' not in schema categories");
        }
      }
    }
  }

  std::vector<ColumnSchema> schema_;
  std::vector<Row> rows_;
};

/// Disjoint equal-size training / reference / holdout split.
struct SplitTriple {
  TabularDataset train;      // T
  TabularDataset reference;  // R
  TabularDataset holdout;    // H
};

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

namespace detail {

/// Full-field numeric parse: optional leading '+', then a finite decimal
/// number, nothing left over.
inline std::optional<double> parse_numeric(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV text <-> cells (RFC-4180-style: comma separated, double-quote quoting,
// "" escapes, CRLF or LF line ends, quoted fields may span lines)
// ---------------------------------------------------------------------------

inline std::vector<std::vector<std::string>> parse_csv_text(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes a trailing empty line from a record

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;  // a comma implies another field follows
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        field_started = true;
        break;
    }
  }
  if (in_quotes) throw IngestError(IngestError::Kind::parse, "unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

inline std::string csv_escape(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string format_numeric(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Infer a schema from raw text cells. A column is numeric iff every
/// non-empty cell parses as a finite decimal number; otherwise categorical
/// with categories = sorted distinct cell values.
inline std::vector<ColumnSchema> infer_schema(
    const std::vector<std::vector<std::string>>& raw_rows,
    const std::vector<std::string>& header) {
  if (header.empty())
    throw IngestError(IngestError::Kind::empty_input, "empty header: no columns");
  for (std::size_t r = 0; r < raw_rows.size(); ++r)
    if (raw_rows[r].size() != header.size())
      throw IngestError(IngestError::Kind::ragged_row,
                        "row " + std::to_string(r + 1) + " has " +
                            std::to_string(raw_rows[r].size()) + " fields, header has " +
                            std::to_string(header.size()));

  std::vector<ColumnSchema> schema(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    schema[c].name = header[c];
    bool numeric = true;
    for (const auto& row : raw_rows) {
      const std::string& cell = row[c];
      if (cell.empty()) continue;
      if (!detail::parse_numeric(cell)) {
        numeric = false;
        break;
      }
    }
    if (numeric) {
      schema[c].kind = ColumnKind::numeric;
    } else {
      schema[c].kind = ColumnKind::categorical;
      std::set<std::string> distinct;
      for (const auto& row : raw_rows) distinct.insert(row[c]);
      schema[c].categories.assign(distinct.begin(), distinct.end());
    }
  }
  return schema;
}

/// Parse raw cells against a schema (inferred when absent).
inline TabularDataset dataset_from_cells(
    const std::vector<std::vector<std::string>>& raw_rows,
    const std::vector<std::string>& header,
    std::optional<std::vector<ColumnSchema>> schema = std::nullopt) {
  std::vector<ColumnSchema> cols;
  if (schema.has_value()) {
    cols = std::move(*schema);
    if (cols.size() != header.size())
      throw IngestError(IngestError::Kind::schema,
                        "schema has " + std::to_string(cols.size()) + " columns, header has " +
                            std::to_string(header.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (cols[c].name != header[c])
        throw IngestError(IngestError::Kind::schema,
                          "header column '" + header[c] + "' does not match schema column '" +
                              cols[c].name + "'");
    for (std::size_t r = 0; r < raw_rows.size(); ++r)
      if (raw_rows[r].size() != header.size())
        throw IngestError(IngestError::Kind::ragged_row,
                          "row " + std::to_string(r + 1) + " has " +
                              std::to_string(raw_rows[r].size()) + " fields, header has " +
                              std::to_string(header.size()));
  } else {
    cols = infer_schema(raw_rows, header);
  }

  std::vector<Row> rows;
  rows.reserve(raw_rows.size());
  for (std::size_t r = 0; r < raw_rows.size(); ++r) {
    Row row;
    row.reserve(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string& cell = raw_rows[r][c];
      if (cols[c].kind == ColumnKind::numeric) {
        auto v = detail::parse_numeric(cell);
        if (!v)
          throw IngestError(IngestError::Kind::parse,
                            "row " + std::to_string(r + 1) + ", column '" + cols[c].name +
                                "': '" + cell + "' is not a finite number");
        row.emplace_back(*v);
      } else {
        if (std::find(cols[c].categories.begin(), cols[c].categories.end(), cell) ==
            cols[c].categories.end())
          throw IngestError(IngestError::Kind::schema,
                            "row " + std::to_string(r + 1) + ", column '" + cols[c].name +
                                "': label '" + cell + "' not in schema categories");
        row.emplace_back(cell);
      }
    }
    rows.push_back(std::move(row));
  }
  return TabularDataset(std::move(cols), std::move(rows));
}

/// Load a CSV file (first row header, UTF-8). Categorical values outside a
/// provided schema's categories are an error, never silently coded.
inline TabularDataset load_csv(const std::filesystem::path& path,
                               std::optional<std::vector<ColumnSchema>> schema = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IngestError(IngestError::Kind::missing_file,
                      "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  auto records = parse_csv_text(text);
  if (records.empty())
    throw IngestError(IngestError::Kind::empty_input,
                      "'" + path.string() + "' has no header row");
  std::vector<std::string> header = std::move(records.front());
  records.erase(records.begin());
  return dataset_from_cells(records, header, std::move(schema));
}

inline std::string to_csv_text(const TabularDataset& ds) {
  std::string out;
  const auto& schema = ds.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out += ',';
    out += csv_escape(schema[c].name);
  }
  out += '\n';
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out += ',';
      if (schema[c].kind == ColumnKind::numeric)
        out += format_numeric(ds.numeric_at(r, c));
      else
        out += csv_escape(ds.category_at(r, c));
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const TabularDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << to_csv_text(ds);
}

/// Draw three disjoint subsets of size n each by a seeded permutation.
/// Deterministic in (dataset, n, seed).
inline SplitTriple split_disjoint(const TabularDataset& dataset, std::size_t n,
                                  std::uint64_t seed) {
  if (n == 0) throw Error("split_disjoint: n must be positive");
  if (3 * n > dataset.row_count())
    throw InsufficientRows("split_disjoint: need " + std::to_string(3 * n) + " rows, have " +
                           std::to_string(dataset.row_count()));
  std::vector<std::size_t> indices(dataset.row_count());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  Rng rng(seed);
  rng.shuffle(indices);

  auto slice = [&](std::size_t begin) {
    return std::vector<std::size_t>(indices.begin() + begin, indices.begin() + begin + n);
  };
  return SplitTriple{dataset.take(slice(0)), dataset.take(slice(n)), dataset.take(slice(2 * n))};
}

/// Row-wise concatenation. Schemas must be compatible; category vocabularies
/// are merged (sorted union) so the result validates.
inline TabularDataset concat_rows(const std::vector<const TabularDataset*>& parts) {
  if (parts.empty()) throw Error("concat_rows: no datasets");
  const auto& base = parts.front()->schema();
  std::vector<ColumnSchema> schema = base;
  for (const TabularDataset* ds : parts) {
    if (!schema_compatible(base, ds->schema()))
      throw Error("concat_rows: incompatible schemas");
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (schema[c].kind != ColumnKind::categorical) continue;
      std::set<std::string> merged(schema[c].categories.begin(), schema[c].categories.end());
      merged.insert(ds->schema()[c].categories.begin(), ds->schema()[c].categories.end());
      schema[c].categories.assign(merged.begin(), merged.end());
    }
  }
  std::vector<Row> rows;
  for (const TabularDataset* ds : parts)
    rows.insert(rows.end(), ds->rows().begin(), ds->rows().end());
  return TabularDataset(std::move(schema), std::move(rows));
}

}  // namespace synaudit
