#pragma once

// Listing data model and CSV ingestion.

#include <charconv>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "tabens/error.hpp"

namespace tabens {

struct Missing {
  auto operator<=>(const Missing&) const = default;
};

// Real alternatives are always finite.
using CellValue = std::variant<Missing, std::int64_t, double, std::string>;

inline bool is_missing(const CellValue& v) noexcept { return std::holds_alternative<Missing>(v); }

enum class ColumnKind { integer, real, text };
enum class ColumnRole { identifier, feature, target };

inline std::string_view to_string(ColumnKind k) noexcept {
  switch (k) {
    case ColumnKind::integer: return "integer";
    case ColumnKind::real: return "real";
    case ColumnKind::text: return "text";
  }
  return "?";
}

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::real;
  ColumnRole role = ColumnRole::feature;

  bool operator==(const ColumnSchema&) const = default;
};

class TableSchema {
public:
  TableSchema() = default;

  explicit TableSchema(std::vector<ColumnSchema> columns) : columns_(std::move(columns)) {
    std::size_t targets = 0;
    std::size_t identifiers = 0;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      const auto& c = columns_[i];
      if (c.name.empty()) throw SchemaError("column " + std::to_string(i) + " has an empty name");
      for (std::size_t j = 0; j < i; ++j)
        if (columns_[j].name == c.name) throw SchemaError("duplicate column name '" + c.name + "'");
      if (c.role == ColumnRole::target) ++targets;
      if (c.role == ColumnRole::identifier) ++identifiers;
    }
    if (targets != 1) throw SchemaError("schema needs exactly one target column");
    if (identifiers > 1) throw SchemaError("schema allows at most one identifier column");
  }

  // The twelve-column listing export: id, ten descriptive features, price.
  static TableSchema listings() {
    using K = ColumnKind;
    using R = ColumnRole;
    return TableSchema({
        {"id", K::integer, R::identifier},
        {"realty_type", K::text, R::feature},
        {"total_area", K::real, R::feature},
        {"floor", K::integer, R::feature},
        {"floors", K::integer, R::feature},
        {"repair_state", K::text, R::feature},
        {"wall_material", K::text, R::feature},
        {"furniture", K::text, R::feature},
        {"heating", K::text, R::feature},
        {"build_year", K::text, R::feature},
        {"market", K::text, R::feature},
        {"price", K::integer, R::target},
    });
  }

  const std::vector<ColumnSchema>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return columns_.size(); }
  const ColumnSchema& operator[](std::size_t i) const { return columns_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t target_index() const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].role == ColumnRole::target) return i;
    throw SchemaError("schema has no target column");
  }

  std::optional<std::size_t> identifier_index() const noexcept {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].role == ColumnRole::identifier) return i;
    return std::nullopt;
  }

  bool operator==(const TableSchema&) const = default;

private:
  std::vector<ColumnSchema> columns_;
};

using Row = std::vector<CellValue>;

inline bool cell_matches(const CellValue& v, ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::integer: return std::holds_alternative<std::int64_t>(v);
    case ColumnKind::real: {
      const auto* d = std::get_if<double>(&v);
      return d != nullptr && std::isfinite(*d);
    }
    case ColumnKind::text: return std::holds_alternative<std::string>(v);
  }
  return false;
}

/// Schema-typed table of listing records. Immutable once built; every
/// constructor path checks row arity and per-cell kinds.
class Dataset {
public:
  Dataset() = default;

  Dataset(TableSchema schema, std::vector<Row> rows)
      : schema_(std::move(schema)), rows_(std::move(rows)) {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].size() != schema_.size()) throw ArityError(r + 1, schema_.size(), rows_[r].size());
      for (std::size_t c = 0; c < schema_.size(); ++c) {
        const auto& cell = rows_[r][c];
        if (!is_missing(cell) && !cell_matches(cell, schema_[c].kind))
          throw SchemaError("row " + std::to_string(r + 1) + ", column '" + schema_[c].name +
                            "': cell does not match column kind " +
                            std::string(to_string(schema_[c].kind)));
      }
    }
  }

  const TableSchema& schema() const noexcept { return schema_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  std::size_t row_count() const noexcept { return rows_.size(); }
  std::size_t column_count() const noexcept { return schema_.size(); }
  const CellValue& at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

  bool operator==(const Dataset&) const = default;

private:
  TableSchema schema_;
  std::vector<Row> rows_;
};

namespace detail {

struct CsvField {
  std::string text;
  bool quoted = false;
};

inline bool is_blank(char c) noexcept { return c == ' ' || c == '\t'; }

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_blank(s.back())) s.remove_suffix(1);
  return s;
}

// Splits RFC-4180-style text into records. Quoted fields may hold the
// delimiter, doubled quotes and line breaks; unquoted fields are trimmed.
// Completely empty lines are skipped.
inline std::vector<std::vector<CsvField>> split_records(std::string_view text, char delim) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<CsvField>> records;
  std::vector<CsvField> record;
  std::size_t i = 0;
  const std::size_t n = text.size();
  bool line_has_content = false;

  auto end_record = [&] {
    if (line_has_content) records.push_back(std::move(record));
    record.clear();
    line_has_content = false;
  };

  while (i < n) {
    // One field.
    std::size_t start = i;
    while (i < n && is_blank(text[i])) ++i;
    CsvField field;
    if (i < n && text[i] == '"') {
      field.quoted = true;
      ++i;
      while (i < n) {
        if (text[i] == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field.text.push_back('"');
            i += 2;
          } else {
            ++i;
            break;
          }
        } else {
          field.text.push_back(text[i++]);
        }
      }
      // Anything between the closing quote and the delimiter is kept verbatim
      // unless it is blank.
      std::size_t tail = i;
      while (i < n && text[i] != delim && text[i] != '\n' && text[i] != '\r') ++i;
      field.text += trim(text.substr(tail, i - tail));
    } else {
      i = start;
      while (i < n && text[i] != delim && text[i] != '\n' && text[i] != '\r') ++i;
      field.text = std::string(trim(text.substr(start, i - start)));
    }
    line_has_content = line_has_content || field.quoted || !field.text.empty() ||
                       (i < n && text[i] == delim);
    record.push_back(std::move(field));

    if (i >= n) break;
    if (text[i] == delim) {
      ++i;
      if (i >= n) record.push_back({});
      continue;
    }
    // Line break: \n, \r\n or lone \r.
    if (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
    ++i;
    end_record();
  }
  end_record();
  return records;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) noexcept {
  if (s.starts_with('+')) s.remove_prefix(1);
  std::int64_t v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_real(std::string_view s) noexcept {
  if (s.starts_with('+')) s.remove_prefix(1);
  double v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

}  // namespace detail

// Shortest decimal text that parses back to exactly `v`.
inline std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Parses a CSV document whose first record is a header naming the schema
/// columns in order. Empty unquoted fields become Missing; a quoted empty
/// field is an empty Text. Error row numbers count data rows from 1.
inline Dataset parse_csv(std::string_view text, const TableSchema& schema, char delimiter = ',') {
  auto records = detail::split_records(text, delimiter);
  if (records.empty()) throw HeaderMismatch("missing header row");

  const auto& header = records.front();
  bool header_ok = header.size() == schema.size();
  for (std::size_t c = 0; header_ok && c < header.size(); ++c)
    header_ok = header[c].text == schema[c].name;
  if (!header_ok) {
    std::string got;
    for (const auto& f : header) got += (got.empty() ? "" : ",") + f.text;
    throw HeaderMismatch("header '" + got + "' does not match schema");
  }

  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != schema.size()) throw ArityError(r, schema.size(), rec.size());
    Row row;
    row.reserve(rec.size());
    for (std::size_t c = 0; c < rec.size(); ++c) {
      const auto& f = rec[c];
      const auto& col = schema[c];
      if (f.text.empty() && !f.quoted) {
        row.emplace_back(Missing{});
        continue;
      }
      switch (col.kind) {
        case ColumnKind::text: row.emplace_back(f.text); break;
        case ColumnKind::integer: {
          auto v = detail::parse_int(f.text);
          if (!v) throw ParseError(r, col.name, f.text);
          row.emplace_back(*v);
          break;
        }
        case ColumnKind::real: {
          auto v = detail::parse_real(f.text);
          if (!v) throw ParseError(r, col.name, f.text);
          row.emplace_back(*v);
          break;
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return Dataset(schema, std::move(rows));
}

inline Dataset parse_csv(std::istream& in, const TableSchema& schema, char delimiter = ',') {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_csv(std::string_view(text), schema, delimiter);
}

namespace detail {

inline void write_field(std::ostream& out, const std::string& s, char delim) {
  const bool needs_quotes = s.empty() || s.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string::npos ||
                            is_blank(s.front()) || is_blank(s.back());
  if (!needs_quotes) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace detail

// Writes `ds` so that parse_csv with the same delimiter reproduces it cell for cell.
inline void write_csv(std::ostream& out, const Dataset& ds, char delimiter = ',') {
  const auto& cols = ds.schema().columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out << delimiter;
    detail::write_field(out, cols[c].name, delimiter);
  }
  out << '\n';
  for (const auto& row : ds.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << delimiter;
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Missing>) {
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out << v;
            } else if constexpr (std::is_same_v<T, double>) {
              out << format_real(v);
            } else {
              detail::write_field(out, v, delimiter);
            }
          },
          row[c]);
    }
    out << '\n';
  }
}

inline std::string to_csv(const Dataset& ds, char delimiter = ',') {
  std::ostringstream out;
  write_csv(out, ds, delimiter);
  return out.str();
}

struct Violation {
  std::size_t row = 0;  // 0-based
  std::string rule;

  bool operator==(const Violation&) const = default;
};

namespace detail {

inline std::optional<double> numeric_cell(const Dataset& ds, std::size_t row,
                                          std::optional<std::size_t> col) {
  if (!col) return std::nullopt;
  const auto& cell = ds.at(row, *col);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  return std::nullopt;
}

}  // namespace detail

/// Soft plausibility checks on listing rows. Columns are looked up by name,
/// and a rule is skipped when a column it needs is absent or Missing.
///
/// Rules: nonpositive_price, nonpositive_area, floor_exceeds_floors,
/// nonpositive_floors.
inline std::vector<Violation> validate(const Dataset& ds) {
  const auto& s = ds.schema();
  const auto price = s.index_of("price");
  const auto area = s.index_of("total_area");
  const auto floor = s.index_of("floor");
  const auto floors = s.index_of("floors");

  std::vector<Violation> out;
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    if (auto v = detail::numeric_cell(ds, r, price); v && *v <= 0) out.push_back({r, "nonpositive_price"});
    if (auto v = detail::numeric_cell(ds, r, area); v && *v <= 0) out.push_back({r, "nonpositive_area"});
    auto fl = detail::numeric_cell(ds, r, floor);
    auto fls = detail::numeric_cell(ds, r, floors);
    if (fl && fls && *fl > *fls) out.push_back({r, "floor_exceeds_floors"});
    if (fls && *fls <= 0) out.push_back({r, "nonpositive_floors"});
  }
  return out;
}

}  // namespace tabens
