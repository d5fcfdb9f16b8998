#pragma once

// Cleaning, categorical coding and the train/test split.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabens/error.hpp"
#include "tabens/matrix.hpp"
#include "tabens/random.hpp"
#include "tabens/tabular.hpp"

namespace tabens {

using TargetVector = std::vector<double>;

inline Dataset drop_columns(const Dataset& ds, const std::vector<std::string>& names) {
  const auto& schema = ds.schema();
  std::vector<bool> drop(schema.size(), false);
  for (const auto& name : names) {
    auto idx = schema.index_of(name);
    if (!idx) throw UnknownColumn(name);
    if (schema[*idx].role == ColumnRole::target) throw TargetDropForbidden(name);
    drop[*idx] = true;
  }
  std::vector<ColumnSchema> cols;
  for (std::size_t c = 0; c < schema.size(); ++c)
    if (!drop[c]) cols.push_back(schema[c]);
  std::vector<Row> rows;
  rows.reserve(ds.row_count());
  for (const auto& r : ds.rows()) {
    Row out;
    out.reserve(cols.size());
    for (std::size_t c = 0; c < r.size(); ++c)
      if (!drop[c]) out.push_back(r[c]);
    rows.push_back(std::move(out));
  }
  return Dataset(TableSchema(std::move(cols)), std::move(rows));
}

// Keeps the first occurrence of every distinct row, in original order.
inline Dataset dedupe_rows(const Dataset& ds) {
  std::set<Row> seen;
  std::vector<Row> rows;
  for (const auto& r : ds.rows())
    if (seen.insert(r).second) rows.push_back(r);
  return Dataset(ds.schema(), std::move(rows));
}

struct MissingDropResult {
  Dataset dataset;
  std::vector<std::string> dropped;  // feature columns removed
  std::size_t rows_removed = 0;      // rows deleted because a kept column was Missing
};

/// Removes every feature column whose Missing fraction exceeds
/// `max_missing_fraction`, then deletes the rows that still hold a Missing
/// cell. With the default threshold of 0 the second step never fires.
inline MissingDropResult drop_missing_columns(const Dataset& ds, double max_missing_fraction = 0.0) {
  if (!(max_missing_fraction >= 0.0 && max_missing_fraction < 1.0))
    throw InvalidArgument("max_missing_fraction must lie in [0, 1)");
  const auto& schema = ds.schema();
  const auto n = ds.row_count();

  std::vector<std::size_t> missing(schema.size(), 0);
  for (const auto& r : ds.rows())
    for (std::size_t c = 0; c < r.size(); ++c)
      if (is_missing(r[c])) ++missing[c];

  const auto target = schema.target_index();
  if (missing[target] > 0) throw TargetHasMissing(schema[target].name);

  MissingDropResult result;
  std::vector<std::string> to_drop;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].role != ColumnRole::feature || n == 0) continue;
    if (static_cast<double>(missing[c]) / static_cast<double>(n) > max_missing_fraction)
      to_drop.push_back(schema[c].name);
  }
  Dataset kept = drop_columns(ds, to_drop);

  std::vector<Row> rows;
  rows.reserve(kept.row_count());
  for (const auto& r : kept.rows())
    if (std::none_of(r.begin(), r.end(), [](const CellValue& v) { return is_missing(v); }))
      rows.push_back(r);
  result.rows_removed = kept.row_count() - rows.size();
  result.dataset = Dataset(kept.schema(), std::move(rows));
  result.dropped = std::move(to_drop);
  return result;
}

// Ordered category list of one text column; a category's code is its position.
struct ColumnCategories {
  std::string column;
  std::vector<std::string> categories;  // ascending byte order, unique

  bool operator==(const ColumnCategories&) const = default;
};

class EncodingMap {
public:
  EncodingMap() = default;
  explicit EncodingMap(std::vector<ColumnCategories> columns) : columns_(std::move(columns)) {
    for (const auto& c : columns_)
      if (!std::is_sorted(c.categories.begin(), c.categories.end()) ||
          std::adjacent_find(c.categories.begin(), c.categories.end()) != c.categories.end())
        throw InvalidArgument("categories of '" + c.column + "' must be sorted and unique");
  }

  const std::vector<ColumnCategories>& columns() const noexcept { return columns_; }

  const ColumnCategories* find(std::string_view column) const noexcept {
    for (const auto& c : columns_)
      if (c.column == column) return &c;
    return nullptr;
  }

  std::size_t code(std::string_view column, const std::string& value) const {
    const auto* c = find(column);
    if (c == nullptr) throw UnknownColumn(std::string(column));
    auto it = std::lower_bound(c->categories.begin(), c->categories.end(), value);
    if (it == c->categories.end() || *it != value) throw UnseenCategory(std::string(column), value);
    return static_cast<std::size_t>(it - c->categories.begin());
  }

  bool operator==(const EncodingMap&) const = default;

private:
  std::vector<ColumnCategories> columns_;
};

inline void to_json(nlohmann::json& j, const EncodingMap& m) {
  j = nlohmann::json::array();
  for (const auto& c : m.columns()) j.push_back({{"column", c.column}, {"categories", c.categories}});
}

inline void from_json(const nlohmann::json& j, EncodingMap& m) {
  std::vector<ColumnCategories> cols;
  for (const auto& c : j)
    cols.push_back({c.at("column").get<std::string>(), c.at("categories").get<std::vector<std::string>>()});
  m = EncodingMap(std::move(cols));
}

inline EncodingMap fit_ordinal_encoding(const Dataset& ds) {
  const auto& schema = ds.schema();
  std::vector<ColumnCategories> cols;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].role != ColumnRole::feature || schema[c].kind != ColumnKind::text) continue;
    std::set<std::string> values;
    for (const auto& r : ds.rows()) {
      if (is_missing(r[c])) throw InvalidArgument("fit_ordinal_encoding requires a dataset without Missing cells");
      values.insert(std::get<std::string>(r[c]));
    }
    cols.push_back({schema[c].name, {values.begin(), values.end()}});
  }
  return EncodingMap(std::move(cols));
}

enum class CategoricalEncoding { ordinal, one_hot };

struct EncodedData {
  FeatureMatrix x;
  TargetVector y;
};

/// Turns a Missing-free dataset into a numeric matrix and target vector.
/// Numeric features pass through; text features become their ordinal code,
/// or one 0/1 indicator column per category ("name=category") under one_hot.
/// Identifier columns are never emitted.
inline EncodedData encode(const Dataset& ds, const EncodingMap& map,
                          CategoricalEncoding scheme = CategoricalEncoding::ordinal) {
  const auto& schema = ds.schema();
  const auto target = schema.target_index();
  if (schema[target].kind == ColumnKind::text) throw InvalidArgument("target column must be numeric");

  std::vector<std::string> names;
  std::vector<std::size_t> source;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].role != ColumnRole::feature) continue;
    if (schema[c].kind == ColumnKind::text) {
      const auto* cats = map.find(schema[c].name);
      if (cats == nullptr) throw UnknownColumn(schema[c].name);
      if (scheme == CategoricalEncoding::one_hot) {
        for (const auto& cat : cats->categories) {
          names.push_back(schema[c].name + "=" + cat);
          source.push_back(c);
        }
        continue;
      }
    }
    names.push_back(schema[c].name);
    source.push_back(c);
  }
  if (names.empty()) throw InvalidArgument("no feature columns left to encode");

  const auto as_double = [&](const CellValue& v, std::size_t c) -> double {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* s = std::get_if<std::string>(&v))
      return static_cast<double>(map.code(schema[c].name, *s));
    throw InvalidArgument("encode requires a dataset without Missing cells (column '" +
                          schema[c].name + "')");
  };

  std::vector<double> values;
  values.reserve(ds.row_count() * names.size());
  TargetVector y;
  y.reserve(ds.row_count());
  for (const auto& r : ds.rows()) {
    for (std::size_t k = 0; k < source.size();) {
      const auto c = source[k];
      if (scheme == CategoricalEncoding::one_hot && schema[c].kind == ColumnKind::text) {
        if (!std::holds_alternative<std::string>(r[c]))
          throw InvalidArgument("encode requires a dataset without Missing cells (column '" +
                                schema[c].name + "')");
        const auto code = map.code(schema[c].name, std::get<std::string>(r[c]));
        const auto k_cats = map.find(schema[c].name)->categories.size();
        for (std::size_t q = 0; q < k_cats; ++q) values.push_back(q == code ? 1.0 : 0.0);
        k += k_cats;
      } else {
        values.push_back(as_double(r[c], c));
        ++k;
      }
    }
    y.push_back(as_double(r[target], target));
  }
  const std::size_t p = names.size();
  return {FeatureMatrix(ds.row_count(), p, std::move(values), std::move(names)), std::move(y)};
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;

  bool operator==(const SplitIndices&) const = default;
};

/// Seeded random partition of 0..n-1: a Fisher-Yates shuffle whose first
/// round(n * test_fraction) entries (clamped to [1, n-1]) form the test set.
inline SplitIndices train_test_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (n < 4) throw InvalidArgument("train_test_split needs n >= 4");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm.begin(), perm.end());
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  SplitIndices s;
  s.seed = seed;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  return s;
}

}  // namespace tabens
