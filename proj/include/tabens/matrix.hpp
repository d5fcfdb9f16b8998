#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tabens/error.hpp"

namespace tabens {

/// Dense row-major n x p design matrix with named columns. All entries are finite.
class FeatureMatrix {
public:
  FeatureMatrix() = default;

  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                std::vector<std::string> names = {})
      : rows_(rows), cols_(cols), values_(std::move(values)), names_(std::move(names)) {
    if (values_.size() != rows_ * cols_)
      throw DimensionMismatch("matrix storage holds " + std::to_string(values_.size()) +
                              " values, expected " + std::to_string(rows_ * cols_));
    if (names_.empty())
      for (std::size_t j = 0; j < cols_; ++j) names_.push_back("x" + std::to_string(j));
    if (names_.size() != cols_) throw DimensionMismatch("feature name count differs from column count");
    for (double v : values_)
      if (!std::isfinite(v)) throw InvalidArgument("feature matrix entries must be finite");
  }

  // Builds from a list of rows; every row must have the same length.
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                 std::vector<std::string> names = {}) {
    const std::size_t p = rows.empty() ? names.size() : rows.front().size();
    std::vector<double> v;
    v.reserve(rows.size() * p);
    for (const auto& r : rows) {
      if (r.size() != p) throw DimensionMismatch("ragged rows");
      v.insert(v.end(), r.begin(), r.end());
    }
    return FeatureMatrix(rows.size(), p, std::move(v), std::move(names));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
    std::vector<double> v;
    v.reserve(idx.size() * cols_);
    for (auto i : idx) {
      auto r = row(i);
      v.insert(v.end(), r.begin(), r.end());
    }
    return FeatureMatrix(idx.size(), cols_, std::move(v), names_);
  }

  bool operator==(const FeatureMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

inline std::vector<double> select(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace tabens
