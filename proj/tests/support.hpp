#pragma once

// Shared fixtures and generators for the test programs.

#include <cstddef>
#include <string>
#include <vector>

#include "tabens/bench.hpp"

namespace tabens::testing {

// x = [1, 2, 10, 11], y = [1, 1, 10, 10]: two clusters split at 6.
inline FeatureMatrix four_x() { return FeatureMatrix::from_rows({{1}, {2}, {10}, {11}}); }
inline std::vector<double> four_y() { return {1, 1, 10, 10}; }

// n x p matrix with integer-valued entries in [0, levels) so that ties and
// repeated values are common.
inline FeatureMatrix random_matrix(Rng& rng, std::size_t n, std::size_t p, std::size_t levels) {
  std::vector<double> v(n * p);
  for (auto& x : v) x = static_cast<double>(rng.index(levels));
  return FeatureMatrix(n, p, std::move(v));
}

// Matrix with all-distinct rows (first column is the row index scaled).
inline FeatureMatrix distinct_matrix(Rng& rng, std::size_t n, std::size_t p) {
  std::vector<double> v(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    v[i * p] = static_cast<double>(i) * 0.5 + 0.25 * rng.uniform01();
    for (std::size_t j = 1; j < p; ++j) v[i * p + j] = rng.uniform(-5.0, 5.0);
  }
  return FeatureMatrix(n, p, std::move(v));
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Step-function regression data: y jumps with x0 and x1, plus small noise.
inline EncodedData step_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n * 3), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(0, 10), b = rng.uniform(0, 10), c = rng.uniform(0, 10);
    v[i * 3] = a;
    v[i * 3 + 1] = b;
    v[i * 3 + 2] = c;
    y[i] = (a > 5 ? 20.0 : 0.0) + (b > 3 ? 7.0 : 0.0) + rng.normal();
  }
  return {FeatureMatrix(n, 3, std::move(v)), std::move(y)};
}

// The benchmark pipeline up to the split, on generate_synthetic(spec).
struct BenchSplit {
  FeatureMatrix x_train, x_test;
  std::vector<double> y_train, y_test;
};

inline BenchSplit synthetic_split(const SyntheticSpec& spec = {}, double test_fraction = 0.25,
                                  std::uint64_t seed = 42) {
  auto ds = generate_synthetic(spec);
  ds = drop_columns(ds, {"id"});
  ds = dedupe_rows(ds);
  ds = drop_missing_columns(ds).dataset;
  const auto data = encode(ds, fit_ordinal_encoding(ds));
  const auto s = train_test_split(data.x.rows(), test_fraction, seed);
  return {data.x.select_rows(s.train), data.x.select_rows(s.test), select(data.y, s.train),
          select(data.y, s.test)};
}

inline std::vector<double> train_predictions(const RegressionTree& t, const FeatureMatrix& X) {
  return predict_tree(t, X);
}

}  // namespace tabens::testing
