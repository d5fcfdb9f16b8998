#pragma once

// Deliberately naive reference implementations, kept independent of the
// library code they check.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "tabens/matrix.hpp"
#include "tabens/tree.hpp"

namespace tabens::oracle {

inline double sse(const std::vector<double>& y, const std::vector<double>& w) {
  double sw = 0, swy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sw += w[i];
    swy += w[i] * y[i];
  }
  if (sw <= 0) return 0.0;
  const double mean = swy / sw;
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * (y[i] - mean) * (y[i] - mean);
  return s;
}

// Every (feature, midpoint of consecutive distinct values) pair, partitioned
// explicitly and scored by direct SSE. Ties within `tie` * parent SSE keep
// the earlier candidate in (feature, threshold) order.
inline std::optional<SplitCandidate> brute_force_split(const FeatureMatrix& X, const std::vector<double>& y,
                                                       const std::vector<double>& w,
                                                       std::size_t min_samples_leaf = 1, double tie = 1e-12) {
  const double parent = sse(y, w);
  std::optional<SplitCandidate> best;
  for (std::size_t f = 0; f < X.cols(); ++f) {
    std::set<double> values;
    for (std::size_t i = 0; i < X.rows(); ++i) values.insert(X(i, f));
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double t = v[k] + (v[k + 1] - v[k]) / 2;
      std::vector<double> yl, wl, yr, wr;
      for (std::size_t i = 0; i < X.rows(); ++i) {
        if (X(i, f) <= t) {
          yl.push_back(y[i]);
          wl.push_back(w[i]);
        } else {
          yr.push_back(y[i]);
          wr.push_back(w[i]);
        }
      }
      if (yl.size() < min_samples_leaf || yr.size() < min_samples_leaf) continue;
      const double dec = parent - sse(yl, wl) - sse(yr, wr);
      if (dec <= tie * parent) continue;
      if (!best || dec > best->impurity_decrease + tie * parent) best = SplitCandidate{f, t, dec};
    }
  }
  return best;
}

struct Metrics {
  double r2, rmse, mae;
};

// Textbook formulas in long double.
inline Metrics metrics(const std::vector<double>& y, const std::vector<double>& p) {
  long double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<long double>(y.size());
  long double se = 0, ae = 0, tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double e = static_cast<long double>(y[i]) - p[i];
    se += e * e;
    ae += e < 0 ? -e : e;
    tot += (y[i] - mean) * (y[i] - mean);
  }
  const auto n = static_cast<long double>(y.size());
  return {static_cast<double>(1 - se / tot), static_cast<double>(std::sqrt(se / n)), static_cast<double>(ae / n)};
}

}  // namespace tabens::oracle
