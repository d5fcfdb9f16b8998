#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "tabens/error.hpp"

namespace tabens {

struct EvalResult {
  double r2 = 0.0;
  double rmse = 0.0;  // target units (US dollars)
  double mae = 0.0;   // target units (US dollars)
  std::size_t n = 0;

  bool operator==(const EvalResult&) const = default;
};

namespace detail {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr std::size_t kCompensateAbove = 10'000;

template <typename F>
double sum_over(std::size_t n, F&& term) {
  if (n > kCompensateAbove) {
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s.add(term(i));
    return s.value();
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += term(i);
  return s;
}

}  // namespace detail

/// R^2, RMSE and MAE of `y_pred` against `y_true`.
inline EvalResult evaluate(std::span<const double> y_true, std::span<const double> y_pred) {
  const std::size_t n = y_true.size();
  if (y_pred.size() != n)
    throw LengthMismatch("evaluate: " + std::to_string(n) + " targets vs " + std::to_string(y_pred.size()) +
                         " predictions");
  if (n < 2) throw InvalidArgument("evaluate needs at least two samples");

  const double mean = detail::sum_over(n, [&](std::size_t i) { return y_true[i]; }) / static_cast<double>(n);
  const double ss_tot = detail::sum_over(n, [&](std::size_t i) {
    const double d = y_true[i] - mean;
    return d * d;
  });
  if (!(ss_tot > 0.0)) throw DegenerateTarget("evaluate: target has zero variance, R^2 is undefined");
  const double ss_res = detail::sum_over(n, [&](std::size_t i) {
    const double e = y_true[i] - y_pred[i];
    return e * e;
  });
  const double abs_err = detail::sum_over(n, [&](std::size_t i) { return std::abs(y_true[i] - y_pred[i]); });

  const auto nd = static_cast<double>(n);
  EvalResult r;
  r.n = n;
  r.r2 = 1.0 - ss_res / ss_tot;
  r.rmse = std::sqrt(ss_res / nd);
  r.mae = abs_err / nd;
  // sqrt(mean(e^2)) >= mean(|e|) holds exactly; rounding may break it by an ulp.
  if (r.rmse < r.mae) r.rmse = r.mae;
  return r;
}

}  // namespace tabens
