#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tabens/error.hpp"
#include "tabens/matrix.hpp"

namespace tabens {

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 1.0;

  double predict_one(std::span<const double> z) const noexcept {
    double s = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * z[j];
    return s;
  }

  bool operator==(const RidgeModel&) const = default;
};

inline void to_json(nlohmann::json& j, const RidgeModel& m) {
  j = {{"weights", m.weights}, {"intercept", m.intercept}, {"lambda", m.lambda}};
}

inline void from_json(const nlohmann::json& j, RidgeModel& m) {
  m.weights = j.at("weights").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  m.lambda = j.at("lambda").get<double>();
}

/// L2-penalised least squares with an unpenalised intercept. Columns and
/// target are centred, then the augmented system [Zc; sqrt(lambda) I] w =
/// [yc; 0] is solved by column-pivoting Householder QR, which yields the
/// same w as (Zc'Zc + lambda I) w = Zc'yc without squaring the condition
/// number.
inline RidgeModel fit_ridge(const FeatureMatrix& Z, std::span<const double> y, double lambda) {
  const auto n = static_cast<Eigen::Index>(Z.rows());
  const auto m = static_cast<Eigen::Index>(Z.cols());
  if (static_cast<std::size_t>(n) != y.size()) throw DimensionMismatch("fit_ridge: Z and y lengths differ");
  if (!(lambda >= 0.0)) throw InvalidArgument("ridge lambda must be >= 0");
  if (n == 0 || m == 0) throw InvalidArgument("fit_ridge needs a non-empty design");

  Eigen::VectorXd zbar = Eigen::VectorXd::Zero(m);
  double ybar = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) zbar[j] += Z(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    ybar += y[static_cast<std::size_t>(i)];
  }
  zbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j)
      A(i, j) = Z(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) - zbar[j];
    b[i] = y[static_cast<std::size_t>(i)] - ybar;
  }
  const double root = std::sqrt(lambda);
  for (Eigen::Index j = 0; j < m; ++j) A(n + j, j) = root;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < m) throw SingularSystem("ridge system is rank-deficient; use lambda > 0");
  const Eigen::VectorXd w = qr.solve(b);

  RidgeModel model;
  model.lambda = lambda;
  model.weights.assign(w.data(), w.data() + m);
  model.intercept = ybar - w.dot(zbar);
  return model;
}

}  // namespace tabens
