#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dopfit/dopfit.hpp"

namespace dopfit::test {

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

/// Strictly increasing abscissa on [lo, hi]: sorted uniform draws, re-drawn
/// until every gap exceeds a small fraction of the mean spacing.
inline Eigen::VectorXd random_grid(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double min_gap = 0.05 * (hi - lo) / static_cast<double>(n);
  for (;;) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = u(rng);
    std::sort(v.begin(), v.end());
    bool ok = true;
    for (std::size_t i = 1; i < v.size(); ++i) ok = ok && v[i] - v[i - 1] > min_gap;
    if (ok) return Eigen::Map<Eigen::VectorXd>(v.data(), n);
  }
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

/// Value and derivative of a polynomial with ascending coefficients.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> eval_poly(const std::vector<double>& c,
                                                             const Eigen::VectorXd& x) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd dy = Eigen::VectorXd::Zero(x.size());
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    dy = dy.cwiseProduct(x) + y;
    y = (y.cwiseProduct(x)).array() + *it;
  }
  return {y, dy};
}

/// Chebyshev basis T_k on the affine map of [x_min, x_max] to [-1, 1], with
/// derivatives in original-abscissa units. Independent of the library's
/// basis construction; used as a normal-equation oracle.
struct ChebyshevBasis {
  Eigen::MatrixXd b;
  Eigen::MatrixXd b_prime;
};

inline ChebyshevBasis chebyshev_basis(const Eigen::VectorXd& x_raw, int degree) {
  const double lo = x_raw.minCoeff(), hi = x_raw.maxCoeff();
  const double half = 0.5 * (hi - lo);
  const Eigen::VectorXd t = (x_raw.array() - 0.5 * (hi + lo)) / half;
  const Eigen::Index n = x_raw.size();
  ChebyshevBasis cb{Eigen::MatrixXd(n, degree + 1), Eigen::MatrixXd(n, degree + 1)};
  // T_k′ via U_{k−1}:  T_k′ = k·U_{k−1}
  Eigen::MatrixXd u(n, degree + 1);
  cb.b.col(0).setOnes();
  u.col(0).setOnes();
  if (degree >= 1) {
    cb.b.col(1) = t;
    u.col(1) = 2.0 * t;
  }
  for (int k = 2; k <= degree; ++k) {
    cb.b.col(k) = 2.0 * t.cwiseProduct(cb.b.col(k - 1)) - cb.b.col(k - 2);
    u.col(k) = 2.0 * t.cwiseProduct(u.col(k - 1)) - u.col(k - 2);
  }
  cb.b_prime.col(0).setZero();
  for (int k = 1; k <= degree; ++k) cb.b_prime.col(k) = (static_cast<double>(k) / half) * u.col(k - 1);
  return cb;
}

/// Solves the weighted normal equations in the Chebyshev basis with a
/// pivoted QR of the stacked whitened design, independently of the library.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> chebyshev_oracle_fit(const Eigen::VectorXd& x_raw,
                                                                         const Eigen::VectorXd& w_y,
                                                                         const Eigen::VectorXd& w_dy,
                                                                         const Observations& obs, int degree) {
  const ChebyshevBasis cb = chebyshev_basis(x_raw, degree);
  const Eigen::Index n = x_raw.size();
  Eigen::MatrixXd a(2 * n, degree + 1);
  Eigen::VectorXd rhs(2 * n);
  a.topRows(n) = w_y.cwiseSqrt().asDiagonal() * cb.b;
  a.bottomRows(n) = w_dy.cwiseSqrt().asDiagonal() * cb.b_prime;
  rhs.head(n) = w_y.cwiseSqrt().cwiseProduct(obs.y_hat);
  rhs.tail(n) = w_dy.cwiseSqrt().cwiseProduct(obs.y_hat_prime);
  const Eigen::VectorXd theta = a.colPivHouseholderQr().solve(rhs);
  return {cb.b * theta, cb.b_prime * theta};
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dopfit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace dopfit::test
