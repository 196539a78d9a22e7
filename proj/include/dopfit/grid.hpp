#pragma once

#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "dopfit/error.hpp"

namespace dopfit {

/// Sample abscissae together with the centred, unit-norm transform the basis
/// is synthesised on.
///
/// `x_prime` is the derivative of the transformed abscissa with respect to the
/// original one. It stays empty until the first-degree initialisation of a
/// basis fills it in; `derivative_scale()` gives the analytic value at any time.
struct Grid {
  Eigen::VectorXd x_raw;
  Eigen::VectorXd x;
  Eigen::VectorXd x_prime;
  double center = 0.0;
  double scale = 1.0;  // ||x_raw - center||_2

  Eigen::Index n() const noexcept { return x_raw.size(); }
  double derivative_scale() const noexcept { return 1.0 / scale; }
};

namespace detail {

inline void check_abscissa(const Eigen::VectorXd& x_raw) {
  if (x_raw.size() < 2) {
    throw Error(ErrorCode::TooFewSamples,
                "need at least 2 samples, got " + std::to_string(x_raw.size()));
  }
  for (Eigen::Index i = 0; i < x_raw.size(); ++i) {
    if (!std::isfinite(x_raw[i])) {
      throw Error(ErrorCode::InvalidArgument, "abscissa " + std::to_string(i) + " is not finite");
    }
  }
  for (Eigen::Index i = 1; i < x_raw.size(); ++i) {
    if (x_raw[i] == x_raw[i - 1]) {
      throw Error(ErrorCode::DuplicateAbscissa, "x[" + std::to_string(i - 1) + "] == x[" +
                                                    std::to_string(i) + "]");
    }
  }
  for (Eigen::Index i = 1; i < x_raw.size(); ++i) {
    if (x_raw[i] < x_raw[i - 1]) {
      // unsorted input may still hide an equal pair further apart
      for (Eigen::Index a = 0; a < x_raw.size(); ++a) {
        for (Eigen::Index b = a + 1; b < x_raw.size(); ++b) {
          if (x_raw[a] == x_raw[b]) {
            throw Error(ErrorCode::DuplicateAbscissa, "x[" + std::to_string(a) + "] == x[" +
                                                          std::to_string(b) + "]");
          }
        }
      }
      throw Error(ErrorCode::NonMonotonicAbscissa,
                  "abscissa must be strictly increasing (violated at index " + std::to_string(i) +
                      ")");
    }
  }
}

}  // namespace detail

/// Centres the abscissa at the origin and scales it to unit Euclidean norm.
inline Grid normalize_abscissa(const Eigen::VectorXd& x_raw) {
  detail::check_abscissa(x_raw);
  Grid grid;
  grid.x_raw = x_raw;
  grid.center = x_raw.mean();
  Eigen::VectorXd centred = x_raw.array() - grid.center;
  grid.scale = centred.norm();
  if (!(grid.scale > 0.0) || !std::isfinite(grid.scale)) {
    throw Error(ErrorCode::DegenerateGrid, "abscissa spread is zero or not finite");
  }
  grid.x = centred / grid.scale;
  return grid;
}

inline Grid normalize_abscissa(std::span<const double> x_raw) {
  return normalize_abscissa(
      Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(x_raw.data(), std::ssize(x_raw))));
}

/// `n` equally spaced points on [lo, hi], both ends included.
inline Eigen::VectorXd equally_spaced(Eigen::Index n, double lo, double hi) {
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
  if (!(lo < hi)) throw Error(ErrorCode::InvalidRange, "range must satisfy lo < hi");
  return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

}  // namespace dopfit
