#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "dopfit/error.hpp"
#include "dopfit/fit.hpp"
#include "dopfit/grid.hpp"
#include "dopfit/weights.hpp"

namespace dopfit {

/// Which abscissa the monomials are built on.
enum class AbscissaMode {
  Normalized,  // same centred, unit-norm transform as the orthogonal basis
  Raw,         // original abscissa, no transform
};

/// Monomial (Vandermonde) basis with chain-rule derivative columns in
/// original-abscissa units.
struct VandermondeBasis {
  Eigen::MatrixXd b;
  Eigen::MatrixXd b_prime;

  int degree() const noexcept { return static_cast<int>(b.cols()) - 1; }
  Eigen::Index n() const noexcept { return b.rows(); }
};

inline VandermondeBasis vandermonde_basis(const Eigen::VectorXd& x_raw, int degree,
                                          AbscissaMode mode = AbscissaMode::Normalized) {
  if (degree < 0) throw Error(ErrorCode::DegreeOutOfRange, "degree must be >= 0");
  const Grid grid = normalize_abscissa(x_raw);
  const Eigen::VectorXd& x = mode == AbscissaMode::Normalized ? grid.x : grid.x_raw;
  const double dx = mode == AbscissaMode::Normalized ? grid.derivative_scale() : 1.0;

  const Eigen::Index n = x.size();
  VandermondeBasis vb{Eigen::MatrixXd(n, degree + 1), Eigen::MatrixXd(n, degree + 1)};
  vb.b.col(0).setOnes();
  vb.b_prime.col(0).setZero();
  for (int i = 1; i <= degree; ++i) {
    vb.b.col(i) = vb.b.col(i - 1).cwiseProduct(x);
    vb.b_prime.col(i) = (static_cast<double>(i) * dx) * vb.b.col(i - 1);
  }
  return vb;
}

/// BᵀW_yB + B′ᵀW_dyB′ for an arbitrary value/derivative column pair, symmetrised.
inline Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& b, const Eigen::MatrixXd& b_prime,
                                     const WeightModel& weights) {
  Eigen::MatrixXd g = b.transpose() * weights.apply_y(b) + b_prime.transpose() * weights.apply_dy(b_prime);
  return 0.5 * (g + g.transpose());
}

/// Solves the weighted normal equations
///   (BᵀW_yB + B′ᵀW_dyB′)·θ = BᵀW_yŷ + B′ᵀW_dyŷ′
/// by Cholesky factorisation. Numerical singularity is reported, never regularised.
inline Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& b, const Eigen::MatrixXd& b_prime,
                                              const WeightModel& weights, const Observations& obs) {
  if (b.rows() != weights.n() || b_prime.rows() != weights.n() || b.cols() != b_prime.cols() ||
      obs.y_hat.size() != weights.n() || obs.y_hat_prime.size() != weights.n()) {
    throw Error(ErrorCode::DimensionMismatch, "normal equation operands disagree in size");
  }
  const Eigen::MatrixXd gram = weighted_gram(b, b_prime, weights);
  const Eigen::VectorXd rhs =
      b.transpose() * weights.apply_y(obs.y_hat) + b_prime.transpose() * weights.apply_dy(obs.y_hat_prime);

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "Gram matrix is not numerically positive definite");
  }
  const double rcond = llt.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    throw Error(ErrorCode::SingularSystem,
                "Gram matrix reciprocal condition estimate " + std::to_string(rcond) + " is below machine epsilon");
  }
  Eigen::VectorXd theta = llt.solve(rhs);
  if (!theta.allFinite()) {
    throw Error(ErrorCode::SingularSystem, "normal equation solve produced non-finite coefficients");
  }
  return theta;
}

inline Eigen::VectorXd solve_normal_equations(const VandermondeBasis& vb, const WeightModel& weights,
                                              const Observations& obs) {
  return solve_normal_equations(vb.b, vb.b_prime, weights, obs);
}

inline std::pair<Eigen::VectorXd, Eigen::VectorXd> reconstruct(const VandermondeBasis& vb,
                                                               const Eigen::VectorXd& theta) {
  if (theta.size() != vb.b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient count does not match the Vandermonde basis");
  }
  return {vb.b * theta, vb.b_prime * theta};
}

/// 2-norm condition number of the weighted Gram matrix; +inf once it is no
/// longer numerically positive definite.
inline double gram_condition_number(const Eigen::MatrixXd& b, const Eigen::MatrixXd& b_prime,
                                    const WeightModel& weights) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(weighted_gram(b, b_prime, weights),
                                                     Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace dopfit
