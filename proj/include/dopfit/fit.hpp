#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <utility>

#include <Eigen/Dense>

#include "dopfit/basis.hpp"
#include "dopfit/error.hpp"

namespace dopfit {

/// Noisy samples of the values and first derivatives at the grid abscissae.
struct Observations {
  Eigen::VectorXd y_hat;
  Eigen::VectorXd y_hat_prime;

  Eigen::Index n() const noexcept { return y_hat.size(); }
};

struct HermiteFit {
  Eigen::VectorXd gamma;
  Eigen::VectorXd y_tilde;
  Eigen::VectorXd y_tilde_prime;
  Eigen::MatrixXd cov_gamma;
  Eigen::MatrixXd cov_y;
  Eigen::MatrixXd cov_dy;

  /// Per-sample standard deviations of the reconstruction.
  Eigen::VectorXd sd_y() const { return cov_y.diagonal().cwiseMax(0.0).cwiseSqrt(); }
  Eigen::VectorXd sd_dy() const { return cov_dy.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

struct PropagatedCovariance {
  Eigen::MatrixXd cov_gamma;
  Eigen::MatrixXd cov_y_tilde;
  Eigen::MatrixXd cov_dy_tilde;
  /// True when W·Λ·W = W holds in both channels, i.e. the covariances are
  /// (pseudo-)inverses of the synthesis weights.
  bool consistent = false;
  /// When consistent: ‖Λ_γ − I‖_F and the largest relative gap between the
  /// general block formula and the simplified forms P·Pᵀ, P′·P′ᵀ.
  double identity_residual = 0.0;
  double simplification_gap = 0.0;
};

namespace detail {

inline void check_observations(const BasisSet& basis, const Observations& obs) {
  if (obs.y_hat.size() != basis.n() || obs.y_hat_prime.size() != basis.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "observations have " + std::to_string(obs.y_hat.size()) + "/" +
                    std::to_string(obs.y_hat_prime.size()) + " samples, basis has " +
                    std::to_string(basis.n()));
  }
  if (!obs.y_hat.allFinite() || !obs.y_hat_prime.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "observations must be finite");
  }
}

inline double relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace detail

/// γ = PᵀW_yŷ + P′ᵀW_dyŷ′. No linear system is solved.
inline Eigen::VectorXd fit_coefficients(const BasisSet& basis, const Observations& obs) {
  detail::check_observations(basis, obs);
  const WeightModel& w = basis.weights();
  return basis.p().transpose() * w.apply_y(obs.y_hat) +
         basis.p_prime().transpose() * w.apply_dy(obs.y_hat_prime);
}

inline std::pair<Eigen::VectorXd, Eigen::VectorXd> reconstruct(const BasisSet& basis,
                                                               const Eigen::VectorXd& gamma) {
  if (gamma.size() != basis.degree() + 1) {
    throw Error(ErrorCode::DimensionMismatch, "gamma has " + std::to_string(gamma.size()) +
                                                  " entries, basis has " +
                                                  std::to_string(basis.degree() + 1) + " columns");
  }
  return {basis.p() * gamma, basis.p_prime() * gamma};
}

/// Propagates value/derivative covariances through the coefficient map
/// γ = P_cᵀW_c·ŷ_c using the general block form.
inline PropagatedCovariance propagate_covariance(const BasisSet& basis, const Eigen::MatrixXd& cov_y,
                                                 const Eigen::MatrixXd& cov_dy) {
  const Eigen::Index n = basis.n();
  if (cov_y.rows() != n || cov_y.cols() != n || cov_dy.rows() != n || cov_dy.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "covariance matrices must be n x n");
  }
  // validate as PSD; the validated copies are discarded
  (void)WeightModel::from_matrices(cov_y, cov_dy);

  const WeightModel& w = basis.weights();
  const Eigen::MatrixXd& p = basis.p();
  const Eigen::MatrixXd& pp = basis.p_prime();
  // rows of A = P_cᵀW_c, split per channel
  const Eigen::MatrixXd wy_p = w.apply_y(p);
  const Eigen::MatrixXd wdy_pp = w.apply_dy(pp);

  PropagatedCovariance out;
  out.cov_gamma = wy_p.transpose() * cov_y * wy_p + wdy_pp.transpose() * cov_dy * wdy_pp;
  out.cov_gamma = 0.5 * (out.cov_gamma + out.cov_gamma.transpose());
  out.cov_y_tilde = p * out.cov_gamma * p.transpose();
  out.cov_dy_tilde = pp * out.cov_gamma * pp.transpose();

  const Eigen::MatrixXd wy = w.dense_y();
  const Eigen::MatrixXd wdy = w.dense_dy();
  constexpr double kConsistencyTolerance = 1e-9;
  const auto reproduces = [&](const Eigen::MatrixXd& wm, const Eigen::MatrixXd& cov) {
    const double scale = wm.norm();
    return scale == 0.0 || (wm * cov * wm - wm).norm() <= kConsistencyTolerance * scale;
  };
  out.consistent = reproduces(wy, cov_y) && reproduces(wdy, cov_dy);
  if (out.consistent) {
    const Eigen::Index m = out.cov_gamma.rows();
    out.identity_residual = (out.cov_gamma - Eigen::MatrixXd::Identity(m, m)).norm();
    out.simplification_gap = std::max(detail::relative_gap(out.cov_y_tilde, p * p.transpose()),
                                      detail::relative_gap(out.cov_dy_tilde, pp * pp.transpose()));
  }
  return out;
}

/// Full fit with the covariances of the consistent case (weights are the
/// inverse noise covariances): Λ_γ = I, Λ_ỹ = P·Pᵀ, Λ_ỹ′ = P′·P′ᵀ.
inline HermiteFit fit(const BasisSet& basis, const Observations& obs) {
  HermiteFit out;
  out.gamma = fit_coefficients(basis, obs);
  std::tie(out.y_tilde, out.y_tilde_prime) = reconstruct(basis, out.gamma);
  const Eigen::Index m = out.gamma.size();
  out.cov_gamma = Eigen::MatrixXd::Identity(m, m);
  out.cov_y = basis.p() * basis.p().transpose();
  out.cov_dy = basis.p_prime() * basis.p_prime().transpose();
  return out;
}

}  // namespace dopfit
