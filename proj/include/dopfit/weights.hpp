#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dopfit/error.hpp"

namespace dopfit {

/// Symmetric positive semi-definite weight matrices (inverse covariances) for
/// the value and derivative channels.
///
/// Diagonal weights are stored as vectors and applied element-wise; full
/// matrices are validated (symmetry, eigenvalue floor) and nearly-PSD inputs
/// are clamped, with a message appended to `warnings()`.
class WeightModel {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;
  static constexpr double kEigenvalueFloor = 1e-10;

  /// Per-sample standard deviations. An infinite sigma gives weight 0
  /// (sample ignored in that channel); zero or negative sigma is rejected.
  static WeightModel from_sigmas(const Eigen::VectorXd& sigma_y, const Eigen::VectorXd& sigma_dy) {
    if (sigma_y.size() != sigma_dy.size()) {
      throw Error(ErrorCode::DimensionMismatch, "sigma_y and sigma_dy lengths differ");
    }
    WeightModel w;
    w.n_ = sigma_y.size();
    w.diagonal_ = true;
    w.diag_y_ = weights_from_sigmas(sigma_y, "sigma_y");
    w.diag_dy_ = weights_from_sigmas(sigma_dy, "sigma_dy");
    w.finish_diagonal();
    return w;
  }

  static WeightModel from_scalar(Eigen::Index n, double sigma_y, double sigma_dy) {
    return from_sigmas(Eigen::VectorXd::Constant(n, sigma_y), Eigen::VectorXd::Constant(n, sigma_dy));
  }

  /// Diagonal weights given directly (not sigmas). Entries must be finite and >= 0.
  static WeightModel from_diagonal(const Eigen::VectorXd& w_y, const Eigen::VectorXd& w_dy) {
    if (w_y.size() != w_dy.size()) {
      throw Error(ErrorCode::DimensionMismatch, "w_y and w_dy lengths differ");
    }
    for (const auto* v : {&w_y, &w_dy}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        if (!std::isfinite((*v)[i]) || (*v)[i] < 0.0) {
          throw Error(ErrorCode::NonPSDInput,
                      "diagonal weight " + std::to_string(i) + " must be finite and >= 0");
        }
      }
    }
    WeightModel w;
    w.n_ = w_y.size();
    w.diagonal_ = true;
    w.diag_y_ = w_y;
    w.diag_dy_ = w_dy;
    w.finish_diagonal();
    return w;
  }

  static WeightModel from_matrices(const Eigen::MatrixXd& w_y, const Eigen::MatrixXd& w_dy) {
    if (w_y.rows() != w_y.cols() || w_dy.rows() != w_dy.cols() || w_y.rows() != w_dy.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "weight matrices must be square and of equal size");
    }
    WeightModel w;
    w.n_ = w_y.rows();
    w.diagonal_ = false;
    w.full_y_ = validated_psd(w_y, "w_y", w.rank_y_, w.warnings_);
    w.full_dy_ = validated_psd(w_dy, "w_dy", w.rank_dy_, w.warnings_);
    return w;
  }

  /// Weights that are the (pseudo-)inverse of the given covariance matrices.
  static WeightModel from_covariances(const Eigen::MatrixXd& cov_y, const Eigen::MatrixXd& cov_dy) {
    int rank = 0;
    std::vector<std::string> sink;
    const Eigen::MatrixXd cy = validated_psd(cov_y, "cov_y", rank, sink);
    const Eigen::MatrixXd cdy = validated_psd(cov_dy, "cov_dy", rank, sink);
    WeightModel w = from_matrices(pseudo_inverse(cy), pseudo_inverse(cdy));
    w.warnings_.insert(w.warnings_.begin(), sink.begin(), sink.end());
    return w;
  }

  Eigen::Index n() const noexcept { return n_; }
  bool is_diagonal() const noexcept { return diagonal_; }
  int rank_y() const noexcept { return rank_y_; }
  int rank_dy() const noexcept { return rank_dy_; }
  /// Dimension of the weighted stacked data space, an upper bound on the
  /// number of basis vectors that can be synthesised.
  int effective_dimension() const noexcept { return rank_y_ + rank_dy_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  Eigen::VectorXd diagonal_y() const { return diagonal_ ? diag_y_ : Eigen::VectorXd(full_y_.diagonal()); }
  Eigen::VectorXd diagonal_dy() const { return diagonal_ ? diag_dy_ : Eigen::VectorXd(full_dy_.diagonal()); }

  Eigen::MatrixXd dense_y() const {
    return diagonal_ ? Eigen::MatrixXd(diag_y_.asDiagonal()) : full_y_;
  }
  Eigen::MatrixXd dense_dy() const {
    return diagonal_ ? Eigen::MatrixXd(diag_dy_.asDiagonal()) : full_dy_;
  }

  template <typename Derived>
  Eigen::MatrixXd apply_y(const Eigen::MatrixBase<Derived>& v) const {
    return diagonal_ ? Eigen::MatrixXd(diag_y_.asDiagonal() * v) : Eigen::MatrixXd(full_y_ * v);
  }
  template <typename Derived>
  Eigen::MatrixXd apply_dy(const Eigen::MatrixBase<Derived>& v) const {
    return diagonal_ ? Eigen::MatrixXd(diag_dy_.asDiagonal() * v) : Eigen::MatrixXd(full_dy_ * v);
  }

  /// aᵀ·W_y·b + a′ᵀ·W_dy·b′ for column vectors.
  template <typename A, typename Ap, typename B, typename Bp>
  double inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<Ap>& a_prime,
               const Eigen::MatrixBase<B>& b, const Eigen::MatrixBase<Bp>& b_prime) const {
    if (diagonal_) {
      return (a.array() * diag_y_.array() * b.array()).sum() +
             (a_prime.array() * diag_dy_.array() * b_prime.array()).sum();
    }
    return a.dot(full_y_ * b) + a_prime.dot(full_dy_ * b_prime);
  }

  /// Symmetric PSD square roots, used for the stacked unitary diagnostics.
  Eigen::MatrixXd sqrt_y() const { return sqrt_of(diagonal_, diag_y_, full_y_); }
  Eigen::MatrixXd sqrt_dy() const { return sqrt_of(diagonal_, diag_dy_, full_dy_); }

  /// Applies W^{1/2} to a block of columns without forming a dense diagonal.
  template <typename Derived>
  Eigen::MatrixXd apply_sqrt_y(const Eigen::MatrixBase<Derived>& v) const {
    if (diagonal_) return diag_y_.cwiseSqrt().asDiagonal() * v;
    return sqrt_y() * v;
  }
  template <typename Derived>
  Eigen::MatrixXd apply_sqrt_dy(const Eigen::MatrixBase<Derived>& v) const {
    if (diagonal_) return diag_dy_.cwiseSqrt().asDiagonal() * v;
    return sqrt_dy() * v;
  }

 private:
  static Eigen::VectorXd weights_from_sigmas(const Eigen::VectorXd& sigma, const char* name) {
    Eigen::VectorXd w(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      const double s = sigma[i];
      if (std::isnan(s)) {
        throw Error(ErrorCode::InvalidArgument, std::string(name) + "[" + std::to_string(i) + "] is NaN");
      }
      if (s < 0.0) {
        throw Error(ErrorCode::NegativeSigma, std::string(name) + "[" + std::to_string(i) + "] < 0");
      }
      if (s == 0.0) {
        throw Error(ErrorCode::ZeroSigma,
                    std::string(name) + "[" + std::to_string(i) +
                        "] == 0 would be an exact constraint; constrained fitting is not supported "
                        "(use a small positive sigma, or inf to ignore the sample)");
      }
      w[i] = std::isinf(s) ? 0.0 : 1.0 / (s * s);
      if (!std::isfinite(w[i])) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(name) + "[" + std::to_string(i) + "] is too small to invert");
      }
    }
    return w;
  }

  void finish_diagonal() {
    const auto count_rank = [](const Eigen::VectorXd& d) {
      return static_cast<int>((d.array() > 0.0).count());
    };
    rank_y_ = count_rank(diag_y_);
    rank_dy_ = count_rank(diag_dy_);
  }

  static Eigen::MatrixXd validated_psd(const Eigen::MatrixXd& m, const char* name, int& rank,
                                       std::vector<std::string>& warnings) {
    if (!m.allFinite()) {
      throw Error(ErrorCode::NonPSDInput, std::string(name) + " has non-finite entries");
    }
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
      rank = 0;
      return m;
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
      throw Error(ErrorCode::NonPSDInput, std::string(name) + " is not symmetric");
    }
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double norm2 = lambda.cwiseAbs().maxCoeff();
    if (lambda.minCoeff() < -kEigenvalueFloor * norm2) {
      throw Error(ErrorCode::NonPSDInput, std::string(name) + " has a negative eigenvalue " +
                                              std::to_string(lambda.minCoeff()));
    }
    const double rank_tol = static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon() * norm2;
    rank = static_cast<int>((lambda.array() > rank_tol).count());
    if (lambda.minCoeff() < 0.0) {
      warnings.push_back(std::string(name) + ": clamped slightly negative eigenvalue " +
                         std::to_string(lambda.minCoeff()) + " to zero");
      const Eigen::VectorXd clamped = lambda.cwiseMax(0.0);
      Eigen::MatrixXd out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
      return 0.5 * (out + out.transpose());
    }
    return sym;
  }

  static Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double tol = static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon() *
                       lambda.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda[i] > tol) inv[i] = 1.0 / lambda[i];
    }
    Eigen::MatrixXd out = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
  }

  static Eigen::MatrixXd sqrt_of(bool diagonal, const Eigen::VectorXd& d, const Eigen::MatrixXd& full) {
    if (diagonal) return Eigen::MatrixXd(d.cwiseSqrt().asDiagonal());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(full);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd out = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
  }

  Eigen::Index n_ = 0;
  bool diagonal_ = true;
  Eigen::VectorXd diag_y_, diag_dy_;
  Eigen::MatrixXd full_y_, full_dy_;
  int rank_y_ = 0;
  int rank_dy_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace dopfit
