#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "dopfit/error.hpp"
#include "dopfit/grid.hpp"
#include "dopfit/weights.hpp"

namespace dopfit {

/// Covariance-weighted discrete orthogonal polynomials and their derivatives.
///
/// Column i of `p()` is a polynomial of degree i sampled on the grid, column i
/// of `p_prime()` its derivative with respect to the original abscissa. The
/// columns satisfy PᵀW_yP + P′ᵀW_dyP′ = I up to rounding. Instances are
/// immutable once built and can be shared between threads.
class BasisSet {
 public:
  BasisSet(Eigen::MatrixXd p, Eigen::MatrixXd p_prime, std::shared_ptr<const Grid> grid,
           std::shared_ptr<const WeightModel> weights)
      : p_(std::move(p)), p_prime_(std::move(p_prime)), grid_(std::move(grid)), weights_(std::move(weights)) {
    if (p_.rows() != p_prime_.rows() || p_.cols() != p_prime_.cols() || p_.cols() < 1 ||
        p_.rows() != grid_->n() || p_.rows() != weights_->n()) {
      throw Error(ErrorCode::DimensionMismatch, "basis matrices do not match grid and weights");
    }
  }

  const Eigen::MatrixXd& p() const noexcept { return p_; }
  const Eigen::MatrixXd& p_prime() const noexcept { return p_prime_; }
  int degree() const noexcept { return static_cast<int>(p_.cols()) - 1; }
  Eigen::Index n() const noexcept { return p_.rows(); }
  const Grid& grid() const noexcept { return *grid_; }
  const WeightModel& weights() const noexcept { return *weights_; }
  const std::shared_ptr<const Grid>& grid_ptr() const noexcept { return grid_; }
  const std::shared_ptr<const WeightModel>& weights_ptr() const noexcept { return weights_; }

  /// PᵀW_yP + P′ᵀW_dyP′, symmetrised.
  Eigen::MatrixXd gram() const {
    Eigen::MatrixXd g = p_.transpose() * weights_->apply_y(p_) +
                        p_prime_.transpose() * weights_->apply_dy(p_prime_);
    return 0.5 * (g + g.transpose());
  }

 private:
  Eigen::MatrixXd p_;
  Eigen::MatrixXd p_prime_;
  std::shared_ptr<const Grid> grid_;
  std::shared_ptr<const WeightModel> weights_;
};

/// Intermediate quantities of one recurrence step, exposed for inspection and tests.
struct RecurrenceScratch {
  Eigen::VectorXd u;        // x ∘ p_k
  Eigen::VectorXd v;        // x ∘ p_k′ + x′ ∘ p_k
  Eigen::VectorXd beta;     // projections onto the existing columns
  Eigen::VectorXd c;        // candidate column before normalisation
  Eigen::VectorXd c_prime;
  double alpha = 0.0;
};

struct ZeroDegree {
  Eigen::VectorXd p0;
  Eigen::VectorXd p0_prime;
};

struct FirstDegree {
  Eigen::VectorXd p1;
  Eigen::VectorXd p1_prime;
  Eigen::VectorXd x_prime;
};

namespace detail {

inline void check_sizes(const Grid& grid, const WeightModel& weights) {
  if (grid.n() != weights.n()) {
    throw Error(ErrorCode::DimensionMismatch, "grid has " + std::to_string(grid.n()) +
                                                  " samples but weights have " +
                                                  std::to_string(weights.n()));
  }
}

/// Rejects a candidate whose weighted norm has collapsed relative to the
/// vector it was projected from.
inline constexpr double kRankExhaustedFactor = std::numeric_limits<double>::epsilon();

/// One step of the recurrence with full re-orthogonalisation. Columns
/// [0, k] of `p`/`p_prime` must be filled; column k + 1 is written.
inline RecurrenceScratch append_degree(Eigen::MatrixXd& p, Eigen::MatrixXd& p_prime, Eigen::Index k,
                                       const Grid& grid, const WeightModel& weights) {
  const Eigen::Index n = p.rows();
  if (grid.x_prime.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "grid derivative scale has not been initialised");
  }
  if (k + 2 > weights.effective_dimension()) {
    throw Error(ErrorCode::RankExhausted,
                "degree " + std::to_string(k + 1) + " exceeds the weighted data dimension " +
                    std::to_string(weights.effective_dimension()));
  }
  const auto pk = p.leftCols(k + 1);
  const auto pk_prime = p_prime.leftCols(k + 1);

  RecurrenceScratch s;
  s.u = grid.x.cwiseProduct(p.col(k));
  s.v = grid.x.cwiseProduct(p_prime.col(k)) + grid.x_prime.cwiseProduct(p.col(k));
  s.beta = pk.transpose() * weights.apply_y(s.u) + pk_prime.transpose() * weights.apply_dy(s.v);
  s.c = s.u - pk * s.beta;
  s.c_prime = s.v - pk_prime * s.beta;

  const double norm2 = weights.inner(s.c, s.c_prime, s.c, s.c_prime);
  const double ref2 = weights.inner(s.u, s.v, s.u, s.v);
  const double threshold = static_cast<double>(n) * kRankExhaustedFactor * std::sqrt(ref2);
  if (!(norm2 > 0.0) || !std::isfinite(norm2) || std::sqrt(norm2) <= threshold) {
    throw Error(ErrorCode::RankExhausted,
                "no independent direction left for degree " + std::to_string(k + 1));
  }
  s.alpha = 1.0 / std::sqrt(norm2);
  p.col(k + 1) = s.alpha * s.c;
  p_prime.col(k + 1) = s.alpha * s.c_prime;
  return s;
}

}  // namespace detail

/// Normalised constant: p0 = e / sqrt(eᵀW_ye), p0′ = 0.
inline ZeroDegree init_zero_degree(const Grid& grid, const WeightModel& weights) {
  detail::check_sizes(grid, weights);
  const Eigen::Index n = grid.n();
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  const double s = e.dot(weights.apply_y(e).col(0));
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::DegenerateWeights, "value weights give the constant function zero norm");
  }
  return {e / std::sqrt(s), Eigen::VectorXd::Zero(n)};
}

/// First-degree column and the derivative scale x′ of the transformed abscissa.
inline FirstDegree init_first_degree(const Grid& grid, const WeightModel& weights,
                                     const Eigen::VectorXd& p0, const Eigen::VectorXd& p0_prime) {
  detail::check_sizes(grid, weights);
  const Eigen::Index n = grid.n();
  if (p0.size() != n || p0_prime.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "p0 does not match the grid");
  }
  if (weights.effective_dimension() < 2) {
    throw Error(ErrorCode::RankExhausted, "weighted data dimension is below 2");
  }
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  const double s = e.dot(weights.apply_y(e).col(0));

  const Eigen::VectorXd u1 = grid.x.cwiseProduct(p0);
  const Eigen::VectorXd p1_hat = u1 - p0 * p0.dot(weights.apply_y(u1).col(0));
  const double slope = (p1_hat[n - 1] - p1_hat[0]) / (grid.x_raw[n - 1] - grid.x_raw[0]);

  FirstDegree out;
  out.x_prime = Eigen::VectorXd::Constant(n, std::sqrt(s) * slope);
  const Eigen::VectorXd p1_hat_prime = out.x_prime.cwiseProduct(p0);
  const double norm2 = weights.inner(p1_hat, p1_hat_prime, p1_hat, p1_hat_prime);
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    throw Error(ErrorCode::DegenerateGrid, "first-degree candidate has zero weighted norm");
  }
  const double alpha1 = 1.0 / std::sqrt(norm2);
  out.p1 = alpha1 * p1_hat;
  out.p1_prime = alpha1 * p1_hat_prime;
  return out;
}

/// Returns a copy of `basis` extended by one degree.
inline BasisSet extend_basis(const BasisSet& basis, RecurrenceScratch* scratch = nullptr) {
  const Eigen::Index k = basis.degree();
  Eigen::MatrixXd p(basis.n(), k + 2);
  Eigen::MatrixXd p_prime(basis.n(), k + 2);
  p.leftCols(k + 1) = basis.p();
  p_prime.leftCols(k + 1) = basis.p_prime();

  std::shared_ptr<const Grid> grid = basis.grid_ptr();
  if (k == 0 && grid->x_prime.size() != grid->n()) {
    // a degree-0 basis never ran the first-degree initialisation
    auto filled = std::make_shared<Grid>(*grid);
    filled->x_prime = init_first_degree(*grid, basis.weights(), basis.p().col(0),
                                        basis.p_prime().col(0)).x_prime;
    grid = std::move(filled);
  }
  RecurrenceScratch s = detail::append_degree(p, p_prime, k, *grid, basis.weights());
  if (scratch != nullptr) *scratch = std::move(s);
  return BasisSet(std::move(p), std::move(p_prime), std::move(grid), basis.weights_ptr());
}

/// Builds the basis of the requested degree on `x_raw`.
inline BasisSet synthesize_basis(const Eigen::VectorXd& x_raw, std::shared_ptr<const WeightModel> weights,
                                 int degree) {
  if (!weights) throw Error(ErrorCode::InvalidArgument, "weights must not be null");
  const Eigen::Index n = x_raw.size();
  if (degree < 0 || degree > 2 * n - 1) {
    throw Error(ErrorCode::DegreeOutOfRange, "degree " + std::to_string(degree) +
                                                 " outside [0, 2n-1] for n = " + std::to_string(n));
  }
  auto grid = std::make_shared<Grid>(normalize_abscissa(x_raw));
  detail::check_sizes(*grid, *weights);

  Eigen::MatrixXd p(n, degree + 1);
  Eigen::MatrixXd p_prime(n, degree + 1);
  auto zero = init_zero_degree(*grid, *weights);
  p.col(0) = zero.p0;
  p_prime.col(0) = zero.p0_prime;
  if (degree >= 1) {
    auto first = init_first_degree(*grid, *weights, zero.p0, zero.p0_prime);
    grid->x_prime = std::move(first.x_prime);
    p.col(1) = first.p1;
    p_prime.col(1) = first.p1_prime;
  }
  for (Eigen::Index k = 1; k < degree; ++k) {
    detail::append_degree(p, p_prime, k, *grid, *weights);
  }
  return BasisSet(std::move(p), std::move(p_prime), std::move(grid), std::move(weights));
}

inline BasisSet synthesize_basis(const Eigen::VectorXd& x_raw, const WeightModel& weights, int degree) {
  return synthesize_basis(x_raw, std::make_shared<const WeightModel>(weights), degree);
}

}  // namespace dopfit
