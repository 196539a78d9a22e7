#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dopfit/baseline.hpp"
#include "dopfit/basis.hpp"
#include "dopfit/error.hpp"
#include "dopfit/grid.hpp"
#include "dopfit/weights.hpp"

namespace dopfit {

/// Significant digits of an error measure, -log10(eps); +inf for eps == 0.
inline double significant_digits(double eps) {
  eps = std::abs(eps);
  if (eps == 0.0) return std::numeric_limits<double>::infinity();
  return 0.0 - std::log10(eps);
}

/// Deviation of a basis from exact weighted orthonormality.
struct QualityReport {
  double eps_max = 0.0;
  double eps_frob = 0.0;
  double eps_det = 0.0;
  double eps_cond = 0.0;
  int eps_rank = 0;
  /// Set when the basis could not be orthonormalised at all (Vandermonde
  /// Gram not positive definite). The continuous measures are then 1.
  bool failed = false;

  double eta_max() const { return significant_digits(eps_max); }
  double eta_frob() const { return significant_digits(eps_frob); }
  double eta_det() const { return significant_digits(eps_det); }
  double eta_cond() const { return significant_digits(eps_cond); }
  double eta_rank() const { return significant_digits(static_cast<double>(eps_rank)); }
};

/// R = I − (PᵀW_yP + P′ᵀW_dyP′).
inline Eigen::MatrixXd residual_matrix(const BasisSet& basis) {
  const Eigen::Index m = basis.degree() + 1;
  return Eigen::MatrixXd::Identity(m, m) - basis.gram();
}

namespace detail {

/// W_c^{1/2}·[B; B′], the stacked weighted design.
inline Eigen::MatrixXd stacked_weighted(const Eigen::MatrixXd& b, const Eigen::MatrixXd& b_prime,
                                        const WeightModel& weights) {
  Eigen::MatrixXd u(2 * b.rows(), b.cols());
  u.topRows(b.rows()) = weights.apply_sqrt_y(b);
  u.bottomRows(b.rows()) = weights.apply_sqrt_dy(b_prime);
  return u;
}

inline int numerical_rank(const Eigen::VectorXd& sv, Eigen::Index rows, Eigen::Index cols) {
  if (sv.size() == 0) return 0;
  const double tol = static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() *
                     sv.maxCoeff();
  return static_cast<int>((sv.array() > tol).count());
}

inline QualityReport measures_from(const Eigen::MatrixXd& r, const Eigen::MatrixXd& u) {
  QualityReport q;
  q.eps_max = r.cwiseAbs().maxCoeff();
  q.eps_frob = r.norm();
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(u).singularValues();
  // |det U| for a complete (square) basis; product of singular values otherwise
  double det = 1.0;
  if (u.rows() == u.cols()) {
    det = std::abs(u.partialPivLu().determinant());
  } else {
    for (Eigen::Index i = 0; i < sv.size(); ++i) det *= sv[i];
  }
  q.eps_det = std::abs(1.0 - det);
  const double smin = sv.minCoeff();
  const double cond = smin > 0.0 ? sv.maxCoeff() / smin : std::numeric_limits<double>::infinity();
  q.eps_cond = std::abs(1.0 - cond);
  q.eps_rank = static_cast<int>(u.cols()) - numerical_rank(sv, u.rows(), u.cols());
  return q;
}

}  // namespace detail

/// The five error measures of U = W_c^{1/2}·P_c and R = I − UᵀU for a
/// synthesised orthogonal basis.
inline QualityReport quality_measures(const BasisSet& basis) {
  const Eigen::MatrixXd u = detail::stacked_weighted(basis.p(), basis.p_prime(), basis.weights());
  return detail::measures_from(residual_matrix(basis), u);
}

/// Measures for a non-orthogonal basis after symmetric orthonormalisation
/// through its Gram matrix G = B_cᵀW_cB_c:  R = I − G^{-1/2}·G·G^{-1/2},
/// U = W_c^{1/2}·B_c·G^{-1/2}. A Gram matrix that is not numerically positive
/// definite cannot be orthonormalised; the report is then marked failed.
inline QualityReport gram_orthonormality_measures(const Eigen::MatrixXd& b, const Eigen::MatrixXd& b_prime,
                                                  const WeightModel& weights) {
  const Eigen::MatrixXd w_b = detail::stacked_weighted(b, b_prime, weights);
  const Eigen::MatrixXd gram = weighted_gram(b, b_prime, weights);
  const Eigen::Index m = gram.rows();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double tiny = static_cast<double>(m) * std::numeric_limits<double>::epsilon() * lambda.cwiseAbs().maxCoeff();
  if (eig.info() != Eigen::Success || !(lambda.minCoeff() > tiny)) {
    QualityReport q;
    q.failed = true;
    q.eps_max = q.eps_frob = q.eps_det = q.eps_cond = 1.0;
    const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(w_b).singularValues();
    q.eps_rank = static_cast<int>(m) - detail::numerical_rank(sv, w_b.rows(), w_b.cols());
    return q;
  }
  const Eigen::MatrixXd inv_sqrt =
      eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m) - inv_sqrt * gram * inv_sqrt;
  r = 0.5 * (r + r.transpose());
  return detail::measures_from(r, w_b * inv_sqrt);
}

inline QualityReport quality_measures(const VandermondeBasis& vb, const WeightModel& weights) {
  return gram_orthonormality_measures(vb.b, vb.b_prime, weights);
}

/// One (n, d) row of a sweep: the orthogonal basis and the Vandermonde basis
/// evaluated on the same grid and weights. A failed synthesis leaves the
/// report empty and records the message.
struct SweepRow {
  Eigen::Index n = 0;
  int degree = 0;
  std::optional<QualityReport> dop;
  std::optional<QualityReport> vandermonde;
  std::string dop_error;
  std::string vandermonde_error;
};

struct SweepGridOptions {
  double x_lo = -1.0;
  double x_hi = 1.0;
  AbscissaMode vandermonde_mode = AbscissaMode::Normalized;
};

inline SweepRow sweep_row(Eigen::Index n, int degree, double sigma_y, double sigma_dy,
                          const SweepGridOptions& options = {}) {
  SweepRow row;
  row.n = n;
  row.degree = degree;
  Eigen::VectorXd x;
  std::shared_ptr<const WeightModel> weights;
  try {
    x = equally_spaced(n, options.x_lo, options.x_hi);
    weights = std::make_shared<const WeightModel>(WeightModel::from_scalar(n, sigma_y, sigma_dy));
  } catch (const Error& e) {
    row.dop_error = row.vandermonde_error = e.what();
    return row;
  }
  try {
    row.dop = quality_measures(synthesize_basis(x, weights, degree));
  } catch (const Error& e) {
    row.dop_error = e.what();
  }
  try {
    row.vandermonde = quality_measures(vandermonde_basis(x, degree, options.vandermonde_mode), *weights);
  } catch (const Error& e) {
    row.vandermonde_error = e.what();
  }
  return row;
}

/// Complete bases, d = 2n − 1, for each n.
inline std::vector<SweepRow> sweep_complete(const std::vector<Eigen::Index>& n_values, double sigma_y,
                                            double sigma_dy, const SweepGridOptions& options = {}) {
  std::vector<SweepRow> rows;
  rows.reserve(n_values.size());
  for (const Eigen::Index n : n_values) {
    if (n < 2) throw Error(ErrorCode::TooFewSamples, "sweep requires n >= 2, got " + std::to_string(n));
  }
  for (const Eigen::Index n : n_values) {
    rows.push_back(sweep_row(n, static_cast<int>(2 * n - 1), sigma_y, sigma_dy, options));
  }
  return rows;
}

/// Incomplete bases at a fixed n over a list of degrees.
inline std::vector<SweepRow> sweep_incomplete(Eigen::Index n, const std::vector<int>& degrees, double sigma_y,
                                              double sigma_dy, const SweepGridOptions& options = {}) {
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "sweep requires n >= 2");
  for (const int d : degrees) {
    if (d < 0 || d > 2 * n - 1) {
      throw Error(ErrorCode::DegreeOutOfRange, "degree " + std::to_string(d) + " outside [0, 2n-1]");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(degrees.size());
  for (const int d : degrees) rows.push_back(sweep_row(n, d, sigma_y, sigma_dy, options));
  return rows;
}

namespace detail {

inline void write_number(std::ostream& os, double v) {
  if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
  } else if (std::isnan(v)) {
    os << "nan";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  }
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace detail

inline constexpr const char* kSweepCsvHeader =
    "n,d,method,eps_max,eps_frob,eps_det,eps_cond,eps_rank,eta_max,eta_frob,eta_det,eta_cond,eta_rank,error";

/// Two lines per row (method = dop, vandermonde). Failed rows carry empty
/// measure fields and the message in `error`.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepCsvHeader << '\n';
  const auto line = [&](const SweepRow& row, const char* method, const std::optional<QualityReport>& q,
                        const std::string& error) {
    os << row.n << ',' << row.degree << ',' << method;
    if (q) {
      for (const double v : {q->eps_max, q->eps_frob, q->eps_det, q->eps_cond}) {
        os << ',';
        detail::write_number(os, v);
      }
      os << ',' << q->eps_rank;
      for (const double v : {q->eta_max(), q->eta_frob(), q->eta_det(), q->eta_cond(), q->eta_rank()}) {
        os << ',';
        detail::write_number(os, v);
      }
      os << ',' << (q->failed ? "gram not positive definite" : "");
    } else {
      os << ",,,,,,,,,,," << detail::csv_escape(error);
    }
    os << '\n';
  };
  for (const SweepRow& row : rows) {
    line(row, "dop", row.dop, row.dop_error);
    line(row, "vandermonde", row.vandermonde, row.vandermonde_error);
  }
}

}  // namespace dopfit
