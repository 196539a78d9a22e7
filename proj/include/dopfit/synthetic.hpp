#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dopfit/basis.hpp"
#include "dopfit/error.hpp"
#include "dopfit/fit.hpp"
#include "dopfit/grid.hpp"
#include "dopfit/weights.hpp"

namespace dopfit {

enum class SyntheticFunction {
  Cos5x,       // f(x) = cos 5x, f′(x) = −5 sin 5x
  Polynomial,  // ascending coefficients in the original abscissa
  Table,       // caller-supplied exact values and derivatives
};

struct SyntheticSpec {
  SyntheticFunction function = SyntheticFunction::Cos5x;
  std::vector<double> coefficients;  // Polynomial only
  Eigen::VectorXd table_y;           // Table only, length n
  Eigen::VectorXd table_dy;
  double x_lo = -2.0 * std::numbers::pi;
  double x_hi = 2.0 * std::numbers::pi;
  Eigen::Index n = 500;
  double sigma_y = 0.1;
  double sigma_dy = 2.0;
  std::uint64_t seed = 1;
  /// Sigmas the fit weights are built from; default to the noise levels.
  /// Needed when the noise itself is switched off.
  std::optional<double> weight_sigma_y;
  std::optional<double> weight_sigma_dy;

  double fit_sigma_y() const { return weight_sigma_y.value_or(sigma_y); }
  double fit_sigma_dy() const { return weight_sigma_dy.value_or(sigma_dy); }
};

struct SyntheticData {
  Eigen::VectorXd x_raw;
  Eigen::VectorXd y_true;
  Eigen::VectorXd dy_true;
  Observations obs;
};

struct IterationStats {
  double std_ry = 0.0;        // std(ŷ − ỹ)
  double std_rdy = 0.0;       // std(ŷ′ − ỹ′)
  double std_noise_y = 0.0;   // std(ŷ − y)
  double std_noise_dy = 0.0;  // std(ŷ′ − y′)
  double std_err_y = 0.0;     // std(y − ỹ)
  double std_err_dy = 0.0;    // std(y′ − ỹ′)
  double std_whitened = 0.0;  // std of the stacked W_c^{1/2}-weighted residual
};

struct MonteCarloResult {
  SyntheticSpec spec;
  int degree = 0;
  int n_iter = 0;
  std::uint64_t seed = 0;
  double mean_std_ry = 0.0;
  double mean_std_rdy = 0.0;
  IterationStats mean;  // arithmetic mean of every per-iteration field
  std::vector<IterationStats> per_iteration;
};

inline std::string to_string(SyntheticFunction f) {
  switch (f) {
    case SyntheticFunction::Cos5x: return "cos5x";
    case SyntheticFunction::Polynomial: return "polynomial";
    case SyntheticFunction::Table: return "table";
  }
  return "unknown";
}

namespace detail {

inline void validate(const SyntheticSpec& spec) {
  if (!(spec.x_lo < spec.x_hi) || !std::isfinite(spec.x_lo) || !std::isfinite(spec.x_hi)) {
    throw Error(ErrorCode::InvalidRange, "synthetic range must satisfy lo < hi");
  }
  if (spec.n < 2) throw Error(ErrorCode::TooFewSamples, "synthetic data needs n >= 2");
  if (!(spec.sigma_y >= 0.0) || !(spec.sigma_dy >= 0.0)) {
    throw Error(ErrorCode::NegativeSigma, "noise levels must be >= 0");
  }
  if (spec.function == SyntheticFunction::Table &&
      (spec.table_y.size() != spec.n || spec.table_dy.size() != spec.n)) {
    throw Error(ErrorCode::DimensionMismatch, "table length must equal n");
  }
}

/// Sub-seed for iteration `i`, derived from the master seed only.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline double sample_std(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(n - 1));
}

}  // namespace detail

/// Exact values and derivatives of the spec's function on an equally spaced grid.
inline SyntheticData exact_samples(const SyntheticSpec& spec) {
  detail::validate(spec);
  SyntheticData d;
  d.x_raw = equally_spaced(spec.n, spec.x_lo, spec.x_hi);
  d.y_true.resize(spec.n);
  d.dy_true.resize(spec.n);
  switch (spec.function) {
    case SyntheticFunction::Cos5x:
      d.y_true = (5.0 * d.x_raw.array()).cos();
      d.dy_true = -5.0 * (5.0 * d.x_raw.array()).sin();
      break;
    case SyntheticFunction::Polynomial:
      d.y_true.setZero();
      d.dy_true.setZero();
      // Horner for the value and its derivative
      for (auto it = spec.coefficients.rbegin(); it != spec.coefficients.rend(); ++it) {
        d.dy_true = d.dy_true.cwiseProduct(d.x_raw) + d.y_true;
        d.y_true = d.y_true.cwiseProduct(d.x_raw).array() + *it;
      }
      break;
    case SyntheticFunction::Table:
      d.y_true = spec.table_y;
      d.dy_true = spec.table_dy;
      break;
  }
  d.obs = {d.y_true, d.dy_true};
  return d;
}

/// ŷ = y + σ_y·s, ŷ′ = y′ + σ_dy·t with s, t i.i.d. standard normal drawn
/// from a 64-bit Mersenne Twister seeded with `seed`.
inline Observations add_noise(const Eigen::VectorXd& y, const Eigen::VectorXd& dy, double sigma_y,
                              double sigma_dy, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Observations obs{y, dy};
  for (Eigen::Index i = 0; i < y.size(); ++i) obs.y_hat[i] += sigma_y * normal(rng);
  for (Eigen::Index i = 0; i < dy.size(); ++i) obs.y_hat_prime[i] += sigma_dy * normal(rng);
  return obs;
}

inline SyntheticData generate(const SyntheticSpec& spec) {
  SyntheticData d = exact_samples(spec);
  d.obs = add_noise(d.y_true, d.dy_true, spec.sigma_y, spec.sigma_dy, spec.seed);
  return d;
}

/// Fits one noisy realisation and collects the residual statistics.
inline IterationStats iteration_stats(const BasisSet& basis, const SyntheticData& data) {
  const Eigen::VectorXd gamma = fit_coefficients(basis, data.obs);
  const auto [y_tilde, dy_tilde] = reconstruct(basis, gamma);
  IterationStats s;
  const Eigen::VectorXd ry = data.obs.y_hat - y_tilde;
  const Eigen::VectorXd rdy = data.obs.y_hat_prime - dy_tilde;
  s.std_ry = detail::sample_std(ry);
  s.std_rdy = detail::sample_std(rdy);
  s.std_noise_y = detail::sample_std(data.obs.y_hat - data.y_true);
  s.std_noise_dy = detail::sample_std(data.obs.y_hat_prime - data.dy_true);
  s.std_err_y = detail::sample_std(data.y_true - y_tilde);
  s.std_err_dy = detail::sample_std(data.dy_true - dy_tilde);
  const WeightModel& w = basis.weights();
  Eigen::VectorXd stacked(2 * ry.size());
  stacked << w.apply_sqrt_y(ry), w.apply_sqrt_dy(rdy);
  s.std_whitened = detail::sample_std(stacked);
  return s;
}

/// Monte-Carlo experiment: the basis is synthesised once on the fixed grid
/// and weights, then every iteration draws fresh noise with a sub-seed of
/// `spec.seed` and refits by inner products.
inline MonteCarloResult run_monte_carlo(const SyntheticSpec& spec, int degree, int n_iter) {
  detail::validate(spec);
  if (n_iter < 1) throw Error(ErrorCode::InvalidArgument, "n_iter must be >= 1");
  if (degree < 0 || degree > 2 * spec.n - 1) {
    throw Error(ErrorCode::DegreeOutOfRange, "degree outside [0, 2n-1]");
  }
  SyntheticData data = exact_samples(spec);
  const BasisSet basis = synthesize_basis(
      data.x_raw, WeightModel::from_scalar(spec.n, spec.fit_sigma_y(), spec.fit_sigma_dy()), degree);

  MonteCarloResult out;
  out.spec = spec;
  out.degree = degree;
  out.n_iter = n_iter;
  out.seed = spec.seed;
  out.per_iteration.reserve(static_cast<std::size_t>(n_iter));
  for (int i = 0; i < n_iter; ++i) {
    data.obs = add_noise(data.y_true, data.dy_true, spec.sigma_y, spec.sigma_dy,
                         detail::derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    out.per_iteration.push_back(iteration_stats(basis, data));
  }
  for (const IterationStats& s : out.per_iteration) {
    out.mean.std_ry += s.std_ry;
    out.mean.std_rdy += s.std_rdy;
    out.mean.std_noise_y += s.std_noise_y;
    out.mean.std_noise_dy += s.std_noise_dy;
    out.mean.std_err_y += s.std_err_y;
    out.mean.std_err_dy += s.std_err_dy;
    out.mean.std_whitened += s.std_whitened;
  }
  const double count = static_cast<double>(n_iter);
  for (double* f : {&out.mean.std_ry, &out.mean.std_rdy, &out.mean.std_noise_y, &out.mean.std_noise_dy,
                    &out.mean.std_err_y, &out.mean.std_err_dy, &out.mean.std_whitened}) {
    *f /= count;
  }
  out.mean_std_ry = out.mean.std_ry;
  out.mean_std_rdy = out.mean.std_rdy;
  return out;
}

}  // namespace dopfit
