// Fits one noisy realisation of cos(5x) with a degree-35 Hermite fit and
// prints the residual statistics next to a few reconstructed samples.

#include <cstdio>

#include "dopfit/dopfit.hpp"

int main() {
  dopfit::SyntheticSpec spec;  // cos 5x on [-2pi, 2pi], n = 500, sigma_y = 0.1, sigma_dy = 2
  spec.seed = 2024;
  const dopfit::SyntheticData data = dopfit::generate(spec);

  const auto weights = dopfit::WeightModel::from_scalar(spec.n, spec.sigma_y, spec.sigma_dy);
  const dopfit::BasisSet basis = dopfit::synthesize_basis(data.x_raw, weights, 35);
  const dopfit::HermiteFit fit = dopfit::fit(basis, data.obs);

  const dopfit::IterationStats s = dopfit::iteration_stats(basis, data);
  std::printf("std(y_hat - y_tilde)   = %.4f  (sigma_y  = %.1f)\n", s.std_ry, spec.sigma_y);
  std::printf("std(dy_hat - dy_tilde) = %.4f  (sigma_dy = %.1f)\n", s.std_rdy, spec.sigma_dy);
  std::printf("std(y - y_tilde)       = %.4f\n", s.std_err_y);
  std::printf("std(dy - dy_tilde)     = %.4f\n\n", s.std_err_dy);

  std::printf("%10s %10s %10s %10s %10s\n", "x", "y", "y_tilde", "sd_y", "dy_tilde");
  const Eigen::VectorXd sd = fit.sd_y();
  for (Eigen::Index i = 0; i < spec.n; i += 50) {
    std::printf("%10.4f %10.4f %10.4f %10.4f %10.4f\n", data.x_raw[i], data.y_true[i], fit.y_tilde[i], sd[i],
                fit.y_tilde_prime[i]);
  }
}
