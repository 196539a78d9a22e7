#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "support.hpp"

using namespace dopfit;
using Eigen::VectorXd;

namespace {

SyntheticSpec reference_spec() {
  SyntheticSpec s;
  s.function = SyntheticFunction::Cos5x;
  s.n = 500;
  s.sigma_y = 0.1;
  s.sigma_dy = 2.0;
  s.seed = 42;
  return s;
}

}  // namespace

TEST(Synthetic, ZeroNoiseIsExact) {
  SyntheticSpec s = reference_spec();
  s.sigma_y = s.sigma_dy = 0.0;
  const SyntheticData d = generate(s);
  EXPECT_EQ(d.obs.y_hat, d.y_true);
  EXPECT_EQ(d.obs.y_hat_prime, d.dy_true);
}

TEST(Synthetic, CosineTargetValues) {
  const SyntheticData d = exact_samples(reference_spec());
  ASSERT_EQ(d.x_raw.size(), 500);
  EXPECT_DOUBLE_EQ(d.x_raw[0], -2 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(d.x_raw[499], 2 * std::numbers::pi);
  for (Eigen::Index k = 0; k < 500; k += 37) {
    EXPECT_DOUBLE_EQ(d.y_true[k], std::cos(5 * d.x_raw[k]));
    EXPECT_DOUBLE_EQ(d.dy_true[k], -5 * std::sin(5 * d.x_raw[k]));
  }
}

TEST(Synthetic, NoiseStdWithinChiSquareBand) {
  SyntheticSpec s = reference_spec();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    s.seed = seed;
    const SyntheticData d = generate(s);
    const double sd = detail::sample_std(d.obs.y_hat - d.y_true);
    EXPECT_GE(sd, 0.09) << seed;
    EXPECT_LE(sd, 0.11) << seed;
  }
}

TEST(Synthetic, RejectsBadSpecs) {
  SyntheticSpec s = reference_spec();
  s.sigma_y = -1;
  EXPECT_THROW(generate(s), Error);
  s = reference_spec();
  s.x_lo = s.x_hi;
  EXPECT_THROW(generate(s), Error);
  EXPECT_THROW(run_monte_carlo(reference_spec(), 35, 0), Error);
  EXPECT_THROW(run_monte_carlo(reference_spec(), 1000, 1), Error);
}

TEST(MonteCarlo, ReferenceConfigurationMeans) {
  const MonteCarloResult r = run_monte_carlo(reference_spec(), 35, 200);
  EXPECT_NEAR(r.mean_std_ry, 0.1, 0.005);
  EXPECT_NEAR(r.mean_std_rdy, 2.0, 0.1);
  // whitened stacked residual is close to unit variance
  EXPECT_NEAR(r.mean.std_whitened, 1.0, 0.1);
  EXPECT_EQ(r.per_iteration.size(), 200u);
}

TEST(MonteCarlo, SingleIterationEqualsAggregate) {
  const MonteCarloResult r = run_monte_carlo(reference_spec(), 10, 1);
  ASSERT_EQ(r.per_iteration.size(), 1u);
  EXPECT_EQ(r.mean_std_ry, r.per_iteration[0].std_ry);
  EXPECT_EQ(r.mean_std_rdy, r.per_iteration[0].std_rdy);
  EXPECT_EQ(to_json(r.mean), to_json(r.per_iteration[0]));
}

TEST(MonteCarlo, ZeroNoisePolynomialReproduced) {
  SyntheticSpec s;
  s.function = SyntheticFunction::Polynomial;
  s.coefficients = {0.3, -1.0, 0.5, 0.02};
  s.x_lo = -2;
  s.x_hi = 2;
  s.n = 100;
  s.sigma_y = s.sigma_dy = 0.0;
  s.weight_sigma_y = 0.1;
  s.weight_sigma_dy = 0.5;
  const MonteCarloResult r = run_monte_carlo(s, 5, 3);
  EXPECT_LE(r.mean_std_ry, 1e-9);
  EXPECT_LE(r.mean_std_rdy, 1e-9);
}

TEST(MonteCarlo, SameSeedSameBytes) {
  const std::string a = to_json(run_monte_carlo(reference_spec(), 20, 15)).dump();
  const std::string b = to_json(run_monte_carlo(reference_spec(), 20, 15)).dump();
  EXPECT_EQ(a, b);
  SyntheticSpec other = reference_spec();
  other.seed = 43;
  EXPECT_NE(a, to_json(run_monte_carlo(other, 20, 15)).dump());
}

TEST(MonteCarlo, BasisReuseIsBitIdentical) {
  const SyntheticSpec s = reference_spec();
  const SyntheticData d = exact_samples(s);
  const WeightModel w = WeightModel::from_scalar(s.n, s.sigma_y, s.sigma_dy);
  const BasisSet once = synthesize_basis(d.x_raw, w, 35);
  for (int i = 0; i < 3; ++i) {
    const BasisSet again = synthesize_basis(d.x_raw, w, 35);
    EXPECT_EQ(once.p(), again.p());
    EXPECT_EQ(once.p_prime(), again.p_prime());
  }
}

TEST(Dataset, ThreeRowsWithSigmas) {
  std::istringstream is("# comment\nx,y,dy,sigma_y,sigma_dy\r\n0,1,2,0.5,1\n1,2,3,0.5,2\n\n2,3,4,1,4\n");
  const Dataset ds = read_dataset(is);
  ASSERT_EQ(ds.n(), 3);
  EXPECT_TRUE(ds.per_sample_sigma_y);
  const WeightModel w = ds.weights();
  EXPECT_TRUE(w.is_diagonal());
  EXPECT_DOUBLE_EQ(w.diagonal_y()[0], 4.0);
  EXPECT_DOUBLE_EQ(w.diagonal_y()[2], 1.0);
  EXPECT_DOUBLE_EQ(w.diagonal_dy()[2], 1.0 / 16.0);
}

TEST(Dataset, GlobalSigmas) {
  std::istringstream is("x,y,dy\n0,1,2\n1,2,3\n");
  const Dataset ds = read_dataset(is, 0.1, 2.0);
  EXPECT_FALSE(ds.per_sample_sigma_y);
  EXPECT_DOUBLE_EQ(ds.sigma_dy[1], 2.0);
  std::istringstream missing("x,y,dy\n0,1,2\n1,2,3\n");
  EXPECT_THROW(read_dataset(missing), Error);
}

TEST(Dataset, InfiniteSigmaZeroesWeight) {
  std::istringstream is("x,y,dy,sigma_y,sigma_dy\n0,1,2,0.5,1\n1,2,3,inf,2\n2,3,4,1,4\n");
  const WeightModel w = read_dataset(is).weights();
  EXPECT_EQ(w.diagonal_y()[1], 0.0);
  EXPECT_GT(w.diagonal_dy()[1], 0.0);
}

TEST(Dataset, Errors) {
  const auto code_of = [](const std::string& text) {
    std::istringstream is(text);
    try {
      read_dataset(is, 1.0, 1.0);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code_of("x,y,dy\n1,0,0\n0.5,0,0\n2,0,0\n"), ErrorCode::NonMonotonicAbscissa);
  EXPECT_EQ(code_of("x,y,dy\n1,0,0\n1,0,0\n"), ErrorCode::DuplicateAbscissa);
  EXPECT_EQ(code_of("x,y,dy,sigma_y,sigma_dy\n0,0,0,0,1\n1,0,0,1,1\n"), ErrorCode::ZeroSigma);
  EXPECT_EQ(code_of("x,y,dy,sigma_y,sigma_dy\n0,0,0,-1,1\n1,0,0,1,1\n"), ErrorCode::NegativeSigma);
  EXPECT_EQ(code_of("x,y,dy\n0,abc,0\n1,0,0\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("x,y,dy\n0,0\n1,0,0\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("x,y,q\n0,0,0\n1,0,0\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("x,y,dy\n0,nan,0\n1,0,0\n"), ErrorCode::ParseError);
  EXPECT_THROW(read_dataset(std::filesystem::path("/nonexistent/data.csv")), Error);
}

TEST(Dataset, RoundTrip) {
  std::mt19937_64 rng(9);
  const VectorXd x = test::random_grid(rng, 50, -1e3, 1e3);
  const Observations obs{test::random_vector(rng, 50, -1e-7, 1e9), test::random_vector(rng, 50, -5, 5)};
  const VectorXd sy = test::random_vector(rng, 50, 0.01, 2), sdy = test::random_vector(rng, 50, 0.1, 3);
  std::stringstream ss;
  write_dataset(ss, x, obs, &sy, &sdy);
  const Dataset back = read_dataset(ss);
  EXPECT_EQ(back.x_raw, x);
  EXPECT_EQ(back.obs.y_hat, obs.y_hat);
  EXPECT_EQ(back.obs.y_hat_prime, obs.y_hat_prime);
  EXPECT_EQ(back.sigma_y, sy);
  EXPECT_EQ(back.sigma_dy, sdy);
}

TEST(FitFile, GoldenHeadersAndRoundTrip) {
  EXPECT_STREQ(kDatasetCsvHeader, "x,y,dy,sigma_y,sigma_dy");
  EXPECT_STREQ(kFitCsvHeader, "x,y_tilde,dy_tilde,sd_y,sd_dy");
  const SyntheticData d = generate(reference_spec());
  const BasisSet b = synthesize_basis(d.x_raw, WeightModel::from_scalar(500, 0.1, 2.0), 35);
  const HermiteFit f = fit(b, d.obs);
  const auto dir = test::temp_dir("fitfile");
  FitMetadata meta;
  meta.sigma_y = 0.1;
  meta.sigma_dy = 2.0;
  meta.seed = 42;
  write_fit(dir / "fit.csv", f, b.grid(), meta);
  const std::string text = test::slurp(dir / "fit.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "x,y_tilde,dy_tilde,sd_y,sd_dy");
  const FitTable t = read_fit_csv(dir / "fit.csv");
  EXPECT_EQ(t.y_tilde, f.y_tilde);
  EXPECT_EQ(t.dy_tilde, f.y_tilde_prime);
  EXPECT_EQ(t.sd_dy, f.sd_dy());

  const auto j = nlohmann::json::parse(test::slurp(dir / "fit.json"));
  for (const char* key : {"gamma", "degree", "n", "sigma_y", "sigma_dy", "seed", "version"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["degree"], 35);
  EXPECT_EQ(j["n"], 500);
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["gamma"].size(), 36u);
  EXPECT_EQ(j["gamma"][3].get<double>(), f.gamma[3]);
}

TEST(FitFile, ConstantFitHasConstantSd) {
  const Eigen::Index n = 12;
  const BasisSet b = synthesize_basis(equally_spaced(n, 0, 1), WeightModel::from_scalar(n, 0.3, 1.0), 0);
  const HermiteFit f = fit(b, {VectorXd::Constant(n, 4.0), VectorXd::Zero(n)});
  const VectorXd sd = f.sd_y();
  for (Eigen::Index i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(sd[i], sd[0]);
  EXPECT_NEAR(sd[0], 0.3 / std::sqrt(static_cast<double>(n)), 1e-15);
}

TEST(Json, NonFiniteMeasuresBecomeNull) {
  QualityReport q;
  const auto j = to_json(q);
  EXPECT_TRUE(j["eta_max"].is_null());
  EXPECT_EQ(j["eps_rank"], 0);
}
