#include <gtest/gtest.h>

#include <numbers>
#include <limits>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace dopfit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(Vandermonde, DegreeZero) {
  const VandermondeBasis vb = vandermonde_basis(equally_spaced(4, 0, 1), 0);
  EXPECT_TRUE(vb.b.isOnes(0.0));
  EXPECT_TRUE(vb.b_prime.isZero(0.0));
}

TEST(Vandermonde, LinearColumnIsNormalizedAbscissa) {
  const VectorXd x = (VectorXd(3) << 0, 1, 2).finished();
  const VandermondeBasis vb = vandermonde_basis(x, 1);
  EXPECT_NEAR(vb.b(0, 1), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(vb.b(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(vb.b(2, 1), 1.0 / std::sqrt(2.0), 1e-15);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(vb.b_prime(i, 1), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Vandermonde, ExactQuadratic) {
  const VectorXd x = equally_spaced(10, -1, 2);
  const auto [y, dy] = test::eval_poly({0.5, -1.0, 2.0}, x);
  const WeightModel w = WeightModel::from_scalar(10, 1, 1);
  const VandermondeBasis vb = vandermonde_basis(x, 2);
  const auto [yt, dyt] = reconstruct(vb, solve_normal_equations(vb, w, {y, dy}));
  EXPECT_LE((yt - y).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((dyt - dy).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Vandermonde, AgreesWithOrthogonalBasisAtLowDegree) {
  std::mt19937_64 rng(31);
  const Eigen::Index n = 40;
  const VectorXd x = equally_spaced(n, -1, 1);
  const WeightModel w = WeightModel::from_scalar(n, 0.2, 0.8);
  const BasisSet basis = synthesize_basis(x, w, 15);
  for (int d = 0; d <= 15; ++d) {
    const Observations obs{test::random_vector(rng, n, -1, 1), test::random_vector(rng, n, -2, 2)};
    const VandermondeBasis vb = vandermonde_basis(x, d, AbscissaMode::Raw);
    const auto [yv, dyv] = reconstruct(vb, solve_normal_equations(vb, w, obs));
    const BasisSet sub(basis.p().leftCols(d + 1), basis.p_prime().leftCols(d + 1), basis.grid_ptr(),
                       basis.weights_ptr());
    const auto [yd, dyd] = reconstruct(sub, fit_coefficients(sub, obs));
    EXPECT_LE(test::rel_diff(yv, yd), 1e-6) << d;
    EXPECT_LE(test::rel_diff(dyv, dyd), 1e-6) << d;
  }
}

TEST(Vandermonde, UnstableAtDegree35) {
  const Eigen::Index n = 500;
  const VectorXd x = equally_spaced(n, -2 * std::numbers::pi, 2 * std::numbers::pi);
  const WeightModel w = WeightModel::from_scalar(n, 0.1, 2.0);
  const VandermondeBasis vb = vandermonde_basis(x, 35);
  EXPECT_THROW(solve_normal_equations(vb, w, {VectorXd::Zero(n), VectorXd::Zero(n)}), Error);
  const BasisSet b = synthesize_basis(x, w, 35);
  const double cond_dop = gram_condition_number(b.p(), b.p_prime(), w);
  const double cond_vdm = gram_condition_number(vb.b, vb.b_prime, w);
  EXPECT_LT(cond_dop, 1.0 + 1e-10);
  EXPECT_GT(cond_vdm, 1e12 * cond_dop);
}

TEST(Vandermonde, ConditioningNonDecreasingInDegree) {
  const Eigen::Index n = 100;
  const VectorXd x = equally_spaced(n, -1, 1);
  const WeightModel w = WeightModel::from_scalar(n, 0.2, 0.8);
  // beyond cond ~ 1/eps the eigenvalue estimate is roundoff, so the check
  // covers the numerically resolvable range only
  double previous = 0.0;
  int d = 0;
  for (; d <= 40; ++d) {
    const VandermondeBasis vb = vandermonde_basis(x, d);
    const double c = gram_condition_number(vb.b, vb.b_prime, w);
    if (!(c < 1.0 / std::numeric_limits<double>::epsilon())) break;
    EXPECT_GE(c, previous) << d;
    previous = c;
  }
  EXPECT_GT(d, 5);
  EXPECT_LE(d, 40);
}

TEST(Quality, DegreeZeroResidualVanishes) {
  const BasisSet b = synthesize_basis(equally_spaced(10, 0, 1), WeightModel::from_scalar(10, 0.2, 0.8), 0);
  EXPECT_NEAR(residual_matrix(b)(0, 0), 0.0, 1e-15);
}

TEST(Quality, ResidualSymmetricAndGrowing) {
  // over-complete request is rejected; the complete basis for n = 50 is d = 99
  const BasisSet b = synthesize_basis(equally_spaced(50, -1, 1), WeightModel::from_scalar(50, 0.2, 0.8), 99);
  const MatrixXd r = residual_matrix(b);
  EXPECT_LE((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GT(r.cwiseAbs().maxCoeff(), 0.0);
  const double low = r.topLeftCorner(20, 20).cwiseAbs().maxCoeff();
  const double high = r.bottomRightCorner(20, 20).cwiseAbs().maxCoeff();
  EXPECT_GT(high, low);
  EXPECT_THROW(synthesize_basis(equally_spaced(50, -1, 1), WeightModel::from_scalar(50, 0.2, 0.8), 100), Error);
}

TEST(Quality, IdealOrthonormalU) {
  std::mt19937_64 rng(4);
  const MatrixXd a = MatrixXd::NullaryExpr(8, 8, [&] { return std::normal_distribution<double>()(rng); });
  const MatrixXd q = a.householderQr().householderQ();
  const QualityReport r = detail::measures_from(MatrixXd::Zero(8, 8), q);
  EXPECT_LE(r.eps_det, 1e-14);
  EXPECT_LE(r.eps_cond, 1e-14);
  EXPECT_EQ(r.eps_rank, 0);
  const QualityReport exact = detail::measures_from(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2));
  EXPECT_EQ(exact.eps_det, 0.0);
  EXPECT_EQ(exact.eps_cond, 0.0);
  EXPECT_TRUE(std::isinf(exact.eta_det()));
}

TEST(Quality, SignificantDigits) {
  EXPECT_DOUBLE_EQ(significant_digits(1e-12), 12.0);
  EXPECT_TRUE(std::isinf(significant_digits(0.0)));
  EXPECT_EQ(significant_digits(1.0), 0.0);
  EXPECT_FALSE(std::signbit(significant_digits(1.0)));
}

TEST(Quality, NormBoundsHold) {
  for (Eigen::Index n : {3, 10, 25, 50}) {
    const BasisSet b =
        synthesize_basis(equally_spaced(n, -1, 1), WeightModel::from_scalar(n, 0.2, 0.8), static_cast<int>(2 * n - 1));
    const QualityReport q = quality_measures(b);
    EXPECT_LE(q.eps_max, q.eps_frob);
    EXPECT_LE(q.eps_frob, (b.degree() + 1) * q.eps_max);
    EXPECT_EQ(q.eps_rank, 0);
  }
}

TEST(Quality, CompleteBasisFullRank) {
  const BasisSet b = synthesize_basis(equally_spaced(50, -1, 1), WeightModel::from_scalar(50, 0.2, 0.8), 99);
  const QualityReport q = quality_measures(b);
  EXPECT_EQ(q.eps_rank, 0);
  EXPECT_LE(q.eps_frob, 1e-10);
}

TEST(Quality, VandermondeFailureIsReported) {
  const VectorXd x = equally_spaced(30, -1, 1);
  const WeightModel w = WeightModel::from_scalar(30, 0.2, 0.8);
  const QualityReport q = quality_measures(vandermonde_basis(x, 59), w);
  EXPECT_TRUE(q.failed);
  EXPECT_EQ(q.eps_frob, 1.0);
  EXPECT_GT(q.eps_rank, 0);
  const QualityReport ok = quality_measures(vandermonde_basis(x, 3), w);
  EXPECT_FALSE(ok.failed);
  EXPECT_LT(ok.eps_frob, 1e-12);
}

TEST(Sweep, TinyCaseNearMachinePrecision) {
  const std::vector<SweepRow> rows = sweep_complete({2}, 0.2, 0.8);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].degree, 3);
  ASSERT_TRUE(rows[0].dop && rows[0].vandermonde);
  EXPECT_LT(rows[0].dop->eps_frob, 1e-14);
  EXPECT_LT(rows[0].vandermonde->eps_frob, 1e-12);
}

TEST(Sweep, OrthogonalBasisAheadAtLargeN) {
  std::vector<Eigen::Index> ns;
  for (Eigen::Index n = 5; n <= 50; n += 5) ns.push_back(n);
  const std::vector<SweepRow> rows = sweep_complete(ns, 0.2, 0.8);
  for (const SweepRow& row : rows) {
    ASSERT_TRUE(row.dop.has_value());
    EXPECT_EQ(row.dop->eps_rank, 0);
    if (row.n >= 10) {
      ASSERT_TRUE(row.vandermonde.has_value());
      EXPECT_GE(row.dop->eta_frob(), row.vandermonde->eta_frob()) << row.n;
    }
  }
}

TEST(Sweep, IncompleteDegreeZeroExact) {
  const std::vector<SweepRow> rows = sweep_incomplete(1000, {0, 10, 50}, 0.2, 0.8);
  EXPECT_LT(rows[0].dop->eps_frob, 1e-14);
  EXPECT_LT(rows[0].vandermonde->eps_frob, 1e-14);
  for (const SweepRow& row : rows) EXPECT_LE(row.dop->eps_frob, 1e-10);
  EXPECT_THROW(sweep_incomplete(10, {20}, 0.2, 0.8), Error);
}

TEST(Sweep, CsvLayout) {
  std::ostringstream os;
  write_sweep_csv(os, sweep_complete({3, 4}, 0.2, 0.8));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "n,d,method,eps_max,eps_frob,eps_det,eps_cond,eps_rank,eta_max,eta_frob,eta_det,eta_cond,eta_rank,error");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 13) << line;
  }
  EXPECT_EQ(rows, 4);
}
