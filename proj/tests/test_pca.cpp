#include "radet/pca.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <gtest/gtest.h>

using namespace radet;

namespace {

Mat diag3() {
  Vec d(3);
  d << 3, 2, 1;
  return d.asDiagonal().toDenseMatrix();
}

double empirical_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(p * static_cast<double>(v.size() - 1))];
}

}  // namespace

TEST(PcaFit, DiagonalKeepsLargestAxis) {
  const PcaDetector det = PcaDetector::fit(diag3(), 1);
  EXPECT_NEAR(std::abs(det.v_hat()(0, 0)), 1.0, 1e-14);
  Vec expected(3);
  expected << 0, 1, 1;
  EXPECT_LE((det.residual_projector() - Mat(expected.asDiagonal())).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_FALSE(det.degenerate_cut());
}

TEST(PcaFit, RankOfResidualProjectorIsNMinusK) {
  RngStream rng(1, 0);
  const Mat a = gaussian_mat(6, 6, rng);
  const PcaDetector det = PcaDetector::fit(a * a.transpose() + Mat::Identity(6, 6), 5);
  Eigen::FullPivLU<Mat> lu(det.residual_projector());
  lu.setThreshold(1e-10);
  EXPECT_EQ(lu.rank(), 1);
}

TEST(PcaFit, RejectsBadK) {
  EXPECT_THROW(PcaDetector::fit(diag3(), 0), DomainError);
  EXPECT_THROW(PcaDetector::fit(diag3(), 3), DomainError);
}

TEST(PcaFit, FlagsDegenerateCut) {
  EXPECT_TRUE(PcaDetector::fit(Mat::Identity(4, 4), 2).degenerate_cut());
}

TEST(PcaFit, EmpiricalSubspaceAlignsWithTruth) {
  RngStream brng(2, 0), rng(2, 1);
  const SourceSpec spec = with_random_basis(reference_spectrum(128), brng);
  const PcaDetector det = PcaDetector::fit(second_moment(sample_nominal_batch(spec, 100000, rng)), 5);
  // Cosines of principal angles are the singular values of V_true^T V_hat.
  const Vec cosines = (spec.basis.leftCols(5).transpose() * det.v_hat()).jacobiSvd().singularValues();
  EXPECT_GE(cosines.minCoeff(), std::cos(5.0 * std::acos(-1.0) / 180.0));
}

TEST(ResidualNorm, SpanAndComplement) {
  const PcaDetector det = PcaDetector::fit(diag3(), 1);
  EXPECT_NEAR(residual_norm_sq(det, Vec::Unit(3, 0) * 4.0), 0.0, 1e-28);
  Vec x(3);
  x << 0, 2, -1;
  EXPECT_NEAR(residual_norm_sq(det, x), 5.0, 1e-14);
}

TEST(ResidualNorm, FullSubspaceIsZero) {
  RngStream rng(3, 0);
  const PcaDetector det = PcaDetector::from_subspace(random_orthonormal_columns(4, 4, rng));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(det.residual_norm_sq(gaussian_vec(4, 0, 1, rng)), 0.0, 1e-20);
}

TEST(ResidualNorm, BatchMatchesSingle) {
  RngStream rng(3, 1);
  const PcaDetector det = PcaDetector::fit(diag3(), 2);
  const Mat x = gaussian_mat(10, 3, rng);
  const Vec s = det.residual_norm_sq_batch(x);
  for (Eigen::Index i = 0; i < 10; ++i) EXPECT_NEAR(s[i], det.residual_norm_sq(x.row(i).transpose()), 1e-14);
}

TEST(ResidualLambdas, Limits) {
  const SourceSpec spec = reference_spectrum(128);
  const ChannelParams clean{std::numeric_limits<double>::infinity(), 128, 128};
  const QuadFormParams a = residual_lambdas(spec, clean, 1.0, 5);
  EXPECT_EQ(a.lambdas, spec.eigenvalues.tail(123));
  const ChannelParams p{4.0, 128, 256};
  const QuadFormParams b = residual_lambdas(spec, p, 0.0, 5);
  for (double l : b.lambdas) EXPECT_DOUBLE_EQ(l, 0.125);
}

TEST(ResidualLambdas, UnitSnr) {
  const QuadFormParams q = residual_lambdas(reference_spectrum(128), {1.0, 128, 128}, 1.0, 5);
  ASSERT_EQ(q.lambdas.size(), 123);
  for (double l : q.lambdas) EXPECT_NEAR(l, 128.0 / 273.0 + 1.0, 1e-14);
}

TEST(Noncentrality, ZeroFaultIsZero) {
  const SourceSpec spec = reference_spectrum(8);
  EXPECT_EQ(noncentrality(spec.basis, spec.covariance(), Vec::Zero(8), 2), Vec::Zero(6));
}

TEST(Noncentrality, IdentityCovarianceIsRotation) {
  RngStream rng(4, 0);
  const Mat v = random_orthonormal_columns(5, 5, rng);
  const Vec t = noncentrality(v, Mat::Identity(5, 5), Vec::Unit(5, 4), 2);
  EXPECT_LE((t - v.row(4).tail(3).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  // The whole rotated unit vector has unit norm.
  const Vec all = noncentrality(v, Mat::Identity(5, 5), Vec::Unit(5, 4), 0);
  EXPECT_NEAR(all.squaredNorm(), 1.0, 1e-12);
}

TEST(Noncentrality, EigenbasisShortcutAgrees) {
  RngStream rng(4, 1);
  const SourceSpec spec = with_random_basis(reference_spectrum(16), rng);
  const Vec f = gaussian_vec(16, 0, 1, rng);
  const Vec a = noncentrality(spec.basis, spec.covariance(), f, 5);
  const Vec b = noncentrality_in_eigenbasis(spec.basis, spec.eigenvalues, f, 5);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NoncentralMean, MatchesMonteCarlo) {
  RngStream brng(5, 0);
  const SourceSpec spec = with_random_basis(reference_spectrum(32), brng);
  const ChannelParams p{10.0, 32, 32};
  const PcaDetector det = fit_uncoded_detector(spec, p, 5);
  RngStream frng(5, 1), rng(5, 2);
  const Vec f = sample_fault(spec, FaultSpec{10.0}, frng);
  const QuadFormParams qf = tp_quadform(spec, p, det, f);
  const double eta = 1.0 - 10.0 / 32.0;
  double sum = 0.0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const Vec x = std::sqrt(eta) * sample_nominal(spec, rng) + f + uncoded_transmit_reduced(Vec::Zero(32), p, rng);
    sum += det.residual_norm_sq(x);
  }
  EXPECT_NEAR(sum / trials / qf.mean(), 1.0, 0.01);
}

TEST(TailApprox, ZeroThresholdIsCertain) {
  const QuadFormParams qf = residual_lambdas(reference_spectrum(128), {1.0, 128, 128}, 1.0, 5);
  EXPECT_GE(approx_tail_prob(qf, 0.0), 0.999);
}

TEST(TailApprox, ChiSquareSpecialCase) {
  const int m = 123;
  const QuadFormParams qf{Vec::Ones(m), Vec::Zero(m)};
  boost::math::chi_squared chi(m);
  for (double q = 80.0; q <= 180.0; q += 2.5) {
    const double oracle = boost::math::cdf(boost::math::complement(chi, q));
    EXPECT_NEAR(approx_tail_prob(qf, std::sqrt(q)), oracle, 2e-3) << q;
  }
}

TEST(TailApprox, MonteCarloNinetyFifthPercentile) {
  const SourceSpec spec = reference_spectrum(128);
  const ChannelParams p{10.0, 128, 128};
  const QuadFormParams qf = residual_lambdas(spec, p, 1.0, 5);
  RngStream rng(6, 0);
  std::vector<double> draws(100000);
  for (double& d : draws) {
    double s = 0.0;
    for (double l : qf.lambdas) {
      const double z = rng.normal();
      s += l * z * z;
    }
    d = s;
  }
  const double q95 = empirical_quantile(draws, 0.95);
  EXPECT_NEAR(approx_tail_prob(qf, std::sqrt(q95)), 0.05, 0.01);
}

TEST(TailApprox, NegativeExponentUsesLowerTail) {
  // One dominant weight over many small ones drives h0 below zero.
  Vec l = Vec::Constant(101, 0.1);
  l[0] = 10.0;
  const QuadFormParams qf{l, Vec::Zero(101)};
  ASSERT_LT(tail_moments(qf).h0, 0.0);
  double prev = 1.0;
  for (double delta = 0.0; delta < 20.0; delta += 0.5) {
    const double p = approx_tail_prob(qf, delta);
    EXPECT_LE(p, prev + 1e-12);
    prev = p;
  }
  RngStream rng(6, 1);
  std::vector<double> draws(100000);
  for (double& d : draws) {
    d = 0.0;
    for (double w : l) {
      const double z = rng.normal();
      d += w * z * z;
    }
  }
  EXPECT_GE(approx_tail_prob(qf, 0.0), 0.999);
  EXPECT_LE(approx_tail_prob(qf, 100.0), 1e-3);
  // The power transform is coarse near the mode of such a skewed form, so only
  // the central and upper quantiles are held to Monte Carlo.
  for (double p : {0.1, 0.5}) {
    const double q = empirical_quantile(draws, 1.0 - p);
    EXPECT_NEAR(approx_tail_prob(qf, std::sqrt(q)), p, 0.03) << p;
  }
}

TEST(TailApprox, DegenerateParametersRaise) {
  EXPECT_THROW(approx_tail_prob(QuadFormParams{Vec::Zero(3), Vec::Zero(3)}, 1.0), DomainError);
}

TEST(FpTp, FaultInsideModelledSubspaceIsInvisible) {
  const SourceSpec spec = reference_spectrum(128);
  const ChannelParams clean{std::numeric_limits<double>::infinity(), 128, 128};
  const PcaDetector det = fit_uncoded_detector(spec, clean, 5);
  const Vec f = det.v_hat().col(0);
  const QuadFormParams qf = tp_quadform(spec, clean, det, f);
  EXPECT_LE(qf.noncentrality.cwiseAbs().maxCoeff(), 1e-12);
  // Only the power renormalization separates the two classes.
  const double eta = 1.0 - 1.0 / 128.0;
  for (double delta : {6.0, 7.0, 8.0}) {
    const double tp = tp_prob(spec, clean, det, f, delta);
    EXPECT_NEAR(tp, approx_tail_prob(residual_lambdas(spec, clean, eta, 5), delta), 1e-15);
    EXPECT_NEAR(tp, fp_prob(spec, clean, det, delta), 0.05);
  }
  EXPECT_NEAR(tp_prob(spec, clean, det, Vec::Zero(128), 7.0), fp_prob(spec, clean, det, 7.0), 1e-15);
}

TEST(FpTp, LargeThresholdVanishes) {
  const SourceSpec spec = reference_spectrum(16);
  const ChannelParams p{1.0, 16, 16};
  const PcaDetector det = fit_uncoded_detector(spec, p, 5);
  RngStream rng(7, 0);
  const Vec f = sample_fault(spec, FaultSpec{8.0}, rng);
  EXPECT_LT(fp_prob(spec, p, det, 100.0), 1e-12);
  EXPECT_LT(tp_prob(spec, p, det, f, 100.0), 1e-12);
}

TEST(FpTp, CodedIsUnsupported) {
  const SourceSpec spec = reference_spectrum(16);
  const ChannelParams p{1.0, 16, 16};
  const PcaDetector det = fit_uncoded_detector(spec, p, 5);
  EXPECT_THROW(fp_prob(spec, p, det, 1.0, SchemeKind::coded), UnsupportedAnalyticError);
  EXPECT_THROW(tp_prob(spec, p, det, Vec::Zero(16), 1.0, SchemeKind::coded), UnsupportedAnalyticError);
}
