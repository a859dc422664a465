#include "radet/source.hpp"

#include <gtest/gtest.h>

using namespace radet;

TEST(Spectrum, NormalizedRatiosForN128) {
  const SourceSpec s = reference_spectrum(128);
  const double beta = 128.0 / 273.0;
  EXPECT_NEAR(s.eigenvalues[0], 6400.0 / 273.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues[0], 23.443, 1e-3);
  EXPECT_NEAR(s.eigenvalues[4], 10.0 * beta, 1e-12);
  EXPECT_NEAR(s.eigenvalues[5], beta, 1e-15);
  EXPECT_NEAR(s.eigenvalues[127], beta, 1e-15);
  EXPECT_NEAR(s.eigenvalues.sum(), 128.0, 1e-9);
  EXPECT_NO_THROW(s.validate());
}

TEST(Spectrum, TooSmallIsRejected) { EXPECT_THROW(reference_spectrum(5), DomainError); }

TEST(Spectrum, TraceHoldsForOtherSizes) {
  for (Eigen::Index n : {6, 7, 64, 320}) EXPECT_NEAR(reference_spectrum(n).eigenvalues.sum(), double(n), 1e-9 * n);
}

TEST(Spectrum, RandomBasisKeepsCovarianceSpectrum) {
  RngStream rng(1, 1);
  const SourceSpec s = with_random_basis(reference_spectrum(16), rng);
  s.validate();
  const SymEigen e = eig_sym(s.covariance());
  EXPECT_LE((e.values - s.eigenvalues).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Spectrum, ValidateRejectsBadSpecs) {
  SourceSpec s = reference_spectrum(8);
  s.eigenvalues[0] *= 2;
  EXPECT_THROW(s.validate(), DomainError);
  SourceSpec t = reference_spectrum(8);
  t.basis(0, 1) = 0.5;
  EXPECT_THROW(t.validate(), DomainError);
}

TEST(SampleNominal, UnitSpectrumGivesStandardNormal) {
  const SourceSpec s{Vec::Ones(4), Mat::Identity(4, 4)};
  RngStream a(2, 0), b(2, 0);
  EXPECT_TRUE(sample_nominal(s, a).isApprox(gaussian_vec(4, 0.0, 1.0, b)));
}

TEST(SampleNominal, PowerAndSpectrum) {
  RngStream brng(3, 0), rng(3, 1);
  const SourceSpec s = with_random_basis(reference_spectrum(128), brng);
  const Mat x = sample_nominal_batch(s, 100000, rng);
  const double power = x.rowwise().squaredNorm().mean() / 128.0;
  EXPECT_GE(power, 0.99);
  EXPECT_LE(power, 1.01);
  const SymEigen e = eig_sym(second_moment(x));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(e.values[i] / s.eigenvalues[i], 1.0, 0.05) << i;
}

TEST(SampleFault, ZeroNormIsZeroVector) {
  RngStream rng(4, 0);
  EXPECT_EQ(sample_fault(reference_spectrum(8), FaultSpec{0.0}, rng), Vec::Zero(8));
}

TEST(SampleFault, ExactSquaredNorm) {
  RngStream rng(4, 1);
  const SourceSpec s = reference_spectrum(128);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(sample_fault(s, FaultSpec{100.0}, rng).squaredNorm(), 100.0, 1e-9);
}

TEST(SampleFault, DirectionsAreCentered) {
  RngStream rng(4, 2);
  const Eigen::Index n = 16;
  const int draws = 100000;
  const SourceSpec s = reference_spectrum(n);
  Vec mean = Vec::Zero(n);
  for (int i = 0; i < draws; ++i) mean += sample_fault(s, FaultSpec{1.0}, rng);
  mean /= draws;
  // Each coordinate of a unit direction has variance 1/n.
  const double bound = 3.0 / std::sqrt(double(draws) * n);
  for (Eigen::Index i = 0; i < n; ++i) EXPECT_LT(std::abs(mean[i]), bound) << i;
}

TEST(SampleFault, RadiusAboveDimensionIsRejected) {
  RngStream rng(4, 3);
  EXPECT_THROW(sample_fault(reference_spectrum(8), FaultSpec{9.0}, rng), DomainError);
}

TEST(SampleAnomalous, FullFaultReturnsFaultExactly) {
  const SourceSpec s = reference_spectrum(8);
  RngStream a(5, 0), b(5, 0);
  const Vec x = sample_anomalous(s, FaultSpec{8.0}, a);
  sample_nominal(s, b);
  EXPECT_EQ(x, sample_fault(s, FaultSpec{8.0}, b));
}

TEST(SampleAnomalous, ZeroFaultIsNominal) {
  const SourceSpec s = reference_spectrum(8);
  RngStream a(5, 1), b(5, 1);
  EXPECT_EQ(sample_anomalous(s, FaultSpec{0.0}, a), sample_nominal(s, b));
}

TEST(SampleAnomalous, PowerIsPreserved) {
  RngStream rng(5, 2);
  const Mat x = sample_anomalous_batch(reference_spectrum(128), FaultSpec{100.0}, 100000, rng);
  const double power = x.rowwise().squaredNorm().mean() / 128.0;
  EXPECT_GE(power, 0.99);
  EXPECT_LE(power, 1.01);
}
