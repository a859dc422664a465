#pragma once

// Gaussian feature source with a prescribed covariance spectrum, and the
// additive fault model used for anomalous samples.

#include "radet/numeric.hpp"

#include <string>

namespace radet {

/// Zero-mean Gaussian source x ~ N(0, V diag(eigenvalues) V^T), trace = n.
struct SourceSpec {
  Vec eigenvalues;  // descending, strictly positive
  Mat basis;        // orthonormal columns, column i pairs with eigenvalues[i]

  Eigen::Index dim() const { return eigenvalues.size(); }

  Mat covariance() const { return basis * eigenvalues.asDiagonal() * basis.transpose(); }

  /// basis * diag(sqrt(eigenvalues)), so x = mixing() * g with g ~ N(0, I).
  Mat mixing() const { return basis * eigenvalues.cwiseSqrt().asDiagonal(); }

  void validate() const {
    const auto n = dim();
    if (n == 0) throw DomainError("SourceSpec: empty spectrum");
    if (basis.rows() != n || basis.cols() != n) throw DimensionError("SourceSpec: basis must be n x n");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(eigenvalues[i] > 0.0)) throw DomainError("SourceSpec: eigenvalues must be > 0");
      if (i > 0 && eigenvalues[i] > eigenvalues[i - 1]) throw DomainError("SourceSpec: eigenvalues must be descending");
    }
    if (std::abs(eigenvalues.sum() - static_cast<double>(n)) > 1e-9 * static_cast<double>(n))
      throw DomainError("SourceSpec: trace must equal the dimension");
    if (orthonormality_error(basis) > 1e-10) throw DomainError("SourceSpec: basis is not orthonormal");
  }
};

/// Fault of fixed energy ||f||^2; the nominal part is scaled by sqrt(eta),
/// eta = 1 - ||f||^2 / n, to keep (1/n) E||x_f||^2 = 1.
struct FaultSpec {
  double squared_norm = 0.0;

  double eta(Eigen::Index n) const { return 1.0 - squared_norm / static_cast<double>(n); }

  void validate(Eigen::Index n) const {
    if (!(squared_norm >= 0.0)) throw DomainError("FaultSpec: squared_norm must be >= 0");
    if (squared_norm > static_cast<double>(n) * (1.0 + 1e-12))
      throw DomainError("FaultSpec: squared_norm " + std::to_string(squared_norm) + " exceeds dimension " +
                        std::to_string(n) + " (eta < 0)");
  }
};

/// Five dominant components in ratio 50:40:30:20:10, the remaining n-5 equal,
/// scaled so the trace is n.
inline SourceSpec reference_spectrum(Eigen::Index n) {
  if (n < 6) throw DomainError("reference_spectrum: n must be >= 6");
  const double beta = static_cast<double>(n) / (150.0 + static_cast<double>(n - 5));
  Vec ev = Vec::Constant(n, beta);
  const double head[] = {50.0, 40.0, 30.0, 20.0, 10.0};
  for (int i = 0; i < 5; ++i) ev[i] = head[i] * beta;
  return {ev, Mat::Identity(n, n)};
}

/// Same spectrum, eigenvectors rotated by a random orthogonal matrix.
inline SourceSpec with_random_basis(SourceSpec spec, RngStream& rng) {
  spec.basis = random_orthonormal_columns(spec.dim(), spec.dim(), rng);
  return spec;
}

inline Vec sample_nominal(const SourceSpec& spec, RngStream& rng) {
  const Vec g = gaussian_vec(spec.dim(), 0.0, 1.0, rng);
  return spec.basis * (spec.eigenvalues.cwiseSqrt().cwiseProduct(g));
}

/// Uniform direction on the sphere scaled to ||f||^2 = squared_norm.
inline Vec sample_fault(const SourceSpec& spec, const FaultSpec& fault, RngStream& rng) {
  fault.validate(spec.dim());
  if (fault.squared_norm == 0.0) return Vec::Zero(spec.dim());
  Vec g;
  double norm = 0.0;
  do {
    g = gaussian_vec(spec.dim(), 0.0, 1.0, rng);
    norm = g.norm();
  } while (norm < 1e-300);
  return g * (std::sqrt(fault.squared_norm) / norm);
}

/// x_f = sqrt(eta) x_0 + f.
inline Vec sample_anomalous(const SourceSpec& spec, const FaultSpec& fault, RngStream& rng) {
  fault.validate(spec.dim());
  const double eta = std::max(0.0, fault.eta(spec.dim()));
  Vec x0 = sample_nominal(spec, rng);
  const Vec f = sample_fault(spec, fault, rng);
  if (eta == 0.0) return f;
  return std::sqrt(eta) * x0 + f;
}

/// Rows are samples.
inline Mat sample_nominal_batch(const SourceSpec& spec, Eigen::Index count, RngStream& rng) {
  Mat out(count, spec.dim());
  for (Eigen::Index t = 0; t < count; ++t) out.row(t) = sample_nominal(spec, rng).transpose();
  return out;
}

inline Mat sample_anomalous_batch(const SourceSpec& spec, const FaultSpec& fault, Eigen::Index count,
                                  RngStream& rng) {
  Mat out(count, spec.dim());
  for (Eigen::Index t = 0; t < count; ++t) out.row(t) = sample_anomalous(spec, fault, rng).transpose();
  return out;
}

}  // namespace radet
