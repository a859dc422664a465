#pragma once

// PCA subspace detector: the statistic is the squared norm of the component
// of a received sample outside the top-K principal subspace. For uncoded
// transmission of a Gaussian source the statistic is a weighted sum of
// (non-central) chi-square variables, whose tail is approximated through a
// power transform to a standard normal.

#include "radet/numeric.hpp"
#include "radet/source.hpp"
#include "radet/transmission.hpp"

#include <cmath>

namespace radet {

enum class SchemeKind { uncoded, coded };

inline const char* to_string(SchemeKind k) { return k == SchemeKind::coded ? "coded" : "uncoded"; }

/// The closed-form probabilities only exist for the uncoded scheme.
struct UnsupportedAnalyticError : std::invalid_argument {
  UnsupportedAnalyticError()
      : std::invalid_argument("analytic FP/TP is only available for uncoded transmission; use Monte Carlo") {}
};

/// theta_1 = 0 or h_0 = 0: the normal approximation is undefined.
struct DegenerateParameterError : DomainError {
  using DomainError::DomainError;
};

class PcaDetector {
 public:
  /// Top-k eigenvectors of `cov`. Requires 1 <= k < n.
  static PcaDetector fit(const Mat& cov, Eigen::Index k) {
    if (cov.rows() != cov.cols()) throw DimensionError("PcaDetector::fit: covariance is not square");
    if (k < 1 || k >= cov.rows()) throw DomainError("PcaDetector::fit: need 1 <= k < n");
    const SymEigen e = eig_sym(cov);
    PcaDetector det(e.vectors.leftCols(k), e.values);
    const double scale = std::max(1.0, std::abs(e.values[0]));
    det.degenerate_cut_ = std::abs(e.values[k - 1] - e.values[k]) <= 1e-12 * scale;
    return det;
  }

  /// Detector from an explicit orthonormal subspace (k = n allowed).
  static PcaDetector from_subspace(Mat v_hat, Vec eigenvalues = {}) {
    if (orthonormality_error(v_hat) > 1e-10) throw DomainError("PcaDetector: subspace is not orthonormal");
    return PcaDetector(std::move(v_hat), std::move(eigenvalues));
  }

  Eigen::Index dim() const { return v_hat_.rows(); }
  Eigen::Index k() const { return v_hat_.cols(); }
  const Mat& v_hat() const { return v_hat_; }
  const Vec& eigenvalues() const { return eigenvalues_; }
  const Mat& residual_projector() const { return projector_; }
  /// Eigenvalues k and k+1 coincide, so the subspace was chosen by index order.
  bool degenerate_cut() const { return degenerate_cut_; }

  Vec residual(const Vec& x) const {
    if (x.size() != dim()) throw DimensionError("PcaDetector: dimension mismatch");
    return projector_ * x;
  }

  double residual_norm_sq(const Vec& x) const { return residual(x).squaredNorm(); }

  /// Rows are samples.
  Vec residual_norm_sq_batch(const Mat& x) const {
    if (x.cols() != dim()) throw DimensionError("PcaDetector: dimension mismatch");
    return (x * projector_).rowwise().squaredNorm();
  }

 private:
  PcaDetector(Mat v_hat, Vec eigenvalues)
      : v_hat_(std::move(v_hat)),
        eigenvalues_(std::move(eigenvalues)),
        projector_(Mat::Identity(v_hat_.rows(), v_hat_.rows()) - v_hat_ * v_hat_.transpose()) {
    // Exact symmetry keeps x * P and P * x bit-compatible.
    projector_ = (0.5 * (projector_ + projector_.transpose())).eval();
  }

  Mat v_hat_;
  Vec eigenvalues_;
  Mat projector_;
  bool degenerate_cut_ = false;
};

inline double residual_norm_sq(const PcaDetector& det, const Vec& x) { return det.residual_norm_sq(x); }

/// Weights and non-centralities of sum_i lambda_i (Z_i + t_i)^2.
struct QuadFormParams {
  Vec lambdas;
  Vec noncentrality;  // same length as lambdas; zeros for the central case

  void validate() const {
    if (lambdas.size() == 0) throw DomainError("QuadFormParams: no weights");
    if (noncentrality.size() != lambdas.size()) throw DimensionError("QuadFormParams: length mismatch");
    if (!lambdas.allFinite() || !noncentrality.allFinite()) throw NumericalError("QuadFormParams: non-finite entry");
    if (lambdas.minCoeff() <= 0.0) throw DomainError("QuadFormParams: weights must be > 0");
  }

  /// E[sum lambda (Z + t)^2] = sum lambda (1 + t^2).
  double mean() const { return (lambdas.array() * (1.0 + noncentrality.array().square())).sum(); }
};

/// Covariance eigenvalues of the received residual: eta * sigma_i + (N/D)/Gamma
/// for i = k+1..n, non-centrality zero.
inline QuadFormParams residual_lambdas(const SourceSpec& spec, const ChannelParams& params, double eta,
                                       Eigen::Index k) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("residual_lambdas: eta must lie in [0, 1]");
  if (k < 0 || k >= spec.dim()) throw DomainError("residual_lambdas: need 0 <= k < n");
  const Eigen::Index m = spec.dim() - k;
  const double noise = params.effective_noise_variance();
  QuadFormParams q{Vec(m), Vec::Zero(m)};
  for (Eigen::Index j = 0; j < m; ++j) q.lambdas[j] = eta * spec.eigenvalues[k + j] + noise;
  return q;
}

/// t = V^T cov^(-1/2) f_res, keeping entries k..n-1. `basis` holds the
/// eigenvectors of `cov` in descending eigenvalue order.
inline Vec noncentrality(const Mat& basis, const Mat& cov, const Vec& f_residual, Eigen::Index k) {
  if (basis.rows() != cov.rows() || f_residual.size() != cov.rows()) throw DimensionError("noncentrality: dimension mismatch");
  const Vec t = basis.transpose() * (inv_sqrt_sym(cov) * f_residual);
  return t.tail(cov.rows() - k);
}

/// Same as noncentrality() when cov = basis diag(lambdas) basis^T; avoids
/// the eigendecomposition.
inline Vec noncentrality_in_eigenbasis(const Mat& basis, const Vec& lambdas, const Vec& f_residual, Eigen::Index k) {
  if (lambdas.minCoeff() <= 0.0) throw NumericalError("noncentrality: covariance is singular");
  const Vec c = basis.transpose() * f_residual;
  return (c.array() / lambdas.array().sqrt()).matrix().tail(c.size() - k);
}

/// Moments theta_j = sum lambda^j (1 + j t^2) and exponent h0.
struct TailMoments {
  double theta1, theta2, theta3, h0;
};

inline TailMoments tail_moments(const QuadFormParams& qf) {
  const auto l = qf.lambdas.array();
  const auto t2 = qf.noncentrality.array().square();
  TailMoments m{};
  m.theta1 = (l * (1.0 + t2)).sum();
  m.theta2 = (l.square() * (1.0 + 2.0 * t2)).sum();
  m.theta3 = (l.cube() * (1.0 + 3.0 * t2)).sum();
  if (!(m.theta1 > 0.0) || !(m.theta2 > 0.0)) throw DegenerateParameterError("tail_moments: theta_1 or theta_2 is zero");
  m.h0 = 1.0 - 2.0 * m.theta1 * m.theta3 / (3.0 * m.theta2 * m.theta2);
  if (std::abs(m.h0) < 1e-12) throw DegenerateParameterError("tail_moments: h0 is zero");
  return m;
}

/// Standardized value c(q) of the power-transformed statistic at q = delta^2.
inline double tail_transform(const TailMoments& m, double q) {
  const double h = m.h0;
  const double num = m.theta1 * (std::pow(q / m.theta1, h) - 1.0 - m.theta2 * h * (h - 1.0) / (m.theta1 * m.theta1));
  return num / std::sqrt(2.0 * m.theta2 * h * h);
}

/// P(sum lambda (Z + t)^2 > delta^2) by the normal approximation. For h0 < 0
/// the transform is decreasing in q and the lower tail is taken instead.
inline double approx_tail_prob(const TailMoments& m, double delta) {
  if (!(delta >= 0.0)) throw DomainError("approx_tail_prob: delta must be >= 0");
  const double c = tail_transform(m, delta * delta);
  return m.h0 > 0.0 ? std_normal_sf(c) : std_normal_cdf(c);
}

inline double approx_tail_prob(const QuadFormParams& qf, double delta) {
  qf.validate();
  return approx_tail_prob(tail_moments(qf), delta);
}

inline void require_analytic(SchemeKind kind) {
  if (kind != SchemeKind::uncoded) throw UnsupportedAnalyticError();
}

/// Pr(FP | delta) for uncoded transmission of `spec`.
inline double fp_prob(const SourceSpec& spec, const ChannelParams& params, const PcaDetector& det, double delta,
                      SchemeKind kind = SchemeKind::uncoded) {
  require_analytic(kind);
  return approx_tail_prob(residual_lambdas(spec, params, 1.0, det.k()), delta);
}

/// Quadratic form of the anomalous residual, conditioned on the fault vector.
inline QuadFormParams tp_quadform(const SourceSpec& spec, const ChannelParams& params, const PcaDetector& det,
                                  const Vec& fault) {
  if (fault.size() != spec.dim()) throw DimensionError("tp_prob: fault dimension mismatch");
  const double eta = std::clamp(1.0 - fault.squaredNorm() / static_cast<double>(spec.dim()), 0.0, 1.0);
  QuadFormParams q = residual_lambdas(spec, params, eta, det.k());
  const double noise = params.effective_noise_variance();
  const Vec full = (eta * spec.eigenvalues.array() + noise).matrix();
  q.noncentrality = noncentrality_in_eigenbasis(spec.basis, full, det.residual(fault), det.k());
  return q;
}

/// Pr(TP | delta, f) for uncoded transmission.
inline double tp_prob(const SourceSpec& spec, const ChannelParams& params, const PcaDetector& det, const Vec& fault,
                      double delta, SchemeKind kind = SchemeKind::uncoded) {
  require_analytic(kind);
  return approx_tail_prob(tp_quadform(spec, params, det, fault), delta);
}

/// Detector fitted to the analytic received covariance Sigma + (N/D)/Gamma I.
inline PcaDetector fit_uncoded_detector(const SourceSpec& spec, const ChannelParams& params, Eigen::Index k) {
  Mat cov = spec.covariance();
  cov.diagonal().array() += params.effective_noise_variance();
  return PcaDetector::fit(0.5 * (cov + cov.transpose()), k);
}

}  // namespace radet
