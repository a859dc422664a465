#pragma once

// Synthetic stand-in for acoustic feature vectors: samples on a smooth
// nonlinear manifold driven by a few latent Gaussians.
//
//   nominal:    x = s0 * A tanh(W z)                       z ~ N(0, I_latent)
//   anomalous:  x = s1 * (A tanh(W z + U d) + g E d)       d ~ N(0, r^2 I_fault)
//
// The fault latents d are dormant (zero) under nominal operation. Through U
// they bend the sample off the nominal manifold, and through E they excite a
// band of features that is almost silent for nominal samples. Feature
// variances decay along the index, and the last `quiet` features carry only
// a small leak of the nominal signal. s0 and s1 fix (1/n) E||x||^2 = 1 for
// both classes, so anomalies cannot be spotted from total power alone.

#include "radet/numeric.hpp"

namespace radet {

struct BenchmarkOptions {
  int dim = 320;
  int latent = 5;
  int hidden = 32;
  int fault_latent = 3;
  int quiet = 64;
  double variance_decay = 120.0;  // feature i scaled by exp(-i / decay)
  double quiet_leak = 0.01;       // nominal gain on the quiet band
  double latent_gain = 1.5;
  double fault_spread = 1.0;      // r
  double fault_band_gain = 0.6;   // g
  int normalization_samples = 20000;
};

class ManifoldBenchmark {
 public:
  static ManifoldBenchmark make(std::uint64_t seed, BenchmarkOptions opt = {}) {
    if (opt.dim < 2 || opt.latent < 1 || opt.hidden < 1 || opt.fault_latent < 1 || opt.quiet < 0 || opt.quiet >= opt.dim)
      throw DomainError("ManifoldBenchmark: invalid options");
    ManifoldBenchmark b;
    b.opt_ = opt;
    RngStream rng(seed, stream_id({0x62656E6368ull}));
    b.w_latent_ = gaussian_mat(opt.hidden, opt.latent, rng) * (opt.latent_gain / std::sqrt(double(opt.latent)));
    b.w_fault_ = gaussian_mat(opt.hidden, opt.fault_latent, rng) * (opt.latent_gain / std::sqrt(double(opt.fault_latent)));
    b.mixing_ = gaussian_mat(opt.dim, opt.hidden, rng) / std::sqrt(double(opt.hidden));
    b.fault_band_ = gaussian_mat(opt.dim, opt.fault_latent, rng) / std::sqrt(double(opt.fault_latent));
    const int first_quiet = opt.dim - opt.quiet;
    for (int i = 0; i < opt.dim; ++i) {
      b.mixing_.row(i) *= std::exp(-double(i) / opt.variance_decay);
      if (i >= first_quiet) {
        b.mixing_.row(i) *= opt.quiet_leak;
      } else {
        b.fault_band_.row(i).setZero();
      }
    }
    RngStream norm_rng(seed, stream_id({0x6E6F726Dull}));
    b.nominal_scale_ = 1.0;
    b.anomalous_scale_ = 1.0;
    const Mat ref0 = b.sample_nominal(opt.normalization_samples, norm_rng);
    const Mat ref1 = b.sample_anomalous(opt.normalization_samples, norm_rng);
    b.nominal_scale_ = std::sqrt(opt.dim / ref0.rowwise().squaredNorm().mean());
    b.anomalous_scale_ = std::sqrt(opt.dim / ref1.rowwise().squaredNorm().mean());
    return b;
  }

  int dim() const { return opt_.dim; }
  const BenchmarkOptions& options() const { return opt_; }

  /// Rows are samples.
  Mat sample_nominal(Eigen::Index count, RngStream& rng) const {
    const Mat z = gaussian_mat(opt_.latent, count, rng);
    const Mat h = (w_latent_ * z).array().tanh().matrix();
    return (nominal_scale_ * (mixing_ * h)).transpose();
  }

  Mat sample_anomalous(Eigen::Index count, RngStream& rng) const {
    const Mat z = gaussian_mat(opt_.latent, count, rng);
    const Mat d = gaussian_mat(opt_.fault_latent, count, rng) * opt_.fault_spread;
    const Mat h = (w_latent_ * z + w_fault_ * d).array().tanh().matrix();
    return (anomalous_scale_ * (mixing_ * h + opt_.fault_band_gain * (fault_band_ * d))).transpose();
  }

 private:
  BenchmarkOptions opt_;
  Mat w_latent_, w_fault_, mixing_, fault_band_;
  double nominal_scale_ = 1.0, anomalous_scale_ = 1.0;
};

}  // namespace radet
