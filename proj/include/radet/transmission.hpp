#pragma once

// Coded (scalar quantization at channel capacity) and uncoded (orthonormal
// spreading over an AWGN channel) transmission of feature vectors.

#include "radet/numeric.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace radet {

//-----------------------------------------------------------------------------
// Channel
//-----------------------------------------------------------------------------

struct ChannelParams {
  double snr_linear = 1.0;  // Gamma; +inf means a noiseless channel
  Eigen::Index n = 1;       // source dimension
  Eigen::Index d = 1;       // channel symbols per sample

  static ChannelParams from_db(double snr_db, Eigen::Index n, Eigen::Index d) { return {db_to_linear(snr_db), n, d}; }

  void validate() const {
    if (!(snr_linear > 0.0)) throw DomainError("ChannelParams: snr must be > 0");
    if (n < 1) throw DomainError("ChannelParams: n must be >= 1");
    if (d < n) throw DomainError("ChannelParams: d must be >= n");
  }

  /// Per-entry variance of the despread noise, (N/D) / Gamma.
  double effective_noise_variance() const {
    if (std::isinf(snr_linear)) return 0.0;
    return static_cast<double>(n) / static_cast<double>(d) / snr_linear;
  }
};

/// floor(D * log2(1 + Gamma) / 2). A 1e-9 slack absorbs round-off from dB
/// conversion (e.g. 10^(4.7712/10) = 2.9999999...).
inline int capacity_bits(const ChannelParams& params) {
  if (!(params.snr_linear > 0.0)) throw DomainError("capacity_bits: snr must be > 0");
  if (params.d < 1) throw DomainError("capacity_bits: d must be >= 1");
  if (std::isinf(params.snr_linear)) throw DomainError("capacity_bits: unbounded for a noiseless channel");
  const double bits = static_cast<double>(params.d) * 0.5 * std::log2(1.0 + params.snr_linear);
  return static_cast<int>(std::floor(bits + 1e-9));
}

//-----------------------------------------------------------------------------
// Bit allocation
//-----------------------------------------------------------------------------

struct BitAllocation {
  std::vector<int> bits;
  int total = 0;
};

/// Distortion model sigma^2 * 2^(-2 b) for a Gaussian entry.
inline double gaussian_distortion(double variance, int bits) { return std::ldexp(variance, -2 * bits); }

/// Gives `total` bits away one at a time, each to the entry whose modelled
/// distortion is currently largest; ties go to the lowest index.
inline BitAllocation allocate_bits(std::span<const double> variances, int total) {
  if (total < 0) throw DomainError("allocate_bits: negative budget");
  for (double v : variances)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("allocate_bits: variances must be finite and >= 0");
  BitAllocation out{std::vector<int>(variances.size(), 0), total};
  if (variances.empty()) {
    if (total > 0) throw DomainError("allocate_bits: no entries to receive bits");
    return out;
  }
  std::vector<double> dist(variances.begin(), variances.end());
  for (int step = 0; step < total; ++step) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i)
      if (dist[i] > dist[best]) best = i;
    ++out.bits[best];
    dist[best] = gaussian_distortion(variances[best], out.bits[best]);
  }
  return out;
}

inline double allocation_distortion(std::span<const double> variances, std::span<const int> bits) {
  double s = 0.0;
  for (std::size_t i = 0; i < variances.size(); ++i) s += gaussian_distortion(variances[i], bits[i]);
  return s;
}

//-----------------------------------------------------------------------------
// Scalar quantizers
//-----------------------------------------------------------------------------

class ScalarQuantizer {
 public:
  ScalarQuantizer() : points_{0.0} {}
  explicit ScalarQuantizer(std::vector<double> points, double design_mse = 0.0)
      : points_(std::move(points)), mse_(design_mse) {
    if (points_.empty()) throw DomainError("ScalarQuantizer: no reconstruction points");
    for (std::size_t i = 1; i < points_.size(); ++i)
      if (!(points_[i] > points_[i - 1])) throw DomainError("ScalarQuantizer: points must be strictly increasing");
    thresholds_.resize(points_.size() - 1);
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) thresholds_[i] = 0.5 * (points_[i] + points_[i + 1]);
  }

  /// Index of the nearest point; a value exactly on a midpoint goes to the lower cell.
  std::size_t encode(double x) const {
    return static_cast<std::size_t>(std::lower_bound(thresholds_.begin(), thresholds_.end(), x) -
                                    thresholds_.begin());
  }
  double decode(std::size_t index) const { return points_.at(index); }
  double quantize(double x) const { return points_[encode(x)]; }

  const std::vector<double>& points() const { return points_; }
  std::size_t levels() const { return points_.size(); }
  /// MSE reported by the design procedure.
  double design_mse() const { return mse_; }

 private:
  std::vector<double> points_;
  std::vector<double> thresholds_;
  double mse_ = 0.0;
};

namespace detail {

inline double std_normal_pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// P(a < Z <= b) evaluated on the side of zero that avoids cancellation.
inline double normal_mass(double a, double b) {
  if (a >= 0.0) return std_normal_sf(a) - std_normal_sf(b);
  return std_normal_cdf(b) - std_normal_cdf(a);
}

inline double std_normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

constexpr int kMaxBits = 20;
constexpr int kMaxLloydIterations = 10000;
constexpr double kLloydTolerance = 1e-9;

struct CellMoments {
  double mass, first, second;  // integrals of 1, x, x^2 against phi over the cell
};

inline CellMoments normal_cell(double a, double b) {
  const double pa = std_normal_pdf(a), pb = std_normal_pdf(b);
  const double mass = normal_mass(a, b);
  const double first = pa - pb;
  const double a_pa = std::isinf(a) ? 0.0 : a * pa;
  const double b_pb = std::isinf(b) ? 0.0 : b * pb;
  return {mass, first, mass + a_pa - b_pb};
}

/// Expected squared error of `points` (nearest-neighbour cells) on N(0, 1).
inline double gaussian_mse(const std::vector<double>& points) {
  double mse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double a = i == 0 ? -INFINITY : 0.5 * (points[i - 1] + points[i]);
    const double b = i + 1 == points.size() ? INFINITY : 0.5 * (points[i] + points[i + 1]);
    const auto m = normal_cell(a, b);
    mse += m.second - 2.0 * points[i] * m.first + points[i] * points[i] * m.mass;
  }
  return mse;
}

inline void make_strictly_increasing(std::vector<double>& p) {
  std::sort(p.begin(), p.end());
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (!(p[i] > p[i - 1])) {
      const double step = std::max(std::abs(p[i - 1]) * 1e-12, 1e-12);
      p[i] = p[i - 1] + step;
    }
  }
}

}  // namespace detail

/// Lloyd-Max design for N(0, variance) by exact cell integrals. When
/// `mse_trace` is given it receives the MSE after every centroid update.
inline ScalarQuantizer design_gaussian_quantizer(double variance, int bits, std::vector<double>* mse_trace = nullptr) {
  if (!(variance > 0.0)) throw DomainError("design_quantizer: variance must be > 0");
  if (bits < 0 || bits > detail::kMaxBits) throw DomainError("design_quantizer: bits out of range");
  if (bits == 0) return ScalarQuantizer({0.0}, variance);

  const std::size_t levels = std::size_t{1} << bits;
  std::vector<double> p(levels);
  for (std::size_t i = 0; i < levels; ++i)
    p[i] = detail::std_normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(levels));

  double prev = detail::gaussian_mse(p);
  for (int it = 0; it < detail::kMaxLloydIterations; ++it) {
    std::vector<double> next(levels);
    for (std::size_t i = 0; i < levels; ++i) {
      const double a = i == 0 ? -INFINITY : 0.5 * (p[i - 1] + p[i]);
      const double b = i + 1 == levels ? INFINITY : 0.5 * (p[i] + p[i + 1]);
      const auto m = detail::normal_cell(a, b);
      next[i] = m.mass > 0.0 ? m.first / m.mass : p[i];
    }
    detail::make_strictly_increasing(next);
    const double mse = detail::gaussian_mse(next);
    if (mse_trace) mse_trace->push_back(mse);
    p = std::move(next);
    const bool done = std::abs(prev - mse) <= detail::kLloydTolerance * prev;
    prev = mse;
    if (done) break;
  }
  const double sd = std::sqrt(variance);
  for (double& v : p) v *= sd;
  return ScalarQuantizer(std::move(p), prev * variance);
}

/// Lloyd (1-D k-means) on training values. bits = 0 yields the sample mean.
inline ScalarQuantizer design_sample_quantizer(std::span<const double> training, int bits,
                                               std::vector<double>* mse_trace = nullptr) {
  if (training.empty()) throw DomainError("design_quantizer: empty training set");
  if (bits < 0 || bits > detail::kMaxBits) throw DomainError("design_quantizer: bits out of range");

  std::vector<double> xs(training.begin(), training.end());
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + xs[i];
    prefix_sq[i + 1] = prefix_sq[i] + xs[i] * xs[i];
  }
  const auto sum = [&](std::size_t lo, std::size_t hi) { return prefix[hi] - prefix[lo]; };
  const auto sum_sq = [&](std::size_t lo, std::size_t hi) { return prefix_sq[hi] - prefix_sq[lo]; };

  const std::size_t levels = std::size_t{1} << bits;
  // Cell boundaries as indices into the sorted samples.
  const auto boundaries = [&](const std::vector<double>& p) {
    std::vector<std::size_t> b(levels + 1, 0);
    b[levels] = n;
    for (std::size_t i = 1; i < levels; ++i) {
      const double t = 0.5 * (p[i - 1] + p[i]);
      b[i] = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), t) - xs.begin());
    }
    return b;
  };
  const auto mse_of = [&](const std::vector<double>& p) {
    const auto b = boundaries(p);
    double e = 0.0;
    for (std::size_t i = 0; i < levels; ++i) {
      const double c = static_cast<double>(b[i + 1] - b[i]);
      e += sum_sq(b[i], b[i + 1]) - 2.0 * p[i] * sum(b[i], b[i + 1]) + p[i] * p[i] * c;
    }
    return std::max(0.0, e / static_cast<double>(n));
  };

  std::vector<double> p(levels);
  for (std::size_t i = 0; i < levels; ++i) {
    const std::size_t lo = i * n / levels, hi = std::max(lo + 1, (i + 1) * n / levels);
    p[i] = sum(lo, std::min(hi, n)) / static_cast<double>(std::min(hi, n) - lo);
  }
  detail::make_strictly_increasing(p);

  double prev = mse_of(p);
  for (int it = 0; it < detail::kMaxLloydIterations && levels > 1; ++it) {
    const auto b = boundaries(p);
    std::vector<double> next(p);
    for (std::size_t i = 0; i < levels; ++i)
      if (b[i + 1] > b[i]) next[i] = sum(b[i], b[i + 1]) / static_cast<double>(b[i + 1] - b[i]);
    detail::make_strictly_increasing(next);
    const double mse = mse_of(next);
    if (mse_trace) mse_trace->push_back(mse);
    p = std::move(next);
    const bool done = std::abs(prev - mse) <= detail::kLloydTolerance * std::max(prev, 1e-300);
    prev = mse;
    if (done) break;
  }
  return ScalarQuantizer(std::move(p), prev);
}

//-----------------------------------------------------------------------------
// Coded scheme
//-----------------------------------------------------------------------------

/// Per-entry quantizer bank. When `rotation` is set, entries are quantized in
/// the coordinates u = rotation^T x and mapped back with rotation * u.
struct CodedScheme {
  BitAllocation allocation;
  std::vector<ScalarQuantizer> quantizers;
  std::optional<Mat> rotation;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(quantizers.size()); }

  void validate() const {
    if (allocation.bits.size() != quantizers.size()) throw DimensionError("CodedScheme: allocation/quantizer mismatch");
    for (std::size_t i = 0; i < quantizers.size(); ++i)
      if (quantizers[i].levels() != (std::size_t{1} << allocation.bits[i]))
        throw DomainError("CodedScheme: quantizer " + std::to_string(i) + " does not have 2^b points");
  }
};

/// Gaussian-model scheme: allocation from `variances`, Lloyd-Max designs
/// scaled per entry (one unit-variance design per distinct bit count).
inline CodedScheme make_coded_scheme(std::span<const double> variances, int total_bits,
                                     std::optional<Mat> rotation = std::nullopt) {
  CodedScheme s;
  s.allocation = allocate_bits(variances, total_bits);
  s.rotation = std::move(rotation);
  std::map<int, ScalarQuantizer> unit;
  for (std::size_t i = 0; i < variances.size(); ++i) {
    const int b = s.allocation.bits[i];
    if (b == 0) {
      s.quantizers.emplace_back(std::vector<double>{0.0}, variances[i]);
      continue;
    }
    if (!(variances[i] > 0.0)) throw DomainError("make_coded_scheme: bits allocated to a zero-variance entry");
    auto it = unit.find(b);
    if (it == unit.end()) it = unit.emplace(b, design_gaussian_quantizer(1.0, b)).first;
    const double sd = std::sqrt(variances[i]);
    std::vector<double> pts = it->second.points();
    for (double& v : pts) v *= sd;
    s.quantizers.emplace_back(std::move(pts), it->second.design_mse() * variances[i]);
  }
  return s;
}

/// Data-driven scheme: per-column sample variances drive the allocation and
/// each quantizer is a Lloyd design on that column's training values.
inline CodedScheme make_coded_scheme_from_samples(const Mat& training, int total_bits) {
  if (training.rows() == 0) throw DomainError("make_coded_scheme_from_samples: empty training set");
  const Vec mean = training.colwise().mean();
  std::vector<double> var(static_cast<std::size_t>(training.cols()));
  for (Eigen::Index j = 0; j < training.cols(); ++j)
    var[static_cast<std::size_t>(j)] = (training.col(j).array() - mean[j]).square().mean();
  CodedScheme s;
  s.allocation = allocate_bits(var, total_bits);
  std::vector<double> column(static_cast<std::size_t>(training.rows()));
  for (Eigen::Index j = 0; j < training.cols(); ++j) {
    for (Eigen::Index t = 0; t < training.rows(); ++t) column[static_cast<std::size_t>(t)] = training(t, j);
    s.quantizers.push_back(design_sample_quantizer(column, s.allocation.bits[static_cast<std::size_t>(j)]));
  }
  return s;
}

inline Vec coded_transmit(const CodedScheme& scheme, const Vec& x) {
  if (x.size() != scheme.dim()) throw DimensionError("coded_transmit: dimension mismatch");
  Vec u = scheme.rotation ? Vec(scheme.rotation->transpose() * x) : x;
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = scheme.quantizers[static_cast<std::size_t>(i)].quantize(u[i]);
  return scheme.rotation ? Vec(*scheme.rotation * u) : u;
}

/// Rows are samples.
inline Mat coded_transmit_batch(const CodedScheme& scheme, const Mat& x) {
  if (x.cols() != scheme.dim()) throw DimensionError("coded_transmit: dimension mismatch");
  Mat u = scheme.rotation ? Mat(x * *scheme.rotation) : x;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    const auto& q = scheme.quantizers[static_cast<std::size_t>(j)];
    for (Eigen::Index t = 0; t < u.rows(); ++t) u(t, j) = q.quantize(u(t, j));
  }
  return scheme.rotation ? Mat(u * scheme.rotation->transpose()) : u;
}

//-----------------------------------------------------------------------------
// Uncoded scheme
//-----------------------------------------------------------------------------

struct UncodedScheme {
  Mat q;  // D x N, orthonormal columns
};

inline UncodedScheme make_uncoded_scheme(Eigen::Index n, Eigen::Index d, RngStream& rng) {
  return {random_orthonormal_columns(d, n, rng)};
}

/// Q^T (Q x + z). Gamma is the SNR per channel symbol, whose signal power is
/// N/D for a unit-power source, so z ~ N(0, (N/D) Gamma^-1 I_D).
inline Vec uncoded_transmit(const UncodedScheme& scheme, const Vec& x, const ChannelParams& params, RngStream& rng) {
  if (x.size() != scheme.q.cols() || params.d != scheme.q.rows())
    throw DimensionError("uncoded_transmit: dimension mismatch");
  Vec y = scheme.q * x;
  if (!std::isinf(params.snr_linear)) y += gaussian_vec(y.size(), 0.0, params.effective_noise_variance(), rng);
  return scheme.q.transpose() * y;
}

/// Rows are samples; consumes the stream exactly like repeated uncoded_transmit.
inline Mat uncoded_transmit_batch(const UncodedScheme& scheme, const Mat& x, const ChannelParams& params,
                                  RngStream& rng) {
  if (x.cols() != scheme.q.cols() || params.d != scheme.q.rows())
    throw DimensionError("uncoded_transmit: dimension mismatch");
  Mat y = x * scheme.q.transpose();
  if (!std::isinf(params.snr_linear)) {
    const double sd = std::sqrt(params.effective_noise_variance());
    for (Eigen::Index t = 0; t < y.rows(); ++t)
      for (Eigen::Index j = 0; j < y.cols(); ++j) y(t, j) += sd * rng.normal();
  }
  return y * scheme.q;
}

/// Equivalent reduced form x + w, w ~ N(0, (N/D) Gamma^-1 I_N).
inline Vec uncoded_transmit_reduced(const Vec& x, const ChannelParams& params, RngStream& rng) {
  return x + gaussian_vec(x.size(), 0.0, params.effective_noise_variance(), rng);
}

//-----------------------------------------------------------------------------
// Power diagnostic
//-----------------------------------------------------------------------------

namespace detail {
inline void require_power_samples(const Mat& samples) {
  if (samples.rows() < 1000) throw DomainError("transmit_power: need at least 1000 samples");
}
}  // namespace detail

/// (1/D) mean ||Q x||^2 over the rows of `samples`.
inline double transmit_power(const UncodedScheme& scheme, const Mat& samples) {
  detail::require_power_samples(samples);
  const Mat enc = samples * scheme.q.transpose();
  return enc.rowwise().squaredNorm().mean() / static_cast<double>(scheme.q.rows());
}

/// (1/N) mean ||quantized x||^2: power of the reconstruction the code carries.
inline double transmit_power(const CodedScheme& scheme, const Mat& samples) {
  detail::require_power_samples(samples);
  const Mat rec = coded_transmit_batch(scheme, samples);
  return rec.rowwise().squaredNorm().mean() / static_cast<double>(scheme.dim());
}

}  // namespace radet
