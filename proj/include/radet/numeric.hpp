#pragma once

// Dense linear algebra, seeded random streams and the standard normal CDF.
// Everything here is a pure function of its arguments, except RngStream which
// carries engine state and must be owned by a single unit of work.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace radet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

//-----------------------------------------------------------------------------
// Errors
//-----------------------------------------------------------------------------

/// A caller broke a documented precondition (e.g. a non-symmetric matrix).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// An argument is outside the domain where the operation is defined.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Shapes do not agree.
struct DimensionError : std::length_error {
  using std::length_error::length_error;
};

/// A numerical routine produced or would produce a non-finite result.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//-----------------------------------------------------------------------------
// Random streams
//-----------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Folds a path of tags (e.g. {radius index, SNR index, purpose}) into one
/// stream id so nested work units get distinct, reproducible streams.
constexpr std::uint64_t stream_id(std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (auto t : tags) h = splitmix64(h ^ splitmix64(t));
  return h;
}

/// Reproducible random stream keyed by (seed, stream id). Two instances built
/// from the same pair produce bit-identical draws on the same platform.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0xD1B54A32D192ED03ull));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  /// Child stream for a sub-task; independent of how many draws this one made.
  RngStream child(std::uint64_t tag) const { return {seed_, stream_id({stream_, tag})}; }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// n i.i.d. draws from N(mean, variance).
inline Vec gaussian_vec(Eigen::Index n, double mean, double variance, RngStream& rng) {
  if (!(variance >= 0.0)) throw DomainError("gaussian_vec: variance must be >= 0");
  const double sd = std::sqrt(variance);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = mean + sd * rng.normal();
  return v;
}

inline Mat gaussian_mat(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Mat m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

//-----------------------------------------------------------------------------
// Standard normal CDF
//-----------------------------------------------------------------------------

/// Phi(x). erfc keeps full relative precision in the lower tail.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// 1 - Phi(x) without cancellation in the upper tail.
inline double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

//-----------------------------------------------------------------------------
// Symmetric eigendecomposition
//-----------------------------------------------------------------------------

struct SymEigen {
  Vec values;   // descending
  Mat vectors;  // column i pairs with values[i]
};

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool is_symmetric(const Mat& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.transpose()) <= rel_tol * std::max(1.0, max_abs(m));
}

/// Flips each column so its first entry with magnitude above `eps` is positive.
inline void canonicalize_signs(Mat& vectors, double eps = 1e-12) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) > eps) {
        if (vectors(i, j) < 0) vectors.col(j) *= -1.0;
        break;
      }
    }
  }
}

/// Eigenvalues in descending order with orthonormal eigenvectors. Ties keep
/// the solver's order (stable sort), signs follow canonicalize_signs.
inline SymEigen eig_sym(const Mat& m) {
  if (m.rows() != m.cols()) throw DimensionError("eig_sym: matrix is not square");
  if (!is_symmetric(m)) throw ContractError("eig_sym: matrix is not symmetric");
  if (!m.allFinite()) throw NumericalError("eig_sym: non-finite entries");

  Eigen::SelfAdjointEigenSolver<Mat> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("eig_sym: solver did not converge");

  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Vec& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ev[a] > ev[b]; });

  SymEigen out{Vec(n), Mat(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = ev[order[static_cast<std::size_t>(i)]];
    out.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  canonicalize_signs(out.vectors);
  return out;
}

//-----------------------------------------------------------------------------
// Orthonormal matrices
//-----------------------------------------------------------------------------

/// ||Q^T Q - I||_inf (max-abs entry).
inline double orthonormality_error(const Mat& q) {
  return max_abs(q.transpose() * q - Mat::Identity(q.cols(), q.cols()));
}

/// D x N matrix with orthonormal columns, obtained by orthonormalizing a
/// Gaussian matrix. Draws that are numerically close to rank deficient are
/// discarded and redrawn.
inline Mat random_orthonormal_columns(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  if (rows < cols) throw DimensionError("random_orthonormal_columns: rows < cols");
  if (cols == 0) return Mat(rows, 0);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const Mat g = gaussian_mat(rows, cols, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    const Mat r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    const double min_diag = r.diagonal().cwiseAbs().minCoeff();
    const double max_diag = r.diagonal().cwiseAbs().maxCoeff();
    if (min_diag <= 1e-8 * max_diag) continue;
    Mat q = qr.householderQ() * Mat::Identity(rows, cols);
    // Make Q independent of the QR sign convention: Q R with diag(R) > 0.
    for (Eigen::Index j = 0; j < cols; ++j)
      if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
  }
  throw NumericalError("random_orthonormal_columns: repeated degenerate draws");
}

//-----------------------------------------------------------------------------
// Small helpers
//-----------------------------------------------------------------------------

/// Linear power ratio from decibels.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Symmetric inverse square root through the eigendecomposition.
inline Mat inv_sqrt_sym(const Mat& m) {
  const SymEigen e = eig_sym(m);
  if (e.values.minCoeff() <= 0.0) throw NumericalError("inv_sqrt_sym: matrix is not positive definite");
  return e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.transpose();
}

/// Sample covariance about zero (rows are samples), i.e. X^T X / n.
inline Mat second_moment(const Mat& samples) {
  if (samples.rows() == 0) throw DomainError("second_moment: no samples");
  Mat c = Mat::Zero(samples.cols(), samples.cols());
  c.selfadjointView<Eigen::Lower>().rankUpdate(samples.transpose(), 1.0 / static_cast<double>(samples.rows()));
  return c.selfadjointView<Eigen::Lower>();
}

inline std::vector<double> to_std_vector(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace radet
