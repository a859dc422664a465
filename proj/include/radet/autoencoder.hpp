#pragma once

// Fully-connected autoencoder scored by reconstruction error. Parameters live
// in one flat array (per layer: weights column-major, then biases) so the
// optimizer, finite-difference checks and checkpoints all see the same layout.

#include "radet/numeric.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace radet {

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Layer widths including the input, e.g. {320, 64, 64, 8, 64, 64, 320}.
/// ReLU after every layer except the last, which is linear.
struct MlpSpec {
  std::vector<int> layer_sizes;

  static MlpSpec baseline(int input = 320) { return {{input, 64, 64, 8, 64, 64, input}}; }

  int input() const { return layer_sizes.front(); }
  int output() const { return layer_sizes.back(); }
  std::size_t layers() const { return layer_sizes.size() - 1; }

  void validate() const {
    if (layer_sizes.size() < 2) throw DomainError("MlpSpec: need at least one layer");
    for (int s : layer_sizes)
      if (s < 1) throw DomainError("MlpSpec: layer sizes must be >= 1");
  }

  /// Input width equals output width and some hidden layer is narrower.
  void validate_autoencoder() const {
    validate();
    if (input() != output()) throw DomainError("MlpSpec: autoencoder input and output sizes differ");
    int bottleneck = input();
    for (std::size_t i = 1; i + 1 < layer_sizes.size(); ++i) bottleneck = std::min(bottleneck, layer_sizes[i]);
    if (bottleneck >= input()) throw DomainError("MlpSpec: bottleneck must be smaller than the input");
  }

  bool operator==(const MlpSpec&) const = default;
};

enum class Optimizer { sgd, adam };

struct TrainConfig {
  int epochs = 100;
  int batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;

  void validate() const {
    if (epochs < 1 || batch_size < 1 || !(learning_rate > 0.0))
      throw DomainError("TrainConfig: epochs, batch_size and learning_rate must be positive");
  }
};

class Mlp {
 public:
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
      offsets_.push_back(off);
      off += static_cast<std::size_t>(spec_.layer_sizes[l + 1]) * static_cast<std::size_t>(spec_.layer_sizes[l] + 1);
    }
    params_.assign(off, 0.0);
  }

  /// Weights and biases uniform in +-1/sqrt(fan_in).
  static Mlp initialized(MlpSpec spec, std::uint64_t seed) {
    Mlp m(std::move(spec));
    RngStream rng(seed, stream_id({0x696E6974ull}));
    for (std::size_t l = 0; l < m.spec_.layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(m.spec_.layer_sizes[l]));
      const std::size_t begin = m.offsets_[l], end = begin + m.layer_param_count(l);
      for (std::size_t i = begin; i < end; ++i) m.params_[i] = bound * (2.0 * rng.uniform() - 1.0);
    }
    return m;
  }

  const MlpSpec& spec() const { return spec_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  Eigen::Map<const Mat> weight(std::size_t l) const {
    return {params_.data() + offsets_[l], spec_.layer_sizes[l + 1], spec_.layer_sizes[l]};
  }
  Eigen::Map<Mat> weight(std::size_t l) {
    return {params_.data() + offsets_[l], spec_.layer_sizes[l + 1], spec_.layer_sizes[l]};
  }
  Eigen::Map<const Vec> bias(std::size_t l) const {
    return {params_.data() + offsets_[l] + weight_count(l), spec_.layer_sizes[l + 1]};
  }
  Eigen::Map<Vec> bias(std::size_t l) {
    return {params_.data() + offsets_[l] + weight_count(l), spec_.layer_sizes[l + 1]};
  }

  /// Columns are samples.
  Mat forward_columns(const Mat& x) const {
    if (x.rows() != spec_.input()) throw DimensionError("Mlp::forward: expected input width " + std::to_string(spec_.input()));
    Mat a = x;
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
      Mat z = weight(l) * a;
      z.colwise() += bias(l);
      if (l + 1 < spec_.layers()) z = z.cwiseMax(0.0);
      a = std::move(z);
    }
    return a;
  }

  Vec forward(const Vec& x) const { return forward_columns(x); }

  /// ||x - h(x)||^2.
  double loss(const Vec& x) const {
    if (spec_.output() != spec_.input()) throw DimensionError("Mlp::loss: output width differs from input width");
    return (forward(x) - x).squaredNorm();
  }

  /// Per-sample losses; columns are samples.
  Vec losses_columns(const Mat& x) const { return (forward_columns(x) - x).colwise().squaredNorm().transpose(); }

  /// Mean loss over the columns of `x` and its gradient w.r.t. params().
  double loss_and_gradient(const Mat& x, std::vector<double>& grad) const {
    const std::size_t layers = spec_.layers();
    std::vector<Mat> pre(layers), act(layers + 1);
    act[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
      pre[l] = weight(l) * act[l];
      pre[l].colwise() += bias(l);
      act[l + 1] = l + 1 < layers ? Mat(pre[l].cwiseMax(0.0)) : pre[l];
    }
    const double inv_b = 1.0 / static_cast<double>(x.cols());
    Mat delta = act[layers] - x;
    const double loss = delta.squaredNorm() * inv_b;
    delta *= 2.0 * inv_b;

    grad.assign(params_.size(), 0.0);
    for (std::size_t l = layers; l-- > 0;) {
      if (l + 1 < layers) delta = delta.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
      Eigen::Map<Mat> gw(grad.data() + offsets_[l], spec_.layer_sizes[l + 1], spec_.layer_sizes[l]);
      Eigen::Map<Vec> gb(grad.data() + offsets_[l] + weight_count(l), spec_.layer_sizes[l + 1]);
      gw.noalias() = delta * act[l].transpose();
      gb = delta.rowwise().sum();
      if (l > 0) delta = weight(l).transpose() * delta;
    }
    return loss;
  }

 private:
  std::size_t weight_count(std::size_t l) const {
    return static_cast<std::size_t>(spec_.layer_sizes[l + 1]) * static_cast<std::size_t>(spec_.layer_sizes[l]);
  }
  std::size_t layer_param_count(std::size_t l) const {
    return weight_count(l) + static_cast<std::size_t>(spec_.layer_sizes[l + 1]);
  }

  MlpSpec spec_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

inline Vec forward(const Mlp& model, const Vec& x) { return model.forward(x); }
inline double loss(const Mlp& model, const Vec& x) { return model.loss(x); }
/// Anomaly score: the reconstruction loss.
inline double score(const Mlp& model, const Vec& x) { return model.loss(x); }

/// Rows are samples.
inline Vec score_batch(const Mlp& model, const Mat& x) { return model.losses_columns(x.transpose()); }

struct TrainResult {
  Mlp model;
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  // mean mini-batch loss per epoch
};

/// Mini-batch training on the rows of `samples`. Deterministic given cfg.seed.
inline TrainResult train(Mlp model, const Mat& samples, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.cols() != model.spec().input()) throw DimensionError("train: sample width does not match the input layer");
  if (samples.rows() < cfg.batch_size) throw DomainError("train: fewer samples than batch_size");

  const Mat data = samples.transpose();
  const Eigen::Index count = data.cols();
  TrainResult out{std::move(model), 0.0, {}};
  out.initial_loss = out.model.losses_columns(data).mean();
  if (!std::isfinite(out.initial_loss)) throw TrainingError("train: non-finite loss before the first update");

  auto params = out.model.params();
  std::vector<double> grad, m1(params.size(), 0.0), m2(params.size(), 0.0);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Mat batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RngStream rng(cfg.seed, stream_id({0x73687566ull, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    double sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < count; start += cfg.batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(cfg.batch_size, count - start);
      batch.resize(data.rows(), size);
      for (Eigen::Index c = 0; c < size; ++c) batch.col(c) = data.col(order[static_cast<std::size_t>(start + c)]);
      const double l = out.model.loss_and_gradient(batch, grad);
      if (!std::isfinite(l))
        throw TrainingError("train: loss diverged at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batches) + " (learning_rate " + std::to_string(cfg.learning_rate) + ")");
      ++step;
      if (cfg.optimizer == Optimizer::sgd) {
        for (std::size_t p = 0; p < params.size(); ++p) params[p] -= cfg.learning_rate * grad[p];
      } else {
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t p = 0; p < params.size(); ++p) {
          m1[p] = beta1 * m1[p] + (1.0 - beta1) * grad[p];
          m2[p] = beta2 * m2[p] + (1.0 - beta2) * grad[p] * grad[p];
          params[p] -= cfg.learning_rate * (m1[p] / c1) / (std::sqrt(m2[p] / c2) + eps);
        }
      }
      sum += l;
      ++batches;
    }
    out.epoch_losses.push_back(sum / batches);
  }
  return out;
}

//-----------------------------------------------------------------------------
// Checkpoints
//-----------------------------------------------------------------------------
//
// Layout (all integers and floats little-endian):
//   8 bytes  magic "RADETAE1"
//   u32      number of layer sizes L
//   u32 x L  layer sizes
//   u64      seed
//   u64      parameter count P
//   f64 x P  parameters in Mlp::params() order

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    std::memcpy(&bits, &value, sizeof(double));
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) os.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& is) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw IoError("checkpoint: truncated file");
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  if constexpr (std::is_same_v<T, double>) {
    double v;
    std::memcpy(&v, &bits, sizeof(double));
    return v;
  } else {
    return static_cast<T>(bits);
  }
}

inline constexpr char kCheckpointMagic[8] = {'R', 'A', 'D', 'E', 'T', 'A', 'E', '1'};

}  // namespace detail

struct Checkpoint {
  Mlp model;
  std::uint64_t seed = 0;
};

inline void write_checkpoint(std::ostream& os, const Mlp& model, std::uint64_t seed) {
  os.write(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
  const auto& sizes = model.spec().layer_sizes;
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s));
  detail::put_le<std::uint64_t>(os, seed);
  detail::put_le<std::uint64_t>(os, model.params().size());
  for (double p : model.params()) detail::put_le<double>(os, p);
}

inline Checkpoint read_checkpoint(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, detail::kCheckpointMagic, sizeof magic) != 0)
    throw IoError("checkpoint: bad magic");
  const auto count = detail::get_le<std::uint32_t>(is);
  if (count < 2 || count > 1024) throw IoError("checkpoint: implausible layer count");
  MlpSpec spec;
  for (std::uint32_t i = 0; i < count; ++i) spec.layer_sizes.push_back(static_cast<int>(detail::get_le<std::uint32_t>(is)));
  const auto seed = detail::get_le<std::uint64_t>(is);
  Mlp model(spec);
  const auto n = detail::get_le<std::uint64_t>(is);
  if (n != model.params().size()) throw IoError("checkpoint: parameter count does not match layer sizes");
  for (double& p : model.params()) p = detail::get_le<double>(is);
  return {std::move(model), seed};
}

inline void save_checkpoint(const std::string& path, const Mlp& model, std::uint64_t seed) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_checkpoint(os, model, seed);
  if (!os) throw IoError("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_checkpoint(is);
}

//-----------------------------------------------------------------------------
// Feature files
//-----------------------------------------------------------------------------

/// One vector per line; fields separated by whitespace, ',' or ';'. Blank
/// lines and lines starting with '#' are skipped. Rows of the result are samples.
inline Mat read_features(std::istream& is, int expected_width, const std::string& name = "features") {
  std::vector<double> values;
  std::string line;
  long line_no = 0, rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    const auto first = line.find_first_not_of(' ');
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    int width = 0;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v))
        throw IoError(name + ":" + std::to_string(line_no) + ": not a finite number: '" + tok + "'");
      values.push_back(v);
      ++width;
    }
    if (width != expected_width)
      throw IoError(name + ":" + std::to_string(line_no) + ": expected width " + std::to_string(expected_width) +
                    ", found " + std::to_string(width));
    ++rows;
  }
  if (rows == 0) throw IoError(name + ": no feature vectors");
  Mat out(rows, expected_width);
  for (long r = 0; r < rows; ++r)
    for (int c = 0; c < expected_width; ++c) out(r, c) = values[static_cast<std::size_t>(r * expected_width + c)];
  return out;
}

inline Mat read_feature_file(const std::string& path, int expected_width) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open feature file " + path);
  return read_features(is, expected_width, path);
}

}  // namespace radet
