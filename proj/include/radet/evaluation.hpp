#pragma once

// Detection accuracy (best balanced threshold), closed-form accuracy for the
// uncoded PCA pipeline, and the Monte Carlo sweeps over channel SNR.

#include "radet/autoencoder.hpp"
#include "radet/benchmark.hpp"
#include "radet/config.hpp"
#include "radet/pca.hpp"
#include "radet/source.hpp"
#include "radet/transmission.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

namespace radet {

//-----------------------------------------------------------------------------
// Accuracy
//-----------------------------------------------------------------------------

struct ScoredDataset {
  std::vector<double> nominal_scores;
  std::vector<double> anomalous_scores;
};

/// Accuracy and the threshold achieving it; a sample is flagged when score > delta.
struct AccuracyPoint {
  double accuracy = 0.0;
  double delta = 0.0;
};

/// Exact supremum over thresholds of the fraction of correctly classified
/// samples. Candidate thresholds sit below all scores, at midpoints between
/// adjacent distinct scores, and at the maximum; ties keep the smaller delta.
inline AccuracyPoint best_accuracy(const ScoredDataset& ds) {
  if (ds.nominal_scores.empty() || ds.anomalous_scores.empty())
    throw DomainError("best_accuracy: both score sets must be nonempty");
  std::vector<std::pair<double, bool>> all;  // (score, is_anomalous)
  all.reserve(ds.nominal_scores.size() + ds.anomalous_scores.size());
  for (double s : ds.nominal_scores) all.emplace_back(s, false);
  for (double s : ds.anomalous_scores) all.emplace_back(s, true);
  for (const auto& [s, _] : all)
    if (!std::isfinite(s)) throw DomainError("best_accuracy: non-finite score");
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  const double total = static_cast<double>(all.size());
  long correct = static_cast<long>(ds.anomalous_scores.size());  // delta below every score
  long best = correct;
  double best_delta = all.front().first - std::max(1.0, std::abs(all.front().first));
  for (std::size_t i = 0; i < all.size();) {
    const double v = all[i].first;
    for (; i < all.size() && all[i].first == v; ++i) correct += all[i].second ? -1 : 1;
    if (correct > best) {
      best = correct;
      best_delta = i < all.size() ? 0.5 * (v + all[i].first) : v;
    }
  }
  return {static_cast<double>(best) / total, best_delta};
}

inline ScoredDataset make_scored(const Vec& nominal, const Vec& anomalous) {
  return {to_std_vector(nominal), to_std_vector(anomalous)};
}

//-----------------------------------------------------------------------------
// Analytic accuracy (uncoded)
//-----------------------------------------------------------------------------

/// `count` faults of squared norm `fault.squared_norm`, uniform on the sphere; rows.
inline Mat fault_directions(const SourceSpec& spec, const FaultSpec& fault, Eigen::Index count, RngStream& rng) {
  Mat out(count, spec.dim());
  for (Eigen::Index i = 0; i < count; ++i) out.row(i) = sample_fault(spec, fault, rng).transpose();
  return out;
}

inline std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2) throw DomainError("linear_grid: need at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return g;
}

/// FP(delta) and direction-averaged TP(delta) on a grid of norm thresholds.
struct AnalyticCurves {
  std::vector<double> fp, tp;
};

inline AnalyticCurves analytic_curves(const SourceSpec& spec, const ChannelParams& params, const PcaDetector& det,
                                      const Mat& faults, std::span<const double> delta_grid,
                                      SchemeKind kind = SchemeKind::uncoded) {
  require_analytic(kind);
  if (faults.rows() == 0) throw DomainError("analytic_curves: no fault vectors");
  AnalyticCurves c{std::vector<double>(delta_grid.size()), std::vector<double>(delta_grid.size(), 0.0)};
  const TailMoments fp_m = tail_moments(residual_lambdas(spec, params, 1.0, det.k()));
  for (std::size_t g = 0; g < delta_grid.size(); ++g) c.fp[g] = approx_tail_prob(fp_m, delta_grid[g]);
  for (Eigen::Index r = 0; r < faults.rows(); ++r) {
    const TailMoments tp_m = tail_moments(tp_quadform(spec, params, det, faults.row(r).transpose()));
    for (std::size_t g = 0; g < delta_grid.size(); ++g) c.tp[g] += approx_tail_prob(tp_m, delta_grid[g]);
  }
  for (double& v : c.tp) v /= static_cast<double>(faults.rows());
  return c;
}

/// max over the grid of (P TP + N (1 - FP)) / (P + N); balanced classes by default.
inline AccuracyPoint analytic_accuracy(const SourceSpec& spec, const ChannelParams& params, const PcaDetector& det,
                                       const Mat& faults, std::span<const double> delta_grid,
                                       SchemeKind kind = SchemeKind::uncoded, double positives = 1.0,
                                       double negatives = 1.0) {
  const AnalyticCurves c = analytic_curves(spec, params, det, faults, delta_grid, kind);
  AccuracyPoint best{-1.0, 0.0};
  for (std::size_t g = 0; g < delta_grid.size(); ++g) {
    const double acc = (positives * c.tp[g] + negatives * (1.0 - c.fp[g])) / (positives + negatives);
    if (acc > best.accuracy) best = {acc, delta_grid[g]};
  }
  return best;
}

//-----------------------------------------------------------------------------
// Crossover
//-----------------------------------------------------------------------------

/// Smallest grid SNR from which uncoded >= coded holds for the rest of the
/// grid, provided coded was strictly ahead at the preceding grid point.
inline std::optional<double> crossover_snr(std::span<const double> snr_db, std::span<const double> uncoded,
                                           std::span<const double> coded) {
  if (snr_db.size() != uncoded.size() || snr_db.size() != coded.size())
    throw DimensionError("crossover_snr: curve lengths differ");
  std::size_t i = snr_db.size();
  while (i > 0 && uncoded[i - 1] >= coded[i - 1]) --i;
  if (i == snr_db.size() || i == 0) return std::nullopt;
  return snr_db[i];
}

//-----------------------------------------------------------------------------
// Work distribution
//-----------------------------------------------------------------------------

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(count))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

//-----------------------------------------------------------------------------
// PCA sweep
//-----------------------------------------------------------------------------

namespace tag {
enum : std::uint64_t {
  basis = 1,
  nominal_test,
  anomalous_test,
  training,
  spreading,
  noise_nominal,
  noise_anomalous,
  noise_training,
  directions,
  benchmark,
  ae_sets,
};
}  // namespace tag

struct PcaSweepResult {
  std::vector<double> snr_db;
  std::vector<double> radii_sq;
  Mat uncoded_mc;        // snr x radius; NaN when the scheme was not run
  Mat uncoded_analytic;
  Mat coded_mc;
  Vec channel_free_mc;   // per radius
  Vec channel_free_analytic;
  std::vector<int> coded_bits;  // B per SNR, -1 when not run
  std::vector<bool> degenerate_coded_fit;

  std::optional<double> crossover(std::size_t radius_index) const {
    const Vec u = uncoded_mc.col(static_cast<Eigen::Index>(radius_index));
    const Vec c = coded_mc.col(static_cast<Eigen::Index>(radius_index));
    if (!u.allFinite() || !c.allFinite()) return std::nullopt;
    return crossover_snr(snr_db, to_std_vector(u), to_std_vector(c));
  }
};

/// Source for the PCA experiment: the five-component spectrum, rotated by a
/// seeded random basis unless `basis = identity`.
inline SourceSpec pca_source(const ExperimentConfig& cfg) {
  SourceSpec spec = reference_spectrum(cfg.n);
  if (cfg.basis == BasisKind::random) {
    RngStream rng(cfg.seed, stream_id({tag::basis}));
    spec = with_random_basis(std::move(spec), rng);
  }
  return spec;
}

/// Largest threshold needed: 3 sqrt(theta_1) at the noisiest grid point plus the largest fault.
inline std::vector<double> pca_delta_grid(const ExperimentConfig& cfg, const SourceSpec& spec) {
  const double lowest_snr = *std::min_element(cfg.snr_db_grid.begin(), cfg.snr_db_grid.end());
  const ChannelParams worst = ChannelParams::from_db(lowest_snr, cfg.n, cfg.d);
  const double theta1 = residual_lambdas(spec, worst, 1.0, cfg.k).lambdas.sum();
  const double max_fault = *std::max_element(cfg.fault_radii_sq.begin(), cfg.fault_radii_sq.end());
  return linear_grid(0.0, 3.0 * std::sqrt(theta1 + max_fault), cfg.delta_grid_points);
}

inline CodedScheme pca_coded_scheme(const ExperimentConfig& cfg, const SourceSpec& spec, int bits) {
  if (cfg.quantize_basis == QuantizeBasis::eigen)
    return make_coded_scheme(to_std_vector(spec.eigenvalues), bits, spec.basis);
  const Vec var = spec.covariance().diagonal();
  return make_coded_scheme(to_std_vector(var), bits);
}

inline PcaSweepResult run_pca_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const SourceSpec spec = pca_source(cfg);
  const auto n_snr = cfg.snr_db_grid.size();
  const auto n_rad = cfg.fault_radii_sq.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool run_uncoded = cfg.scheme != SchemeSelection::coded;
  const bool run_coded = cfg.scheme != SchemeSelection::uncoded;

  PcaSweepResult res;
  res.snr_db = cfg.snr_db_grid;
  res.radii_sq = cfg.fault_radii_sq;
  res.uncoded_mc = Mat::Constant(static_cast<Eigen::Index>(n_snr), static_cast<Eigen::Index>(n_rad), nan);
  res.uncoded_analytic = res.uncoded_mc;
  res.coded_mc = res.uncoded_mc;
  res.channel_free_mc = Vec::Constant(static_cast<Eigen::Index>(n_rad), nan);
  res.channel_free_analytic = res.channel_free_mc;
  res.coded_bits.assign(n_snr, -1);
  res.degenerate_coded_fit.assign(n_snr, false);

  // Test sets and fault directions are shared by every SNR point.
  RngStream nominal_rng(cfg.seed, stream_id({tag::nominal_test}));
  const Mat x0 = sample_nominal_batch(spec, cfg.trials, nominal_rng);
  std::vector<Mat> x1(n_rad), faults(n_rad);
  for (std::size_t r = 0; r < n_rad; ++r) {
    const FaultSpec fault{cfg.fault_radii_sq[r]};
    RngStream arng(cfg.seed, stream_id({tag::anomalous_test, r}));
    x1[r] = sample_anomalous_batch(spec, fault, cfg.trials, arng);
    RngStream drng(cfg.seed, stream_id({tag::directions, r}));
    faults[r] = fault_directions(spec, fault, cfg.directions, drng);
  }
  RngStream train_rng(cfg.seed, stream_id({tag::training}));
  const Mat x_train = sample_nominal_batch(spec, cfg.train_trials, train_rng);
  RngStream spread_rng(cfg.seed, stream_id({tag::spreading}));
  const UncodedScheme uncoded = make_uncoded_scheme(cfg.n, cfg.d, spread_rng);
  const std::vector<double> delta_grid = pca_delta_grid(cfg, spec);

  // Channel-free reference: x' = x, detector from Sigma.
  {
    const ChannelParams clean{std::numeric_limits<double>::infinity(), cfg.n, cfg.d};
    const PcaDetector det = fit_uncoded_detector(spec, clean, cfg.k);
    const Vec s0 = det.residual_norm_sq_batch(x0);
    for (std::size_t r = 0; r < n_rad; ++r) {
      res.channel_free_mc[static_cast<Eigen::Index>(r)] =
          best_accuracy(make_scored(s0, det.residual_norm_sq_batch(x1[r]))).accuracy;
      res.channel_free_analytic[static_cast<Eigen::Index>(r)] =
          analytic_accuracy(spec, clean, det, faults[r], delta_grid).accuracy;
    }
  }

  parallel_for(n_snr, resolve_threads(cfg.threads), [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const ChannelParams params = ChannelParams::from_db(cfg.snr_db_grid[i], cfg.n, cfg.d);

    if (run_uncoded) {
      PcaDetector det = fit_uncoded_detector(spec, params, cfg.k);
      if (cfg.uncoded_detector == DetectorFit::empirical) {
        RngStream rng(cfg.seed, stream_id({tag::noise_training, i}));
        det = PcaDetector::fit(second_moment(uncoded_transmit_batch(uncoded, x_train, params, rng)), cfg.k);
      }
      RngStream rng0(cfg.seed, stream_id({tag::noise_nominal, i}));
      const Vec s0 = det.residual_norm_sq_batch(uncoded_transmit_batch(uncoded, x0, params, rng0));
      // The closed form assumes the detector is fitted to the analytic covariance.
      const PcaDetector analytic_det = fit_uncoded_detector(spec, params, cfg.k);
      for (std::size_t r = 0; r < n_rad; ++r) {
        RngStream rng1(cfg.seed, stream_id({tag::noise_anomalous, i, r}));
        const Vec s1 = det.residual_norm_sq_batch(uncoded_transmit_batch(uncoded, x1[r], params, rng1));
        const auto col = static_cast<Eigen::Index>(r);
        res.uncoded_mc(row, col) = best_accuracy(make_scored(s0, s1)).accuracy;
        res.uncoded_analytic(row, col) = analytic_accuracy(spec, params, analytic_det, faults[r], delta_grid).accuracy;
      }
    }

    if (run_coded) {
      const int bits = capacity_bits(params);
      res.coded_bits[i] = bits;
      const CodedScheme scheme = pca_coded_scheme(cfg, spec, bits);
      const PcaDetector det = cfg.coded_detector == DetectorFit::empirical
                                  ? PcaDetector::fit(second_moment(coded_transmit_batch(scheme, x_train)), cfg.k)
                                  : PcaDetector::fit(spec.covariance(), cfg.k);
      res.degenerate_coded_fit[i] = det.degenerate_cut();
      const Vec s0 = det.residual_norm_sq_batch(coded_transmit_batch(scheme, x0));
      for (std::size_t r = 0; r < n_rad; ++r) {
        const Vec s1 = det.residual_norm_sq_batch(coded_transmit_batch(scheme, x1[r]));
        res.coded_mc(row, static_cast<Eigen::Index>(r)) = best_accuracy(make_scored(s0, s1)).accuracy;
      }
    }
  });
  return res;
}

//-----------------------------------------------------------------------------
// FP/TP table
//-----------------------------------------------------------------------------

struct FpTpRow {
  double snr_db, radius_sq, delta, fp, tp;
};

/// Closed-form FP and direction-averaged TP over the threshold grid for every
/// (SNR, fault radius) pair, uncoded transmission.
inline std::vector<FpTpRow> fp_tp_table(const ExperimentConfig& cfg) {
  validate(cfg);
  const SourceSpec spec = pca_source(cfg);
  const std::vector<double> grid = pca_delta_grid(cfg, spec);
  std::vector<FpTpRow> rows;
  for (std::size_t r = 0; r < cfg.fault_radii_sq.size(); ++r) {
    RngStream drng(cfg.seed, stream_id({tag::directions, r}));
    const Mat faults = fault_directions(spec, FaultSpec{cfg.fault_radii_sq[r]}, cfg.directions, drng);
    for (double snr : cfg.snr_db_grid) {
      const ChannelParams params = ChannelParams::from_db(snr, cfg.n, cfg.d);
      const PcaDetector det = fit_uncoded_detector(spec, params, cfg.k);
      const AnalyticCurves c = analytic_curves(spec, params, det, faults, grid);
      for (std::size_t g = 0; g < grid.size(); ++g) rows.push_back({snr, cfg.fault_radii_sq[r], grid[g], c.fp[g], c.tp[g]});
    }
  }
  return rows;
}

//-----------------------------------------------------------------------------
// Autoencoder sweep
//-----------------------------------------------------------------------------

struct AeDataset {
  Mat train;           // nominal, rows are samples
  Mat test_nominal;
  Mat test_anomalous;
};

inline BenchmarkOptions benchmark_options_for(int dim) {
  BenchmarkOptions opt;
  opt.dim = dim;
  opt.quiet = dim / 5;
  return opt;
}

/// Synthetic benchmark sets, or feature files (the nominal file is shuffled;
/// as many nominal rows as anomalous ones are held out for testing).
inline AeDataset make_ae_dataset(const ExperimentConfig& cfg) {
  AeDataset ds;
  if (cfg.features.empty()) {
    const ManifoldBenchmark bench = ManifoldBenchmark::make(cfg.seed, benchmark_options_for(cfg.n));
    RngStream rng(cfg.seed, stream_id({tag::ae_sets}));
    ds.train = bench.sample_nominal(cfg.ae_train, rng);
    ds.test_nominal = bench.sample_nominal(cfg.ae_test, rng);
    ds.test_anomalous = bench.sample_anomalous(cfg.ae_test, rng);
    return ds;
  }
  Mat nominal = read_feature_file(cfg.features, cfg.n);
  ds.test_anomalous = read_feature_file(cfg.anomalous_features, cfg.n);
  const Eigen::Index held = ds.test_anomalous.rows();
  if (nominal.rows() - held < cfg.batch_size)
    throw ConfigError("features: need at least " + std::to_string(held + cfg.batch_size) +
                      " nominal rows (anomalous rows + batch_size)");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(nominal.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  RngStream rng(cfg.seed, stream_id({tag::ae_sets}));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
  ds.test_nominal.resize(held, cfg.n);
  ds.train.resize(nominal.rows() - held, cfg.n);
  for (Eigen::Index i = 0; i < nominal.rows(); ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    if (i < held) ds.test_nominal.row(i) = nominal.row(src);
    else ds.train.row(i - held) = nominal.row(src);
  }
  return ds;
}

struct AePoint {
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  int bits = -1;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // nonempty when training failed at this point
  std::string checkpoint;
};

struct AeSweepResult {
  std::vector<double> snr_db;
  std::vector<AePoint> uncoded, coded;  // empty when the scheme was not run

  static std::vector<double> accuracies(const std::vector<AePoint>& pts) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p.accuracy);
    return v;
  }
};

inline std::string snr_label(double snr_db) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2fdB", snr_db);
  return buf;
}

/// Per SNR and scheme: transmit all sets, train on the received nominal
/// training set, score the received test sets. A training failure is
/// recorded at its point and does not stop the others. Checkpoints go to
/// `checkpoint_dir` when it is nonempty.
inline AeSweepResult run_ae_sweep(const ExperimentConfig& cfg, const AeDataset& data,
                                  const std::string& checkpoint_dir = {}) {
  validate(cfg);
  const auto n_snr = cfg.snr_db_grid.size();
  AeSweepResult res;
  res.snr_db = cfg.snr_db_grid;
  std::vector<SchemeKind> kinds;
  if (cfg.scheme != SchemeSelection::coded) {
    kinds.push_back(SchemeKind::uncoded);
    res.uncoded.resize(n_snr);
  }
  if (cfg.scheme != SchemeSelection::uncoded) {
    kinds.push_back(SchemeKind::coded);
    res.coded.resize(n_snr);
  }
  RngStream spread_rng(cfg.seed, stream_id({tag::spreading}));
  const UncodedScheme uncoded = make_uncoded_scheme(cfg.n, cfg.d, spread_rng);
  const MlpSpec mlp_spec = MlpSpec::baseline(cfg.n);
  TrainConfig tcfg;
  tcfg.epochs = cfg.epochs;
  tcfg.batch_size = cfg.batch_size;
  tcfg.learning_rate = cfg.learning_rate;
  tcfg.seed = cfg.seed;
  tcfg.optimizer = cfg.optimizer == "sgd" ? Optimizer::sgd : Optimizer::adam;

  parallel_for(n_snr * kinds.size(), resolve_threads(cfg.threads), [&](std::size_t unit) {
    const std::size_t i = unit / kinds.size();
    const SchemeKind kind = kinds[unit % kinds.size()];
    AePoint& pt = kind == SchemeKind::coded ? res.coded[i] : res.uncoded[i];
    const ChannelParams params = ChannelParams::from_db(cfg.snr_db_grid[i], cfg.n, cfg.d);

    Mat tr, t0, t1;
    if (cfg.noiseless) {
      tr = data.train, t0 = data.test_nominal, t1 = data.test_anomalous;
    } else if (kind == SchemeKind::uncoded) {
      RngStream a(cfg.seed, stream_id({tag::noise_training, i})), b(cfg.seed, stream_id({tag::noise_nominal, i})),
          c(cfg.seed, stream_id({tag::noise_anomalous, i}));
      tr = uncoded_transmit_batch(uncoded, data.train, params, a);
      t0 = uncoded_transmit_batch(uncoded, data.test_nominal, params, b);
      t1 = uncoded_transmit_batch(uncoded, data.test_anomalous, params, c);
    } else {
      pt.bits = capacity_bits(params);
      const CodedScheme scheme = make_coded_scheme_from_samples(data.train, pt.bits);
      tr = coded_transmit_batch(scheme, data.train);
      t0 = coded_transmit_batch(scheme, data.test_nominal);
      t1 = coded_transmit_batch(scheme, data.test_anomalous);
    }
    try {
      TrainResult trained = train(Mlp::initialized(mlp_spec, cfg.seed), tr, tcfg);
      pt.final_loss = trained.epoch_losses.back();
      pt.accuracy = best_accuracy(make_scored(score_batch(trained.model, t0), score_batch(trained.model, t1))).accuracy;
      if (!checkpoint_dir.empty()) {
        pt.checkpoint = (std::filesystem::path(checkpoint_dir) /
                         ("ae_" + std::string(to_string(kind)) + "_snr" + snr_label(cfg.snr_db_grid[i]) + ".ckpt"))
                            .string();
        save_checkpoint(pt.checkpoint, trained.model, cfg.seed);
      }
    } catch (const TrainingError& e) {
      pt.error = e.what();
    } catch (const DomainError& e) {
      pt.error = e.what();
    }
  });
  return res;
}

//-----------------------------------------------------------------------------
// Tables
//-----------------------------------------------------------------------------

/// Whitespace-delimited table: a '#' header line, then one row per SNR with
/// the SNR in column 0. NaN prints as "nan".
inline void write_table(std::ostream& os, const std::string& header, std::span<const double> snr_db, const Mat& columns) {
  os << "# " << header << '\n';
  char buf[64];
  for (std::size_t i = 0; i < snr_db.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f", snr_db[i]);
    os << buf;
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
      const double v = columns(static_cast<Eigen::Index>(i), c);
      if (std::isnan(v)) {
        os << " nan";
      } else {
        std::snprintf(buf, sizeof buf, " %.6f", v);
        os << buf;
      }
    }
    os << '\n';
  }
}

}  // namespace radet
