// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "radet/radet.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace radet;
namespace fs = std::filesystem;

namespace {

// Tolerances and margins.
constexpr double kSchemeMargin = 0.02;           // criteria 1 and 9
constexpr double kCrossoverLo = -5.0, kCrossoverHi = 5.0;
constexpr double kAnalyticVsMonteCarlo = 0.02;   // criterion 2
constexpr double kChiSquareTol = 2e-3;           // criterion 3
constexpr double kQuadFormMonteCarloTol = 0.01;  // criterion 3
constexpr double kMeanIdentityRelTol = 0.01;     // criterion 4
constexpr double kLloydTol = 1e-3;               // criterion 5
constexpr double kNoiseVarianceRelTol = 0.02;    // criterion 7
constexpr double kSpreadingTol = 1e-10;          // criterion 7
constexpr double kGradientRelTol = 1e-4;         // criterion 9

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::Index index_of(const std::vector<double>& v, double x) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i] - x) < 1e-9) return static_cast<Eigen::Index>(i);
  throw std::runtime_error("grid point missing");
}

ExperimentConfig default_pca_config() { return parse_config_text(""); }

// 1 and 2: the default sweep, shared.
void scheme_comparison_and_analytic_agreement() {
  const ExperimentConfig cfg = default_pca_config();
  const auto t0 = std::chrono::steady_clock::now();
  const PcaSweepResult r = run_pca_sweep(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const Eigen::Index col = index_of(cfg.fault_radii_sq, 100.0);
  const Eigen::Index lo = index_of(cfg.snr_db_grid, -10.0), hi = index_of(cfg.snr_db_grid, 20.0);
  const double gain_lo = r.coded_mc(lo, col) - r.uncoded_mc(lo, col);
  const double gain_hi = r.uncoded_mc(hi, col) - r.coded_mc(hi, col);
  const auto cross = r.crossover(static_cast<std::size_t>(col));
  const bool cross_ok = cross && *cross >= kCrossoverLo && *cross <= kCrossoverHi;
  const bool pass1 = gain_lo > kSchemeMargin && gain_hi > kSchemeMargin && cross_ok;
  report(1, pass1,
         fmt("r2=100: -10 dB coded %.4f vs uncoded %.4f (gap %+.4f, need > %.2f); +20 dB uncoded %.4f vs coded %.4f "
             "(gap %+.4f, need > %.2f); crossover %s (need in [%g, %g]); channel-free %.4f; sweep %.1f s",
             r.coded_mc(lo, col), r.uncoded_mc(lo, col), gain_lo, kSchemeMargin, r.uncoded_mc(hi, col),
             r.coded_mc(hi, col), gain_hi, kSchemeMargin, cross ? fmt("%g dB", *cross).c_str() : "none", kCrossoverLo,
             kCrossoverHi, r.channel_free_mc[col], secs));

  double worst = 0.0;
  std::string where;
  for (Eigen::Index i = 0; i < r.uncoded_mc.rows(); ++i)
    for (Eigen::Index c = 0; c < r.uncoded_mc.cols(); ++c) {
      const double d = std::abs(r.uncoded_analytic(i, c) - r.uncoded_mc(i, c));
      if (d > worst) {
        worst = d;
        where = fmt("%g dB, r2=%g", cfg.snr_db_grid[static_cast<std::size_t>(i)], cfg.fault_radii_sq[static_cast<std::size_t>(c)]);
      }
    }
  report(2, worst <= kAnalyticVsMonteCarlo,
         fmt("max |analytic - Monte Carlo| = %.4f at %s over %zu SNRs x %zu radii (tol %.2f)", worst, where.c_str(),
             cfg.snr_db_grid.size(), cfg.fault_radii_sq.size(), kAnalyticVsMonteCarlo));
}

void quadratic_form_approximation() {
  const int m = 123;
  const QuadFormParams chi{Vec::Ones(m), Vec::Zero(m)};
  boost::math::chi_squared oracle(m);
  double worst_chi = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double q = m * (0.5 + i / 200.0);
    const double exact = boost::math::cdf(boost::math::complement(oracle, q));
    worst_chi = std::max(worst_chi, std::abs(approx_tail_prob(chi, std::sqrt(q)) - exact));
  }

  // Reference spectrum residual, channel-free and at 0 dB.
  const SourceSpec spec = reference_spectrum(128);
  double worst_mc = 0.0;
  for (double snr_db : {std::numeric_limits<double>::infinity(), 0.0}) {
    const ChannelParams p = std::isinf(snr_db) ? ChannelParams{snr_db, 128, 128} : ChannelParams::from_db(snr_db, 128, 128);
    const QuadFormParams qf = residual_lambdas(spec, p, 1.0, 5);
    RngStream rng(2024, stream_id({3, std::isinf(snr_db) ? 0u : 1u}));
    std::vector<double> draws(100000);
    for (double& d : draws) {
      d = 0.0;
      for (double l : qf.lambdas) {
        const double z = rng.normal();
        d += l * z * z;
      }
    }
    std::sort(draws.begin(), draws.end());
    for (int j = 1; j <= 20; ++j) {
      const double q = draws[static_cast<std::size_t>(j * (draws.size() - 1) / 21)];
      const double empirical_tail =
          static_cast<double>(draws.end() - std::upper_bound(draws.begin(), draws.end(), q)) / draws.size();
      worst_mc = std::max(worst_mc, std::abs(approx_tail_prob(qf, std::sqrt(q)) - empirical_tail));
    }
  }
  report(3, worst_chi <= kChiSquareTol && worst_mc <= kQuadFormMonteCarloTol,
         fmt("chi-square m=123 max error %.2e over delta^2 in [61.5, 184.5] (tol %.0e); 1e5-trial Monte Carlo max error "
             "%.4f at 20 thresholds x 2 channels (tol %.2f)",
             worst_chi, kChiSquareTol, worst_mc, kQuadFormMonteCarloTol));
}

void noncentral_mean_identity() {
  RngStream brng(77, 0);
  const SourceSpec spec = with_random_basis(reference_spectrum(128), brng);
  RngStream qrng(77, 1);
  const UncodedScheme scheme = make_uncoded_scheme(128, 128, qrng);
  double worst = 0.0;
  const int trials = 20000;
  int case_id = 0;
  for (double snr_db : {-10.0, 0.0, 10.0}) {
    const ChannelParams p = ChannelParams::from_db(snr_db, 128, 128);
    const PcaDetector det = fit_uncoded_detector(spec, p, 5);
    for (int f = 0; f < 10; ++f, ++case_id) {
      RngStream rng(77, stream_id({2, static_cast<std::uint64_t>(case_id)}));
      const double radius_sq = 10.0 + 90.0 * rng.uniform();
      const Vec fault = sample_fault(spec, FaultSpec{radius_sq}, rng);
      const double eta = 1.0 - radius_sq / 128.0;
      Mat x = std::sqrt(eta) * sample_nominal_batch(spec, trials, rng);
      x.rowwise() += fault.transpose();
      const double empirical = det.residual_norm_sq_batch(uncoded_transmit_batch(scheme, x, p, rng)).mean();
      const double predicted = tp_quadform(spec, p, det, fault).mean();
      worst = std::max(worst, std::abs(empirical / predicted - 1.0));
    }
  }
  report(4, worst <= kMeanIdentityRelTol,
         fmt("max relative gap %.4f between empirical E||residual||^2 and sum lambda (1 + t^2), 10 faults x 3 SNRs, "
             "%d trials each (tol %.2f)",
             worst, trials, kMeanIdentityRelTol));
}

void lloyd_quantizer() {
  const ScalarQuantizer q = design_gaussian_quantizer(1.0, 1);
  const double c = std::sqrt(2.0 / std::acos(-1.0)), mse = 1.0 - 2.0 / std::acos(-1.0);
  const bool points_ok = std::abs(q.points()[0] + c) <= kLloydTol && std::abs(q.points()[1] - c) <= kLloydTol;
  const bool mse_ok = std::abs(q.design_mse() - mse) <= kLloydTol;

  bool monotone = true;
  int designs = 0;
  auto check = [&](const std::vector<double>& trace) {
    ++designs;
    for (std::size_t i = 1; i < trace.size(); ++i) monotone &= trace[i] <= trace[i - 1] * (1.0 + 1e-12);
  };
  for (int b = 1; b <= 8; ++b) {
    std::vector<double> trace;
    design_gaussian_quantizer(1.0, b, &trace);
    check(trace);
  }
  RngStream rng(5, 0);
  const SourceSpec spec = reference_spectrum(16);
  const Mat x = sample_nominal_batch(spec, 5000, rng);
  for (Eigen::Index j = 0; j < 16; ++j) {
    const std::vector<double> col = to_std_vector(x.col(j));
    for (int b = 1; b <= 5; ++b) {
      std::vector<double> trace;
      design_sample_quantizer(col, b, &trace);
      check(trace);
    }
  }
  report(5, points_ok && mse_ok && monotone,
         fmt("b=1 points [%.6f, %.6f] vs +-%.6f, MSE %.6f vs %.6f (tol %.0e); MSE non-increasing in %d designs: %s",
             q.points()[0], q.points()[1], c, q.design_mse(), mse, kLloydTol, designs, monotone ? "yes" : "no"));
}

void compositions(std::size_t n, int total, std::vector<int>& cur, const std::vector<double>& var, double& best) {
  if (cur.size() + 1 == n) {
    cur.push_back(total);
    best = std::min(best, allocation_distortion(var, cur));
    cur.pop_back();
    return;
  }
  for (int b = 0; b <= total; ++b) {
    cur.push_back(b);
    compositions(n, total - b, cur, var, best);
    cur.pop_back();
  }
}

void bit_allocation() {
  RngStream rng(6, 0);
  int instances = 0, mismatches = 0;
  for (int draw = 0; draw < 100; ++draw) {
    for (std::size_t n = 1; n <= 8; ++n) {
      std::vector<double> var(n);
      for (double& v : var) v = std::exp(4.0 * rng.uniform() - 2.0);
      for (int total = 0; total <= 12; ++total) {
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> cur;
        compositions(n, total, cur, var, best);
        const double greedy = allocation_distortion(var, allocate_bits(var, total).bits);
        ++instances;
        if (std::abs(greedy - best) > 1e-12 * best) ++mismatches;
      }
    }
  }
  report(6, mismatches == 0,
         fmt("greedy vs exhaustive minimum: %d mismatches in %d instances (N <= 8, B <= 12, 100 variance draws)",
             mismatches, instances));
}

void uncoded_channel() {
  const Eigen::Index n = 128;
  const int samples = 100000;
  double worst_var = 0.0, worst_orth = 0.0;
  for (Eigen::Index d : {n, 2 * n}) {
    for (double gamma : {1.0, 10.0}) {
      RngStream rng(7, stream_id({static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(gamma)}));
      const UncodedScheme s = make_uncoded_scheme(n, d, rng);
      worst_orth = std::max(worst_orth, (s.q.transpose() * s.q - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
      const ChannelParams p{gamma, n, d};
      Vec sum_sq = Vec::Zero(n);
      const int chunk = 10000;
      for (int done = 0; done < samples; done += chunk) {
        const Mat w = uncoded_transmit_batch(s, Mat::Zero(chunk, n), p, rng);
        sum_sq += w.colwise().squaredNorm().transpose();
      }
      const Vec var = sum_sq / samples;
      worst_var = std::max(worst_var, (var.array() / p.effective_noise_variance() - 1.0).abs().maxCoeff());
    }
  }
  report(7, worst_var <= kNoiseVarianceRelTol && worst_orth <= kSpreadingTol,
         fmt("max per-entry relative deviation of despread noise variance from (N/D)/Gamma: %.4f (tol %.2f), "
             "D in {N, 2N}, Gamma in {1, 10}, 1e5 samples; max |Q^T Q - I| = %.1e (tol %.0e)",
             worst_var, kNoiseVarianceRelTol, worst_orth, kSpreadingTol));
}

void accuracy_oracle() {
  RngStream rng(8, 0);
  int mismatches = 0;
  for (int set = 0; set < 100; ++set) {
    ScoredDataset ds;
    const auto total = 2 + rng() % 999;
    const auto n0 = 1 + rng() % (total - 1);
    for (std::uint64_t i = 0; i < total; ++i) {
      const double s = std::round(rng.normal() * 6.0) / 3.0;
      (i < n0 ? ds.nominal_scores : ds.anomalous_scores).push_back(i < n0 ? s : s + 0.7);
    }
    std::vector<double> cands(ds.nominal_scores);
    cands.insert(cands.end(), ds.anomalous_scores.begin(), ds.anomalous_scores.end());
    cands.push_back(*std::min_element(cands.begin(), cands.end()) - 1.0);
    long best = 0;
    for (double d : cands) {
      long correct = 0;
      for (double s : ds.nominal_scores) correct += s <= d;
      for (double s : ds.anomalous_scores) correct += s > d;
      best = std::max(best, correct);
    }
    if (best_accuracy(ds).accuracy != static_cast<double>(best) / static_cast<double>(total)) ++mismatches;
  }
  report(8, mismatches == 0, fmt("best_accuracy vs exhaustive enumeration: %d mismatches in 100 sets", mismatches));
}

void autoencoder() {
  Mlp toy = Mlp::initialized(MlpSpec{{6, 5, 3, 5, 6}}, 9);
  RngStream rng(9, 0);
  const Mat cols = gaussian_mat(6, 8, rng);
  std::vector<double> grad, scratch;
  toy.loss_and_gradient(cols, grad);
  auto params = toy.params();
  double worst_grad = 0.0;
  int probes = 0;
  for (std::size_t p = 0; p < params.size(); p += 3, ++probes) {
    const double h = 1e-6, saved = params[p];
    params[p] = saved + h;
    const double up = toy.loss_and_gradient(cols, scratch);
    params[p] = saved - h;
    const double down = toy.loss_and_gradient(cols, scratch);
    params[p] = saved;
    const double fd = (up - down) / (2.0 * h);
    worst_grad = std::max(worst_grad, std::abs(fd - grad[p]) / std::max(1e-8, std::abs(fd) + std::abs(grad[p])));
  }

  double gap_lo = 0.0, gap_hi = 0.0;
  std::string per_seed;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ConfigOverrides f;
    f.mode = "ae-sweep";
    f.seed = seed;
    f.snr_grid = {-10.0, 30.0};
    const ExperimentConfig cfg = parse_config(nullptr, f);
    const AeSweepResult r = run_ae_sweep(cfg, make_ae_dataset(cfg));
    gap_lo += (r.coded[0].accuracy - r.uncoded[0].accuracy) / 3.0;
    gap_hi += (r.uncoded[1].accuracy - r.coded[1].accuracy) / 3.0;
    per_seed += fmt(" seed %llu: -10 dB c/u %.3f/%.3f, +30 dB u/c %.3f/%.3f;", static_cast<unsigned long long>(seed),
                    r.coded[0].accuracy, r.uncoded[0].accuracy, r.uncoded[1].accuracy, r.coded[1].accuracy);
  }
  const bool pass = worst_grad <= kGradientRelTol && gap_lo > kSchemeMargin && gap_hi > kSchemeMargin;
  report(9, pass,
         fmt("gradient max relative error %.2e over %d probes (tol %.0e); mean coded-uncoded gap at -10 dB %+.4f, mean "
             "uncoded-coded gap at +30 dB %+.4f (need > %.2f);",
             worst_grad, probes, kGradientRelTol, gap_lo, gap_hi, kSchemeMargin) +
             per_seed);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "radet_acceptance_determinism";
  fs::remove_all(root);
  ConfigOverrides f;
  f.snr_grid = {-10, -5, 0, 5, 10, 20};
  ExperimentConfig cfg = parse_config(nullptr, f);
  std::ostringstream log;
  cfg.out_dir = (root / "a").string();
  fs::create_directories(cfg.out_dir);
  const CommandOutcome a = cmd_pca_sweep(cfg, log);
  cfg.out_dir = (root / "b").string();
  fs::create_directories(cfg.out_dir);
  const CommandOutcome b = cmd_pca_sweep(cfg, log);
  bool same = a.files.size() == b.files.size() && !a.files.empty();
  for (std::size_t i = 0; same && i < a.files.size(); ++i) {
    const std::string x = slurp(a.files[i]), y = slurp(b.files[i]);
    same = !x.empty() && x == y;
  }
  fs::remove_all(root);
  report(10, same, fmt("%zu output tables byte-identical across two runs with seed %llu: %s", a.files.size(),
                       static_cast<unsigned long long>(cfg.seed), same ? "yes" : "no"));
}

}  // namespace

int main() {
  const std::vector<std::pair<int, void (*)()>> steps = {
      {1, scheme_comparison_and_analytic_agreement},
      {3, quadratic_form_approximation},
      {4, noncentral_mean_identity},
      {5, lloyd_quantizer},
      {6, bit_allocation},
      {7, uncoded_channel},
      {8, accuracy_oracle},
      {9, autoencoder},
      {10, determinism},
  };
  for (const auto& [id, step] : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      report(id, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
