#pragma once

// Command implementations behind the radet executable. Each command writes
// its tables into cfg.out_dir and returns a summary; the manifest is written
// by run_command whatever the outcome.

#include "radet/evaluation.hpp"
#include "radet/serialize.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifndef RADET_VERSION
#define RADET_VERSION "0.0.0-unknown"
#endif

namespace radet {

enum ExitCode : int { exit_ok = 0, exit_config_error = 2, exit_runtime_error = 3 };

struct CommandOutcome {
  std::vector<std::string> files;
  Json summary = Json::object();
};

namespace cli_detail {

inline std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

inline void finish(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::string radius_header(const std::vector<double>& radii, const std::vector<std::string>& prefixes = {"acc"}) {
  std::string h = "snr_db";
  char buf[48];
  for (const auto& p : prefixes) {
    for (double r : radii) {
      std::snprintf(buf, sizeof buf, " %s_r2=%g", p.c_str(), r);
      h += buf;
    }
  }
  return h;
}

inline void write_table_file(const std::string& path, const std::string& header, std::span<const double> snr,
                             const Mat& cols, CommandOutcome& out) {
  auto os = open_out(path);
  write_table(os, header, snr, cols);
  finish(os, path);
  out.files.push_back(path);
}

}  // namespace cli_detail

inline CommandOutcome cmd_pca_sweep(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  using namespace cli_detail;
  const PcaSweepResult res = run_pca_sweep(cfg);
  CommandOutcome out;
  const std::string header = radius_header(res.radii_sq);
  write_table_file(out_path(cfg, "pca_res_uncoded.dat"), header, res.snr_db, res.uncoded_mc, out);
  write_table_file(out_path(cfg, "pca_res_uncoded_ana.dat"), header, res.snr_db, res.uncoded_analytic, out);
  write_table_file(out_path(cfg, "pca_res_coded.dat"), header, res.snr_db, res.coded_mc, out);
  Mat free(static_cast<Eigen::Index>(res.snr_db.size()), 2 * res.channel_free_mc.size());
  for (Eigen::Index i = 0; i < free.rows(); ++i) {
    free.row(i).head(res.channel_free_mc.size()) = res.channel_free_mc.transpose();
    free.row(i).tail(res.channel_free_mc.size()) = res.channel_free_analytic.transpose();
  }
  write_table_file(out_path(cfg, "pca_res_channel_free.dat"), radius_header(res.radii_sq, {"mc", "ana"}), res.snr_db,
                   free, out);

  Json crossovers = Json::object();
  for (std::size_t r = 0; r < res.radii_sq.size(); ++r) {
    const auto c = res.crossover(r);
    char buf[96];
    if (c) std::snprintf(buf, sizeof buf, "crossover r2=%g: %g dB", res.radii_sq[r], *c);
    else std::snprintf(buf, sizeof buf, "crossover r2=%g: none", res.radii_sq[r]);
    log << buf << '\n';
    std::snprintf(buf, sizeof buf, "%g", res.radii_sq[r]);
    crossovers[buf] = c ? Json(*c) : Json(nullptr);
  }
  out.summary["crossover_snr_db"] = crossovers;
  out.summary["coded_bits"] = res.coded_bits;
  return out;
}

inline CommandOutcome cmd_ae_sweep(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  using namespace cli_detail;
  const AeDataset data = make_ae_dataset(cfg);
  const std::string ckpt_dir = out_path(cfg, "checkpoints");
  std::filesystem::create_directories(ckpt_dir);
  const AeSweepResult res = run_ae_sweep(cfg, data, ckpt_dir);
  CommandOutcome out;
  const auto n = static_cast<Eigen::Index>(res.snr_db.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Mat cols = Mat::Constant(n, 2, nan);
  Json errors = Json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!res.uncoded.empty()) cols(i, 0) = res.uncoded[idx].accuracy;
    if (!res.coded.empty()) cols(i, 1) = res.coded[idx].accuracy;
    for (const auto* pts : {&res.uncoded, &res.coded}) {
      if (pts->empty()) continue;
      const AePoint& p = (*pts)[idx];
      if (!p.error.empty()) {
        const char* kind = pts == &res.coded ? "coded" : "uncoded";
        errors.push_back({{"snr_db", res.snr_db[idx]}, {"scheme", kind}, {"error", p.error}});
        log << "training failed (" << kind << ", " << snr_label(res.snr_db[idx]) << "): " << p.error << '\n';
      }
      if (!p.checkpoint.empty()) out.files.push_back(p.checkpoint);
    }
  }
  write_table_file(out_path(cfg, "ae_res.dat"), "snr_db acc_uncoded acc_coded", res.snr_db, cols, out);
  out.summary["training_errors"] = errors;
  return out;
}

inline CommandOutcome cmd_quantizer_design(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  using namespace cli_detail;
  const SourceSpec spec = pca_source(cfg);
  const Vec variances = cfg.quantize_basis == QuantizeBasis::eigen ? spec.eigenvalues : Vec(spec.covariance().diagonal());
  std::optional<Mat> rotation;
  if (cfg.quantize_basis == QuantizeBasis::eigen) rotation.emplace(spec.basis);

  // One design per distinct budget: the fixed budget if set, else capacity at each grid SNR.
  std::vector<std::pair<std::string, int>> budgets;
  if (cfg.bit_budget >= 0) {
    budgets.emplace_back("B" + std::to_string(cfg.bit_budget), cfg.bit_budget);
  } else {
    for (double snr : cfg.snr_db_grid)
      budgets.emplace_back("snr" + snr_label(snr), capacity_bits(ChannelParams::from_db(snr, cfg.n, cfg.d)));
  }
  CommandOutcome out;
  Json designs = Json::array();
  for (const auto& [label, bits] : budgets) {
    const CodedScheme scheme = make_coded_scheme(to_std_vector(variances), bits, rotation);
    if (bits == 0) log << "notice: " << label << " has a zero bit budget; every entry is sent as its mean\n";
    const std::string table = out_path(cfg, "quantizer_alloc_" + label + ".dat");
    auto os = open_out(table);
    os << "# entry variance bits design_mse\n";
    char buf[96];
    for (std::size_t i = 0; i < scheme.quantizers.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu %.9g %d %.9g\n", i, variances[static_cast<Eigen::Index>(i)],
                    scheme.allocation.bits[i], scheme.quantizers[i].design_mse());
      os << buf;
    }
    finish(os, table);
    out.files.push_back(table);
    const std::string codebook = out_path(cfg, "quantizer_codebooks_" + label + ".json");
    write_json_file(codebook, to_json(scheme));
    out.files.push_back(codebook);
    log << label << ": B=" << bits << " distortion="
        << allocation_distortion(to_std_vector(variances), scheme.allocation.bits) << '\n';
    designs.push_back({{"label", label}, {"bits", bits}});
  }
  out.summary["designs"] = designs;
  return out;
}

inline CommandOutcome cmd_fp_tp_table(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  using namespace cli_detail;
  const std::vector<FpTpRow> rows = fp_tp_table(cfg);
  CommandOutcome out;
  const std::string path = out_path(cfg, "pca_fp_tp.dat");
  auto os = open_out(path);
  os << "# snr_db radius_sq delta fp tp\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f %g %.6f %.8f %.8f\n", r.snr_db, r.radius_sq, r.delta, r.fp, r.tp);
    os << buf;
  }
  finish(os, path);
  out.files.push_back(path);
  log << "wrote " << rows.size() << " rows to " << path << '\n';
  return out;
}

inline CommandOutcome dispatch(const ExperimentConfig& cfg, std::ostream& log) {
  switch (cfg.mode) {
    case Mode::pca_sweep: return cmd_pca_sweep(cfg, log);
    case Mode::ae_sweep: return cmd_ae_sweep(cfg, log);
    case Mode::quantizer_design: return cmd_quantizer_design(cfg, log);
    case Mode::fp_tp_table: return cmd_fp_tp_table(cfg, log);
  }
  throw ContractError("unknown mode");
}

/// Single-line error record for stderr.
inline std::string error_line(const char* kind, const std::string& message) {
  return Json({{"status", "error"}, {"kind", kind}, {"message", message}}).dump();
}

/// Manifest for a run rejected before a valid configuration existed.
inline void write_rejected_manifest(const std::string& out_dir, std::optional<std::uint64_t> seed,
                                    const std::string& message) {
  std::filesystem::create_directories(out_dir);
  write_json_file((std::filesystem::path(out_dir) / "run_manifest.json").string(),
                  {{"version", RADET_VERSION},
                   {"config", nullptr},
                   {"config_hash", nullptr},
                   {"seed", seed ? Json(*seed) : Json(nullptr)},
                   {"status", "error"},
                   {"error", message},
                   {"wall_time_s", 0.0}});
}

/// Runs the configured command and always writes run_manifest.json to out_dir.
inline int run_command(const ExperimentConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  Json manifest = {{"version", RADET_VERSION},
                   {"config", to_json(cfg)},
                   {"config_hash", config_hash(cfg)},
                   {"seed", cfg.seed}};
  int code = exit_ok;
  try {
    std::filesystem::create_directories(cfg.out_dir);
    CommandOutcome out = dispatch(cfg, log);
    manifest["status"] = "ok";
    manifest["outputs"] = out.files;
    manifest["summary"] = out.summary;
  } catch (const ConfigError& e) {
    code = exit_config_error;
    manifest["status"] = "error";
    manifest["error"] = e.what();
    err << error_line("config", e.what()) << '\n';
  } catch (const std::exception& e) {
    code = exit_runtime_error;
    manifest["status"] = "error";
    manifest["error"] = e.what();
    err << error_line("runtime", e.what()) << '\n';
  }
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_json_file(cli_detail::out_path(cfg, "run_manifest.json"), manifest);
  } catch (const std::exception& e) {
    err << error_line("runtime", e.what()) << '\n';
    if (code == exit_ok) code = exit_runtime_error;
  }
  return code;
}

}  // namespace radet
