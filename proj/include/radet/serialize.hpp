#pragma once

// JSON sidecars for reproducibility: quantizer banks, fitted detectors and
// the experiment configuration echo used in run manifests.

#include "radet/config.hpp"
#include "radet/pca.hpp"
#include "radet/transmission.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace radet {

using Json = nlohmann::json;

inline Json to_json(const CodedScheme& s) {
  Json q = Json::array();
  for (const auto& quant : s.quantizers) q.push_back({{"points", quant.points()}, {"design_mse", quant.design_mse()}});
  Json j = {{"allocation", {{"bits", s.allocation.bits}, {"total", s.allocation.total}}}, {"quantizers", q}};
  if (s.rotation) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < s.rotation->rows(); ++r) rows.push_back(to_std_vector(s.rotation->row(r).transpose()));
    j["rotation"] = rows;
  } else {
    j["rotation"] = nullptr;
  }
  return j;
}

inline CodedScheme coded_scheme_from_json(const Json& j) {
  CodedScheme s;
  s.allocation.bits = j.at("allocation").at("bits").get<std::vector<int>>();
  s.allocation.total = j.at("allocation").at("total").get<int>();
  for (const auto& q : j.at("quantizers"))
    s.quantizers.emplace_back(q.at("points").get<std::vector<double>>(), q.value("design_mse", 0.0));
  if (j.contains("rotation") && !j["rotation"].is_null()) {
    const auto& rows = j["rotation"];
    Mat r(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
      for (Eigen::Index c = 0; c < r.cols(); ++c) r(i, c) = row[static_cast<std::size_t>(c)];
    }
    s.rotation = std::move(r);
  }
  s.validate();
  return s;
}

/// Eigenvalues of the fitted covariance and the K retained eigenvectors (as columns).
inline Json to_json(const PcaDetector& det) {
  Json cols = Json::array();
  for (Eigen::Index c = 0; c < det.k(); ++c) cols.push_back(to_std_vector(det.v_hat().col(c)));
  return {{"n", det.dim()},
          {"k", det.k()},
          {"eigenvalues", to_std_vector(det.eigenvalues())},
          {"v_hat_columns", cols},
          {"degenerate_cut", det.degenerate_cut()}};
}

inline Json to_json(const ExperimentConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"n", c.n},
          {"d", c.d},
          {"k", c.k},
          {"snr_db_grid", c.snr_db_grid},
          {"fault_radii_sq", c.fault_radii_sq},
          {"trials", c.trials},
          {"train_trials", c.train_trials},
          {"seed", c.seed},
          {"scheme", to_string(c.scheme)},
          {"out_dir", c.out_dir},
          {"threads", c.threads},
          {"basis", to_string(c.basis)},
          {"quantize_basis", to_string(c.quantize_basis)},
          {"uncoded_detector", to_string(c.uncoded_detector)},
          {"coded_detector", to_string(c.coded_detector)},
          {"directions", c.directions},
          {"delta_grid_points", c.delta_grid_points},
          {"bit_budget", c.bit_budget},
          {"features", c.features},
          {"anomalous_features", c.anomalous_features},
          {"ae_train", c.ae_train},
          {"ae_test", c.ae_test},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"optimizer", c.optimizer},
          {"noiseless", c.noiseless}};
}

/// FNV-1a over the canonical JSON dump of the configuration.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace radet
