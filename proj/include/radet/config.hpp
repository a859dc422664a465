#pragma once

// Experiment configuration: a flat `key = value` text format with arrays,
// merged with command-line overrides and validated before any work starts.
//
//   # comment
//   mode = pca-sweep
//   snr_db_grid = [-10, 0, 10]      # or a range: -10:1:30 (start:step:stop)
//   fault_radii_sq = [10, 50, 100]
//   out_dir = "results"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace radet {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Mode { pca_sweep, ae_sweep, quantizer_design, fp_tp_table };
enum class SchemeSelection { coded, uncoded, both };
enum class BasisKind { identity, random };
enum class QuantizeBasis { coordinate, eigen };
enum class DetectorFit { analytic, empirical };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::pca_sweep: return "pca-sweep";
    case Mode::ae_sweep: return "ae-sweep";
    case Mode::quantizer_design: return "quantizer-design";
    case Mode::fp_tp_table: return "fp-tp-table";
  }
  return "?";
}
inline const char* to_string(SchemeSelection s) {
  return s == SchemeSelection::coded ? "coded" : s == SchemeSelection::uncoded ? "uncoded" : "both";
}
inline const char* to_string(BasisKind b) { return b == BasisKind::identity ? "identity" : "random"; }
inline const char* to_string(QuantizeBasis b) { return b == QuantizeBasis::coordinate ? "coordinate" : "eigen"; }
inline const char* to_string(DetectorFit f) { return f == DetectorFit::analytic ? "analytic" : "empirical"; }

inline std::vector<double> default_snr_grid() {
  std::vector<double> g;
  for (int db = -10; db <= 30; ++db) g.push_back(db);
  return g;
}

struct ExperimentConfig {
  Mode mode = Mode::pca_sweep;
  int n = 128;
  int d = 128;
  int k = 5;
  std::vector<double> snr_db_grid = default_snr_grid();
  std::vector<double> fault_radii_sq = {10.0, 50.0, 100.0};
  int trials = 10000;        // test samples per class
  int train_trials = 10000;  // nominal samples for empirical detector fits
  std::uint64_t seed = 1;
  SchemeSelection scheme = SchemeSelection::both;
  std::string out_dir = ".";
  int threads = 0;  // 0: hardware concurrency

  // PCA experiment
  BasisKind basis = BasisKind::random;
  QuantizeBasis quantize_basis = QuantizeBasis::coordinate;
  DetectorFit uncoded_detector = DetectorFit::analytic;
  DetectorFit coded_detector = DetectorFit::empirical;
  int directions = 100;
  int delta_grid_points = 512;
  int bit_budget = -1;  // quantizer-design: < 0 means capacity_bits

  // Autoencoder experiment
  std::string features;            // nominal feature file; empty: synthetic benchmark
  std::string anomalous_features;  // required with `features`
  int ae_train = 4000;
  int ae_test = 1000;
  int epochs = 100;
  int batch_size = 256;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";
  bool noiseless = false;

  /// Keys that were set by the file or a flag (not defaults).
  std::set<std::string> explicit_keys;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

inline double to_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(v)) throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

inline long long to_integer(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return static_cast<long long>(v);
}

inline int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key + ": out of range");
  return static_cast<int>(v);
}

inline bool to_bool(const std::string& key, const std::string& text) {
  const std::string s = unquote(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + text + "'");
}

/// "[a, b, c]", "a b c", or a range "start:step:stop" (inclusive).
inline std::vector<double> to_array(const std::string& key, const std::string& text) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError(key + ": unterminated array");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError(key + ": range must be start:step:stop");
    const double a = to_double(key, parts[0]), step = to_double(key, parts[1]), b = to_double(key, parts[2]);
    if (!(step > 0.0) || b < a) throw ConfigError(key + ": range needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    if (count > 100000) throw ConfigError(key + ": range too long");
    for (long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  for (char& c : s)
    if (c == ',') c = ' ';
  std::stringstream ss(s);
  for (std::string tok; ss >> tok;) out.push_back(to_double(key, tok));
  return out;
}

template <typename E>
E to_enum(const std::string& key, const std::string& text, std::initializer_list<std::pair<const char*, E>> options) {
  const std::string s = unquote(text);
  std::string names;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(key + ": '" + s + "' is not one of {" + names + "}");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"mode",
       [](ExperimentConfig& c, const std::string& v) {
         c.mode = to_enum<Mode>("mode", v,
                                {{"pca-sweep", Mode::pca_sweep},
                                 {"ae-sweep", Mode::ae_sweep},
                                 {"quantizer-design", Mode::quantizer_design},
                                 {"fp-tp-table", Mode::fp_tp_table}});
       }},
      {"n", [](ExperimentConfig& c, const std::string& v) { c.n = to_int("n", v); }},
      {"d", [](ExperimentConfig& c, const std::string& v) { c.d = to_int("d", v); }},
      {"k", [](ExperimentConfig& c, const std::string& v) { c.k = to_int("k", v); }},
      {"snr_db_grid", [](ExperimentConfig& c, const std::string& v) { c.snr_db_grid = to_array("snr_db_grid", v); }},
      {"fault_radii_sq",
       [](ExperimentConfig& c, const std::string& v) { c.fault_radii_sq = to_array("fault_radii_sq", v); }},
      {"trials", [](ExperimentConfig& c, const std::string& v) { c.trials = to_int("trials", v); }},
      {"train_trials", [](ExperimentConfig& c, const std::string& v) { c.train_trials = to_int("train_trials", v); }},
      {"seed",
       [](ExperimentConfig& c, const std::string& v) {
         const long long s = to_integer("seed", v);
         if (s < 0) throw ConfigError("seed: must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"scheme",
       [](ExperimentConfig& c, const std::string& v) {
         c.scheme = to_enum<SchemeSelection>(
             "scheme", v,
             {{"coded", SchemeSelection::coded}, {"uncoded", SchemeSelection::uncoded}, {"both", SchemeSelection::both}});
       }},
      {"out_dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = unquote(v); }},
      {"threads", [](ExperimentConfig& c, const std::string& v) { c.threads = to_int("threads", v); }},
      {"basis",
       [](ExperimentConfig& c, const std::string& v) {
         c.basis = to_enum<BasisKind>("basis", v, {{"identity", BasisKind::identity}, {"random", BasisKind::random}});
       }},
      {"quantize_basis",
       [](ExperimentConfig& c, const std::string& v) {
         c.quantize_basis = to_enum<QuantizeBasis>(
             "quantize_basis", v, {{"coordinate", QuantizeBasis::coordinate}, {"eigen", QuantizeBasis::eigen}});
       }},
      {"uncoded_detector",
       [](ExperimentConfig& c, const std::string& v) {
         c.uncoded_detector = to_enum<DetectorFit>(
             "uncoded_detector", v, {{"analytic", DetectorFit::analytic}, {"empirical", DetectorFit::empirical}});
       }},
      {"coded_detector",
       [](ExperimentConfig& c, const std::string& v) {
         c.coded_detector = to_enum<DetectorFit>(
             "coded_detector", v, {{"analytic", DetectorFit::analytic}, {"empirical", DetectorFit::empirical}});
       }},
      {"directions", [](ExperimentConfig& c, const std::string& v) { c.directions = to_int("directions", v); }},
      {"delta_grid_points",
       [](ExperimentConfig& c, const std::string& v) { c.delta_grid_points = to_int("delta_grid_points", v); }},
      {"bit_budget", [](ExperimentConfig& c, const std::string& v) { c.bit_budget = to_int("bit_budget", v); }},
      {"features", [](ExperimentConfig& c, const std::string& v) { c.features = unquote(v); }},
      {"anomalous_features", [](ExperimentConfig& c, const std::string& v) { c.anomalous_features = unquote(v); }},
      {"ae_train", [](ExperimentConfig& c, const std::string& v) { c.ae_train = to_int("ae_train", v); }},
      {"ae_test", [](ExperimentConfig& c, const std::string& v) { c.ae_test = to_int("ae_test", v); }},
      {"epochs", [](ExperimentConfig& c, const std::string& v) { c.epochs = to_int("epochs", v); }},
      {"batch_size", [](ExperimentConfig& c, const std::string& v) { c.batch_size = to_int("batch_size", v); }},
      {"learning_rate",
       [](ExperimentConfig& c, const std::string& v) { c.learning_rate = to_double("learning_rate", v); }},
      {"optimizer",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string s = unquote(v);
         if (s != "adam" && s != "sgd") throw ConfigError("optimizer: '" + s + "' is not one of {adam, sgd}");
         c.optimizer = s;
       }},
      {"noiseless", [](ExperimentConfig& c, const std::string& v) { c.noiseless = to_bool("noiseless", v); }},
  };
  return table;
}

inline void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown keys: " + key);
  it->second(cfg, value);
  cfg.explicit_keys.insert(key);
}

}  // namespace config_detail

/// Ordered key/value pairs from the text format. Unknown keys are reported
/// together; malformed lines name their line number.
inline std::vector<std::pair<std::string, std::string>> parse_config_entries(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> unknown;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = config_detail::trim(line.substr(0, eq));
    const std::string value = config_detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!config_detail::setters().contains(key)) {
      unknown.push_back(key);
      continue;
    }
    out.emplace_back(key, value);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  return out;
}

/// Command-line values layered over the file. Scalars replace file values.
/// Array flags extend an array the file set, otherwise they replace the default.
struct ConfigOverrides {
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<double> snr_grid;
  std::vector<double> radii_sq;
  std::optional<int> trials;
  std::optional<std::string> scheme;
  std::optional<std::string> features;
  std::optional<int> n, d, k;
  std::vector<std::pair<std::string, std::string>> extra;  // generic key=value
};

inline void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.n < 1) fail("n=" + std::to_string(c.n) + " must be >= 1");
  if (c.d < c.n) fail("d=" + std::to_string(c.d) + " must be >= n=" + std::to_string(c.n));
  if (c.snr_db_grid.empty()) fail("snr_db_grid must not be empty");
  if (c.trials < 1) fail("trials must be >= 1");
  if (c.threads < 0) fail("threads must be >= 0");
  const bool pca = c.mode == Mode::pca_sweep || c.mode == Mode::fp_tp_table;
  if (pca) {
    if (c.n < 6) fail("n=" + std::to_string(c.n) + " must be >= 6 for the PCA source spectrum");
    if (c.k < 1 || c.k >= c.n) fail("k=" + std::to_string(c.k) + " must satisfy 1 <= k < n=" + std::to_string(c.n));
    if (c.fault_radii_sq.empty()) fail("fault_radii_sq must not be empty");
    for (double r : c.fault_radii_sq)
      if (r < 0.0 || r > c.n) fail("fault_radii_sq entry " + std::to_string(r) + " must lie in [0, n=" + std::to_string(c.n) + "]");
    if (c.train_trials < c.n) fail("train_trials must be >= n");
    if (c.directions < 1) fail("directions must be >= 1");
    if (c.delta_grid_points < 2) fail("delta_grid_points must be >= 2");
  }
  if (c.mode == Mode::quantizer_design && c.n < 1) fail("n must be >= 1");
  if (c.mode == Mode::ae_sweep) {
    if (c.epochs < 1 || c.batch_size < 1 || !(c.learning_rate > 0.0))
      fail("epochs, batch_size and learning_rate must be positive");
    if (c.ae_train < c.batch_size) fail("ae_train must be >= batch_size");
    if (c.ae_test < 1) fail("ae_test must be >= 1");
    if (!c.features.empty() && c.anomalous_features.empty()) fail("features requires anomalous_features");
  }
}

/// Defaults, then `file` entries, then `flags`; mode-dependent defaults are
/// filled last (autoencoder input width 320, d = n) and the result validated.
inline ExperimentConfig parse_config(std::istream* file, const ConfigOverrides& flags = {}) {
  ExperimentConfig cfg;
  if (file)
    for (const auto& [k, v] : parse_config_entries(*file)) config_detail::apply(cfg, k, v);
  std::set<std::string> from_file = cfg.explicit_keys;

  using config_detail::apply;
  if (flags.mode) apply(cfg, "mode", *flags.mode);
  if (flags.seed) apply(cfg, "seed", std::to_string(*flags.seed));
  if (flags.out_dir) apply(cfg, "out_dir", *flags.out_dir);
  if (flags.trials) apply(cfg, "trials", std::to_string(*flags.trials));
  if (flags.scheme) apply(cfg, "scheme", *flags.scheme);
  if (flags.features) apply(cfg, "features", *flags.features);
  if (flags.n) apply(cfg, "n", std::to_string(*flags.n));
  if (flags.d) apply(cfg, "d", std::to_string(*flags.d));
  if (flags.k) apply(cfg, "k", std::to_string(*flags.k));
  for (const auto& [k, v] : flags.extra) apply(cfg, k, v);
  if (!flags.snr_grid.empty()) {
    if (!from_file.contains("snr_db_grid")) cfg.snr_db_grid.clear();
    cfg.snr_db_grid.insert(cfg.snr_db_grid.end(), flags.snr_grid.begin(), flags.snr_grid.end());
    cfg.explicit_keys.insert("snr_db_grid");
  }
  if (!flags.radii_sq.empty()) {
    if (!from_file.contains("fault_radii_sq")) cfg.fault_radii_sq.clear();
    cfg.fault_radii_sq.insert(cfg.fault_radii_sq.end(), flags.radii_sq.begin(), flags.radii_sq.end());
    cfg.explicit_keys.insert("fault_radii_sq");
  }

  if (cfg.mode == Mode::ae_sweep && !cfg.explicit_keys.contains("n")) cfg.n = 320;
  if (!cfg.explicit_keys.contains("d")) cfg.d = cfg.n;
  validate(cfg);
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& flags = {}) {
  std::istringstream is(text);
  return parse_config(&is, flags);
}

inline ExperimentConfig parse_config_file(const std::optional<std::string>& path, const ConfigOverrides& flags = {}) {
  if (!path) return parse_config(nullptr, flags);
  std::ifstream is(*path);
  if (!is) throw ConfigError("cannot read config file " + *path);
  return parse_config(&is, flags);
}

}  // namespace radet
