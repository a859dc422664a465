#include "radet/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Remote anomaly detection experiments: coded vs uncoded feature transmission"};
  app.set_version_flag("--version", std::string(RADET_VERSION));

  std::optional<std::string> config_path;
  radet::ConfigOverrides flags;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "Experiment config file (key = value)");
  app.add_option("--mode", flags.mode, "pca-sweep | ae-sweep | quantizer-design | fp-tp-table");
  app.add_option("--seed", flags.seed, "Master seed");
  app.add_option("--out-dir", flags.out_dir, "Output directory");
  app.add_option("--snr-grid", flags.snr_grid, "Channel SNR points in dB")->delimiter(',');
  app.add_option("--radii-sq", flags.radii_sq, "Squared fault norms")->delimiter(',');
  app.add_option("--trials", flags.trials, "Test samples per class");
  app.add_option("--scheme", flags.scheme, "coded | uncoded | both");
  app.add_option("--features", flags.features, "Nominal feature file (one vector per line)");
  std::optional<std::string> anomalous_features;
  app.add_option("--anomalous-features", anomalous_features, "Anomalous feature file, used only for testing");
  app.add_option("--n", flags.n, "Feature dimension");
  app.add_option("--d", flags.d, "Channel uses per feature vector");
  app.add_option("--k", flags.k, "Retained principal components");
  app.add_option("--set", sets, "Any config key as key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << radet::error_line("config", e.what()) << '\n';
    return radet::exit_config_error;
  }

  radet::ExperimentConfig cfg;
  try {
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw radet::ConfigError("--set expects key=value, got '" + s + "'");
      flags.extra.emplace_back(radet::config_detail::trim(s.substr(0, eq)), radet::config_detail::trim(s.substr(eq + 1)));
    }
    if (anomalous_features) flags.extra.emplace_back("anomalous_features", *anomalous_features);
    cfg = radet::parse_config_file(config_path, flags);
  } catch (const std::exception& e) {
    std::cerr << radet::error_line("config", e.what()) << '\n';
    if (flags.out_dir) {
      try {
        radet::write_rejected_manifest(*flags.out_dir, flags.seed, e.what());
      } catch (const std::exception&) {
        // The error line on stderr already carries the failure.
      }
    }
    return radet::exit_config_error;
  }
  return radet::run_command(cfg);
}
