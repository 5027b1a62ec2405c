#include <clocale>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nheff/experiment.hpp"

namespace {

// exit codes: 0 success, 2 validation/config error, 3 numerical failure
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int load_config(const std::string& path, nheff::Json* config) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open config file: " << path << "\n";
    return kConfigError;
  }
  try {
    *config = nheff::Json::parse(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << path << " is not valid JSON: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}

void print_report(const nheff::ValidationReport& rep, bool quiet) {
  for (const auto& v : rep.violations) {
    std::cerr << "violation: " << v.path << ": " << v.message << "\n";
  }
  if (!quiet) {
    for (const auto& w : rep.warnings) {
      std::cerr << "warning: " << w.path << ": " << w.message << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_NUMERIC, "C");  // CSV/JSON always use '.' decimals

  CLI::App app{"non-Hermitian effective-Hamiltonian toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir = "./out";
  unsigned long long seed = 0;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment and write outputs");
  run->add_option("--config", config_path, "JSON config file")->required();
  CLI::Option* outdir_opt =
      run->add_option("--outdir", outdir, "output directory (default ./out)");
  run->add_option("--seed", seed, "seed for randomized initial guesses");
  run->add_flag("--quiet", quiet, "suppress informational output");

  CLI::App* validate =
      app.add_subcommand("validate", "validate a config without running it");
  validate->add_option("--config", config_path, "JSON config file")->required();
  validate->add_flag("--quiet", quiet, "suppress informational output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  nheff::Json config;
  if (int rc = load_config(config_path, &config); rc != kOk) return rc;

  nheff::ValidationReport rep = nheff::validate_config(config);
  print_report(rep, quiet);
  if (!rep.ok()) return kConfigError;

  if (validate->parsed()) {
    if (!quiet) {
      std::cout << "config is valid (" << rep.warnings.size() << " warning(s))\n";
    }
    return kOk;
  }

  if (!outdir_opt->count() && config.contains("output") &&
      config["output"].contains("directory")) {
    outdir = config["output"]["directory"].get<std::string>();
  }

  try {
    nheff::RunOutputs out = nheff::run_experiment(config, seed);
    std::string result_path = nheff::write_outputs(out, outdir);
    if (!quiet) std::cout << out.summary << "wrote " << result_path << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return kOk;
}
