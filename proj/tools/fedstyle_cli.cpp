#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>

#include "fedstyle/cli.hpp"

namespace {

// Leftover "--key value" pairs become config overrides.
int collect_overrides(const std::vector<std::string>& args,
                      std::map<std::string, std::string>& overrides) {
  for (size_t i = 0; i < args.size(); i += 2) {
    if (args[i].rfind("--", 0) != 0 || i + 1 >= args.size()) {
      std::cerr << "error: expected override pairs '--key value', got '" << args[i]
                << "'\n";
      return fedstyle::kExitUsage;
    }
    overrides[args[i].substr(2)] = args[i + 1];
  }
  return fedstyle::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FedStyle federated learning simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment");
  std::string config_path, out_dir = "out";
  run->add_option("--config", config_path, "Config file (key = value lines)");
  run->add_option("--out", out_dir, "Output directory");
  run->allow_extras();

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic feature CSV");
  int classes = 10, per_class = 200, dim = 32;
  double sigma = 1.0;
  uint64_t seed = 0;
  std::string gen_out = "data.csv";
  gen->add_option("--classes", classes, "Number of classes");
  gen->add_option("--per-class", per_class, "Samples per class");
  gen->add_option("--dim", dim, "Feature dimension");
  gen->add_option("--sigma", sigma, "Cluster spread");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", gen_out, "Output CSV path");

  auto* suite = app.add_subcommand("suite", "Run every config in a directory");
  std::string config_dir, suite_out = "suite_out";
  int jobs = 1;
  suite->add_option("--config-dir", config_dir, "Directory of config files")->required();
  suite->add_option("--out", suite_out, "Output directory");
  suite->add_option("--jobs", jobs, "Concurrent runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? fedstyle::kExitUsage : fedstyle::kExitOk;
  }

  std::string err;
  int rc = fedstyle::kExitUsage;
  if (run->parsed()) {
    std::map<std::string, std::string> overrides;
    rc = collect_overrides(run->remaining(), overrides);
    if (rc == fedstyle::kExitOk) rc = fedstyle::cmd_run(config_path, out_dir, overrides, err);
  } else if (gen->parsed()) {
    rc = fedstyle::cmd_gen_data(classes, per_class, dim, sigma, seed, gen_out, err);
  } else if (suite->parsed()) {
    rc = fedstyle::cmd_suite(config_dir, suite_out, jobs, err);
  }
  if (rc != fedstyle::kExitOk && !err.empty()) std::cerr << "error: " << err << "\n";
  return rc;
}
