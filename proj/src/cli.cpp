#include "fedstyle/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedstyle/config.hpp"

namespace fs = std::filesystem;

namespace fedstyle {

namespace {

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  std::istringstream echo(echo_config(cfg));
  std::string line;
  while (std::getline(echo, line)) {
    size_t eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

}  // namespace

std::string metrics_csv(const RunResult& result) {
  std::ostringstream out;
  out << "round,accuracy,macro_f1,mean_local_loss\n";
  for (const RoundMetrics& m : result.rounds)
    out << m.round << "," << format_real(m.accuracy) << "," << format_real(m.macro_f1)
        << "," << format_real(m.mean_local_loss) << "\n";
  return out.str();
}

std::string result_json(const RunResult& result) {
  nlohmann::json j;
  j["config"] = config_json(result.config);
  j["rounds"] = nlohmann::json::array();
  for (const RoundMetrics& m : result.rounds) {
    nlohmann::json r;
    r["round"] = m.round;
    r["accuracy"] = m.accuracy;
    r["macro_f1"] = m.macro_f1;
    r["mean_local_loss"] = m.mean_local_loss;
    r["style_norms"] = m.style_norms;
    r["wall_seconds"] = m.wall_seconds;
    j["rounds"].push_back(std::move(r));
  }
  j["final_confusion"] = result.final_confusion;
  if (std::isnan(result.trailing_mean_acc))
    j["trailing_mean_accuracy"] = nullptr;
  else
    j["trailing_mean_accuracy"] = result.trailing_mean_acc;
  return j.dump(2) + "\n";
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::map<std::string, std::string>& overrides, std::string& err) {
  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    apply_overrides(cfg, overrides);
    cfg.validate();
  } catch (const std::exception& e) {
    err = e.what();
    return kExitUsage;
  }

  RunResult result;
  try {
    result = run_experiment(cfg);
  } catch (const ConfigError& e) {
    err = e.what();
    return kExitUsage;
  } catch (const std::exception& e) {
    err = e.what();
    return kExitRuntime;
  }

  try {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "metrics.csv", metrics_csv(result));
    write_file(fs::path(out_dir) / "result.json", result_json(result));
    write_file(fs::path(out_dir) / "config.echo", echo_config(cfg));
  } catch (const std::exception& e) {
    err = e.what();
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_gen_data(int classes, int per_class, int dim, double sigma, uint64_t seed,
                 const std::string& out_path, std::string& err) {
  try {
    Dataset ds = generate_synthetic(classes, per_class, dim, sigma, seed);
    if (!out_path.empty()) {
      fs::path parent = fs::path(out_path).parent_path();
      if (!parent.empty()) fs::create_directories(parent);
    }
    save_csv(ds, out_path);
  } catch (const std::exception& e) {
    err = e.what();
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_suite(const std::string& config_dir, const std::string& out_dir, int jobs,
              std::string& err) {
  std::vector<fs::path> files;
  try {
    for (const auto& entry : fs::directory_iterator(config_dir)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      if (ext == ".cfg" || ext == ".conf" || ext == ".txt")
        files.push_back(entry.path());
    }
  } catch (const std::exception& e) {
    err = e.what();
    return kExitUsage;
  }
  if (files.empty()) {
    err = "no config files (*.cfg, *.conf, *.txt) in '" + config_dir + "'";
    return kExitUsage;
  }
  std::sort(files.begin(), files.end());

  std::vector<ExperimentConfig> configs;
  std::vector<std::string> names;
  std::vector<SuiteRun> parse_failures;
  for (const fs::path& f : files) {
    std::string name = f.stem().string();
    try {
      configs.push_back(parse_config_file(f.string()));
      names.push_back(name);
    } catch (const std::exception& e) {
      SuiteRun fail;
      fail.name = name;
      fail.ok = false;
      fail.error = e.what();
      parse_failures.push_back(std::move(fail));
    }
  }

  std::vector<SuiteRun> runs;
  if (!configs.empty()) runs = run_suite(configs, names, jobs);
  runs.insert(runs.end(), parse_failures.begin(), parse_failures.end());
  std::sort(runs.begin(), runs.end(),
            [](const SuiteRun& a, const SuiteRun& b) { return a.name < b.name; });

  int succeeded = 0;
  std::ostringstream summary;
  summary << "name,status,final_accuracy,trailing_mean_accuracy,final_macro_f1\n";
  try {
    fs::create_directories(out_dir);
    for (const SuiteRun& run : runs) {
      if (!run.ok) {
        summary << run.name << ",failed,,,\n";
        continue;
      }
      ++succeeded;
      const RunResult& r = run.result;
      std::string final_acc, final_f1, trailing;
      if (!r.rounds.empty()) {
        final_acc = format_real(r.rounds.back().accuracy);
        final_f1 = format_real(r.rounds.back().macro_f1);
      }
      if (!std::isnan(r.trailing_mean_acc)) trailing = format_real(r.trailing_mean_acc);
      summary << run.name << ",ok," << final_acc << "," << trailing << "," << final_f1
              << "\n";

      fs::path run_dir = fs::path(out_dir) / run.name;
      fs::create_directories(run_dir);
      write_file(run_dir / "metrics.csv", metrics_csv(r));
      write_file(run_dir / "result.json", result_json(r));
      write_file(run_dir / "config.echo", echo_config(r.config));
    }
    write_file(fs::path(out_dir) / "summary.csv", summary.str());
  } catch (const std::exception& e) {
    err = e.what();
    return kExitRuntime;
  }

  if (succeeded == 0) {
    err = "all runs failed";
    for (const SuiteRun& run : runs) err += "\n  " + run.name + ": " + run.error;
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace fedstyle
