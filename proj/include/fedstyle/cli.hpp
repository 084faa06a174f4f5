#pragma once

#include <map>
#include <string>

#include "fedstyle/orchestrator.hpp"

namespace fedstyle {

// Exit codes shared by all subcommands.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;    // parse/config/argument problems
constexpr int kExitRuntime = 2;  // numeric or runtime failure mid-run

// Runs one experiment and writes metrics.csv, result.json and
// config.echo into out_dir. Messages go to err on failure.
int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::map<std::string, std::string>& overrides, std::string& err);

// Generates a synthetic feature CSV.
int cmd_gen_data(int classes, int per_class, int dim, double sigma, uint64_t seed,
                 const std::string& out_path, std::string& err);

// Runs every *.cfg / *.conf / *.txt config in config_dir; one result
// directory per config plus summary.csv. Exit 0 if at least one run
// succeeded.
int cmd_suite(const std::string& config_dir, const std::string& out_dir, int jobs,
              std::string& err);

// Serialization helpers (also used by the tests).
std::string metrics_csv(const RunResult& result);
std::string result_json(const RunResult& result);

}  // namespace fedstyle
