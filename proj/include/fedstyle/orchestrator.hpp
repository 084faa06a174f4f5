#pragma once

#include <string>
#include <vector>

#include "fedstyle/client.hpp"
#include "fedstyle/server.hpp"

namespace fedstyle {

enum class Method { kFedStyle, kFedAvg, kFedProx, kLocal };

std::string method_name(Method m);
Method parse_method(const std::string& name);

enum class PartitionKind { kSorted, kDirichlet, kEvenly };

std::string partition_name(PartitionKind p);
PartitionKind parse_partition(const std::string& name);

struct ExperimentConfig {
  Method method = Method::kFedStyle;
  int rounds = 100;
  int local_epochs = 5;
  int batch_size = 32;
  double lr = 0.01;
  double momentum = 0.5;
  LossWeights weights;  // 10, 0.05, 20, 10, 0.005
  double mu = 0.01;
  int global_epochs = 1;
  uint64_t seed = 0;

  // dataset: synthetic clusters or a feature CSV
  std::string dataset = "synthetic";
  std::string csv_path;
  int classes = 10;
  int per_class = 200;
  int dim = 32;
  double sigma = 1.0;

  int hidden_dim = 64;
  int embed_dim = 16;

  PartitionKind partition = PartitionKind::kSorted;
  double alpha = 0.5;
  int num_clients = 0;  // 0: one client per class

  double train_fraction = 0.8;
  double public_fraction = 0.1;

  int eval_interval = 1;
  int client_threads = 1;
  bool exclude_positive_in_numerator = false;
  bool public_overlaps_clients = false;

  int effective_num_clients() const { return num_clients > 0 ? num_clients : classes; }
  void validate() const;
};

struct RoundMetrics {
  int round = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double mean_local_loss = 0.0;
  std::vector<double> style_norms;  // per client upload
  double wall_seconds = 0.0;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<RoundMetrics> rounds;
  std::vector<std::vector<int>> final_confusion;
  double trailing_mean_acc = 0.0;  // window 10; NaN when fewer rounds ran
};

// Drives the full federation loop (or the public-data-only baseline) for
// cfg.rounds rounds. Configuration errors surface before round 1;
// numeric failures carry the round number.
RunResult run_experiment(const ExperimentConfig& cfg);

struct SuiteRun {
  std::string name;
  bool ok = false;
  std::string error;
  RunResult result;  // valid when ok
};

// Independent runs; result order matches input order. jobs <= 1 runs
// sequentially.
std::vector<SuiteRun> run_suite(const std::vector<ExperimentConfig>& configs,
                                const std::vector<std::string>& names, int jobs = 1);

// Mean accuracy over the final `window` rounds.
double trailing_mean_accuracy(const RunResult& result, int window = 10);

}  // namespace fedstyle
