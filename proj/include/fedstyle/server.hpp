#pragma once

#include "fedstyle/client.hpp"
#include "fedstyle/data.hpp"
#include "fedstyle/losses.hpp"
#include "fedstyle/nn.hpp"

namespace fedstyle {

struct ServerState {
  ModelParams global_params;
  GradientSet velocity;
  StyleSet global_styles;       // m-bar, refreshed at the end of each round
  StyleSet prev_global_styles;  // exactly one round behind global_styles
  Dataset public_data;
  Rng rng{0};
};

struct AggregationReport {
  int round = 0;
  std::vector<int> client_sample_counts;
  double pre_loss = 0.0;   // global loss right after parameter averaging
  double post_loss = 0.0;  // same anchors, after global style training
};

struct GlobalTrainConfig {
  int epochs = 1;  // G
  int batch_size = 32;
  double lr = 0.01;
  double momentum = 0.5;
  LossWeights weights;
  bool exclude_positive = false;
};

// Sample-count weighted parameter mean. Updates are sorted by client_id
// internally, so the result is independent of argument order.
ModelParams weighted_average(const std::vector<ClientUpdate>& updates);

// Per-class mean embeddings of the public data under the current global
// model; also primes prev_global_styles with the same set.
StyleSet init_global_styles(ServerState& state, int round = 0);

// One server round: average uploads, G epochs of the global objective
// over class-stratified public batches, then refresh the style sets
// (previous set kept with a one-round lag).
AggregationReport global_update(ServerState& state,
                                const std::vector<ClientUpdate>& updates,
                                const GlobalTrainConfig& cfg, int round);

struct EvalResult {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
};

// Argmax predictions; macro-F1 averages per-class F1 over all classes,
// with F1 = 0 where precision + recall = 0.
EvalResult evaluate(const ModelParams& params, const Dataset& test);

}  // namespace fedstyle
