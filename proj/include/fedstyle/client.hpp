#pragma once

#include "fedstyle/data.hpp"
#include "fedstyle/losses.hpp"
#include "fedstyle/nn.hpp"

namespace fedstyle {

// Hyperparameters shared by all local update variants.
struct LocalTrainConfig {
  int epochs = 5;
  int batch_size = 32;
  double lr = 0.01;
  double momentum = 0.5;
  LossWeights weights;
  double mu = 0.01;  // FedProx only
  bool exclude_positive = false;
};

struct ClientState {
  int client_id = 0;
  ModelParams params;
  GradientSet velocity;
  Dataset local_data;
  StyleSet prev_styles;  // entry i: own last style; j != i: cached global styles
  Rng rng{0};
};

// What a client sends to the server each round.
struct ClientUpdate {
  int client_id = 0;
  ModelParams params;
  StyleVector style;
  int num_samples = 0;
};

struct LocalUpdateOutcome {
  ClientUpdate update;
  double mean_loss = 0.0;  // mean over the round's batch losses
};

// Mean embedding over all samples (the class style). No gradient is
// retained; class_id tags the result.
StyleVector compute_style(const ModelParams& params, const Dataset& data, int class_id,
                          int round = 0);

// FedStyle local round: warm-start from the global model, E epochs of the
// composite objective with the per-batch mean embedding standing in for
// the style, then a full-set style for upload. Updates prev_styles.
LocalUpdateOutcome local_update_fedstyle(ClientState& state,
                                         const ModelParams& global_params,
                                         const StyleSet& global_styles,
                                         const LocalTrainConfig& cfg, int round);

// Plain cross-entropy local round (FedAvg). The style is still computed
// for observability.
LocalUpdateOutcome local_update_fedavg(ClientState& state,
                                       const ModelParams& global_params,
                                       const LocalTrainConfig& cfg, int round);

// Cross-entropy plus the proximal pull toward the received global model.
LocalUpdateOutcome local_update_fedprox(ClientState& state,
                                        const ModelParams& global_params,
                                        const LocalTrainConfig& cfg, int round);

}  // namespace fedstyle
