#include "fedstyle/client.hpp"

#include <cmath>
#include <numeric>

namespace fedstyle {

StyleVector compute_style(const ModelParams& params, const Dataset& data, int class_id,
                          int round) {
  if (data.empty()) throw InputError("compute_style: empty dataset");
  StyleVector style;
  style.class_id = class_id;
  style.round = round;
  style.v.assign(params.W2.rows, 0.0);
  for (const Sample& s : data.samples) {
    ForwardTrace t = forward(params, s.x);
    for (size_t k = 0; k < style.v.size(); ++k) style.v[k] += t.embedding[k];
  }
  for (auto& v : style.v) v /= static_cast<double>(data.size());
  return style;
}

namespace {

enum class LocalObjective { kFedStyle, kFedAvg, kFedProx };

LocalUpdateOutcome run_local_round(ClientState& state, const ModelParams& global_params,
                                   const StyleSet* global_styles,
                                   const LocalTrainConfig& cfg, int round,
                                   LocalObjective objective) {
  if (cfg.epochs < 0) throw InputError("local update: epochs must be >= 0");
  if (cfg.batch_size < 1) throw InputError("local update: batch_size must be >= 1");
  if (state.local_data.empty())
    throw InputError("client " + std::to_string(state.client_id) + ": no local data");

  const int n = static_cast<int>(state.local_data.size());
  state.params = global_params;  // warm start, fresh optimizer
  state.velocity = ModelParams::zeros(global_params.dims());

  double loss_sum = 0.0;
  int batches_seen = 0;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<ForwardTrace> traces;
  std::vector<Vector> logits;
  std::vector<int> labels;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    state.rng.shuffle(order);
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(start + cfg.batch_size, n);
      const int batch = stop - start;
      traces.clear();
      logits.clear();
      labels.clear();
      for (int k = start; k < stop; ++k) {
        const Sample& s = state.local_data.samples[order[k]];
        traces.push_back(forward(state.params, s.x));
        logits.push_back(traces.back().logits);
        labels.push_back(s.y);
      }

      double loss;
      GradientSet grads;
      if (objective == LocalObjective::kFedStyle) {
        StyleVector m_batch;
        m_batch.class_id = state.client_id;
        m_batch.round = round;
        m_batch.v.assign(traces[0].embedding.size(), 0.0);
        for (const ForwardTrace& t : traces)
          for (size_t k = 0; k < m_batch.v.size(); ++k) m_batch.v[k] += t.embedding[k];
        for (auto& v : m_batch.v) v /= static_cast<double>(batch);

        CompositeLossResult composite =
            local_loss(logits, labels, m_batch, state.prev_styles, *global_styles,
                       cfg.weights, cfg.exclude_positive);
        loss = composite.value;
        grads = backward(state.params, traces, composite.d_logits, composite.d_embed);
      } else {
        CrossEntropyResult ce = cross_entropy(logits, labels);
        loss = ce.value;
        grads = backward(state.params, traces, ce.d_logits, {});
        if (objective == LocalObjective::kFedProx) {
          ProximalResult prox = proximal_term(state.params, global_params, cfg.mu);
          loss += prox.value;
          auto add = [](std::vector<double>& dst, const std::vector<double>& src) {
            for (size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
          };
          add(grads.W1.data, prox.d_params.W1.data);
          add(grads.b1, prox.d_params.b1);
          add(grads.W2.data, prox.d_params.W2.data);
          add(grads.b2, prox.d_params.b2);
          add(grads.W3.data, prox.d_params.W3.data);
          add(grads.b3, prox.d_params.b3);
        }
      }

      if (!std::isfinite(loss))
        throw NumericError("client " + std::to_string(state.client_id) +
                           ": non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(start / cfg.batch_size));
      loss_sum += loss;
      ++batches_seen;
      sgd_step(state.params, grads, state.velocity, cfg.lr, cfg.momentum);
    }
  }

  if (!state.params.all_finite())
    throw NumericError("client " + std::to_string(state.client_id) +
                       ": non-finite parameters after local update");

  LocalUpdateOutcome out;
  out.mean_loss = batches_seen > 0 ? loss_sum / batches_seen : 0.0;
  out.update.client_id = state.client_id;
  out.update.params = state.params;
  out.update.num_samples = n;
  out.update.style = compute_style(state.params, state.local_data, state.client_id, round);

  if (objective == LocalObjective::kFedStyle) {
    for (int j = 0; j < state.prev_styles.num_classes(); ++j)
      state.prev_styles[j] = j == state.client_id ? out.update.style : (*global_styles)[j];
  }
  return out;
}

}  // namespace

LocalUpdateOutcome local_update_fedstyle(ClientState& state,
                                         const ModelParams& global_params,
                                         const StyleSet& global_styles,
                                         const LocalTrainConfig& cfg, int round) {
  const int embed_dim = global_params.W2.rows;
  global_styles.validate(embed_dim);
  state.prev_styles.validate(embed_dim);
  return run_local_round(state, global_params, &global_styles, cfg, round,
                         LocalObjective::kFedStyle);
}

LocalUpdateOutcome local_update_fedavg(ClientState& state,
                                       const ModelParams& global_params,
                                       const LocalTrainConfig& cfg, int round) {
  return run_local_round(state, global_params, nullptr, cfg, round,
                         LocalObjective::kFedAvg);
}

LocalUpdateOutcome local_update_fedprox(ClientState& state,
                                        const ModelParams& global_params,
                                        const LocalTrainConfig& cfg, int round) {
  return run_local_round(state, global_params, nullptr, cfg, round,
                         LocalObjective::kFedProx);
}

}  // namespace fedstyle
