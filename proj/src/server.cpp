#include "fedstyle/server.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fedstyle {

ModelParams weighted_average(const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) throw InputError("weighted_average: no updates");

  std::vector<const ClientUpdate*> ordered;
  ordered.reserve(updates.size());
  for (const ClientUpdate& u : updates) ordered.push_back(&u);
  std::sort(ordered.begin(), ordered.end(),
            [](const ClientUpdate* a, const ClientUpdate* b) {
              return a->client_id < b->client_id;
            });

  double total = 0.0;
  for (const ClientUpdate* u : ordered) {
    if (u->num_samples <= 0)
      throw InputError("weighted_average: client " + std::to_string(u->client_id) +
                       " reports " + std::to_string(u->num_samples) + " samples");
    total += u->num_samples;
  }

  const ModelDims dims = ordered[0]->params.dims();
  ModelParams avg = ModelParams::zeros(dims);
  for (const ClientUpdate* u : ordered) {
    const double w = u->num_samples / total;
    auto acc = [&](std::vector<double>& dst, const std::vector<double>& src) {
      if (dst.size() != src.size())
        throw InputError("weighted_average: parameter shapes differ across clients");
      for (size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
    };
    acc(avg.W1.data, u->params.W1.data);
    acc(avg.b1, u->params.b1);
    acc(avg.W2.data, u->params.W2.data);
    acc(avg.b2, u->params.b2);
    acc(avg.W3.data, u->params.W3.data);
    acc(avg.b3, u->params.b3);
  }
  return avg;
}

namespace {

std::vector<std::vector<int>> indices_by_class(const Dataset& ds) {
  std::vector<std::vector<int>> by_class(ds.num_classes);
  for (size_t i = 0; i < ds.samples.size(); ++i)
    by_class[ds.samples[i].y].push_back(static_cast<int>(i));
  return by_class;
}

StyleSet public_styles(const ModelParams& params, const Dataset& public_data,
                       int round) {
  auto by_class = indices_by_class(public_data);
  StyleSet styles;
  styles.entries.resize(public_data.num_classes);
  for (int c = 0; c < public_data.num_classes; ++c) {
    if (by_class[c].empty())
      throw InputError("public dataset is missing class " + std::to_string(c));
    styles[c] = compute_style(params, gather(public_data, by_class[c]), c, round);
  }
  return styles;
}

// Interleaves per-class shuffled index lists round-robin, so consecutive
// batches stay class-stratified.
std::vector<int> stratified_order(const std::vector<std::vector<int>>& by_class) {
  std::vector<int> order;
  size_t longest = 0;
  for (const auto& lst : by_class) longest = std::max(longest, lst.size());
  for (size_t k = 0; k < longest; ++k)
    for (const auto& lst : by_class)
      if (k < lst.size()) order.push_back(lst[k]);
  return order;
}

// The round objective over a full deterministic pass: batch-mean cross
// entropy plus the class-mean of the contrastive ratios. Used for the
// aggregation report only.
double mean_global_loss(const ModelParams& params, const Dataset& public_data,
                        const StyleSet& prev_global, const StyleSet& uploaded,
                        const GlobalTrainConfig& cfg) {
  auto by_class = indices_by_class(public_data);
  std::vector<Vector> logits;
  std::vector<int> labels;
  double ratio_sum = 0.0;
  for (int c = 0; c < public_data.num_classes; ++c) {
    StyleVector mean;
    mean.class_id = c;
    mean.v.assign(params.W2.rows, 0.0);
    for (int idx : by_class[c]) {
      ForwardTrace t = forward(params, public_data.samples[idx].x);
      logits.push_back(t.logits);
      labels.push_back(c);
      for (size_t k = 0; k < mean.v.size(); ++k) mean.v[k] += t.embedding[k];
    }
    for (auto& v : mean.v) v /= static_cast<double>(by_class[c].size());
    ratio_sum += contrastive_global(mean, prev_global, uploaded, cfg.exclude_positive)
                     .value;
  }
  return cfg.weights.l4 * cross_entropy(logits, labels).value +
         cfg.weights.l5 * ratio_sum / public_data.num_classes;
}

}  // namespace

StyleSet init_global_styles(ServerState& state, int round) {
  state.global_styles = public_styles(state.global_params, state.public_data, round);
  state.prev_global_styles = state.global_styles;
  return state.global_styles;
}

AggregationReport global_update(ServerState& state,
                                const std::vector<ClientUpdate>& updates,
                                const GlobalTrainConfig& cfg, int round) {
  const int num_classes = state.public_data.num_classes;
  std::vector<const ClientUpdate*> by_id(num_classes, nullptr);
  for (const ClientUpdate& u : updates) {
    if (u.client_id < 0 || u.client_id >= num_classes || by_id[u.client_id])
      throw ProtocolError("global_update: unexpected or duplicate update from client " +
                          std::to_string(u.client_id));
    by_id[u.client_id] = &u;
  }
  for (int i = 0; i < num_classes; ++i)
    if (!by_id[i])
      throw ProtocolError("global_update: missing update from client " +
                          std::to_string(i));

  AggregationReport report;
  report.round = round;
  for (int i = 0; i < num_classes; ++i)
    report.client_sample_counts.push_back(by_id[i]->num_samples);

  // (a) parameter aggregation
  state.global_params = weighted_average(updates);
  state.velocity = ModelParams::zeros(state.global_params.dims());

  // uploaded styles as a complete set, indexed by client id
  StyleSet uploaded;
  uploaded.entries.resize(num_classes);
  for (int i = 0; i < num_classes; ++i) {
    uploaded[i] = by_id[i]->style;
    uploaded[i].class_id = i;
  }
  uploaded.validate(state.global_params.W2.rows);

  report.pre_loss = mean_global_loss(state.global_params, state.public_data,
                                     state.prev_global_styles, uploaded, cfg);

  // (b) global style training over class-stratified public batches
  auto by_class = indices_by_class(state.public_data);
  std::vector<ForwardTrace> traces;
  std::vector<Vector> d_logits, d_embed;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (auto& lst : by_class) state.rng.shuffle(lst);
    std::vector<int> order = stratified_order(by_class);
    const int n = static_cast<int>(order.size());
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(start + cfg.batch_size, n);
      traces.clear();
      std::vector<std::vector<int>> group(num_classes);  // positions in batch
      for (int k = start; k < stop; ++k) {
        const Sample& s = state.public_data.samples[order[k]];
        group[s.y].push_back(static_cast<int>(traces.size()));
        traces.push_back(forward(state.global_params, s.x));
      }

      // Batch objective: l4 * sample-mean cross entropy + l5 * class-mean
      // of the contrastive ratios (one ratio per class present, each on
      // that class's differentiable mean embedding). For a single-class
      // batch this is exactly losses::global_loss.
      std::vector<Vector> logits;
      std::vector<int> labels;
      for (const ForwardTrace& t : traces) logits.push_back(t.logits);
      for (int k = start; k < stop; ++k)
        labels.push_back(state.public_data.samples[order[k]].y);
      CrossEntropyResult ce = cross_entropy(logits, labels);

      int present = 0;
      for (int c = 0; c < num_classes; ++c)
        if (!group[c].empty()) ++present;

      double loss = cfg.weights.l4 * ce.value;
      d_logits = std::move(ce.d_logits);
      for (auto& g : d_logits)
        for (auto& v : g) v *= cfg.weights.l4;
      d_embed.assign(traces.size(), Vector(state.global_params.W2.rows, 0.0));

      for (int c = 0; c < num_classes; ++c) {
        if (group[c].empty()) continue;
        StyleVector mean;
        mean.class_id = c;
        mean.round = round;
        mean.v.assign(state.global_params.W2.rows, 0.0);
        for (int pos : group[c])
          for (size_t k = 0; k < mean.v.size(); ++k)
            mean.v[k] += traces[pos].embedding[k];
        for (auto& v : mean.v) v /= static_cast<double>(group[c].size());

        StyleLossResult ratio = contrastive_global(
            mean, state.prev_global_styles, uploaded, cfg.exclude_positive);
        loss += cfg.weights.l5 * ratio.value / present;
        const double scale =
            cfg.weights.l5 / (present * static_cast<double>(group[c].size()));
        for (int pos : group[c])
          for (size_t k = 0; k < ratio.d_style.size(); ++k)
            d_embed[pos][k] = scale * ratio.d_style[k];
      }

      if (!std::isfinite(loss))
        throw NumericError("server: non-finite global loss at round " +
                           std::to_string(round) + ", batch " +
                           std::to_string(start / cfg.batch_size));
      GradientSet grads = backward(state.global_params, traces, d_logits, d_embed);
      sgd_step(state.global_params, grads, state.velocity, cfg.lr, cfg.momentum);
    }
  }

  report.post_loss = mean_global_loss(state.global_params, state.public_data,
                                      state.prev_global_styles, uploaded, cfg);

  // (c) style bookkeeping: previous set lags the fresh one by one round
  state.prev_global_styles = state.global_styles;
  state.global_styles = public_styles(state.global_params, state.public_data, round);
  return report;
}

EvalResult evaluate(const ModelParams& params, const Dataset& test) {
  if (test.empty()) throw InputError("evaluate: empty test set");
  const int num_classes = test.num_classes;

  EvalResult out;
  out.confusion.assign(num_classes, std::vector<int>(num_classes, 0));
  int correct = 0;
  for (const Sample& s : test.samples) {
    ForwardTrace t = forward(params, s.x);
    int pred = static_cast<int>(
        std::max_element(t.logits.begin(), t.logits.end()) - t.logits.begin());
    out.confusion[s.y][pred] += 1;
    if (pred == s.y) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / test.size();

  double f1_sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    int tp = out.confusion[c][c];
    int pred_c = 0, true_c = 0;
    for (int k = 0; k < num_classes; ++k) {
      pred_c += out.confusion[k][c];
      true_c += out.confusion[c][k];
    }
    double precision = pred_c > 0 ? static_cast<double>(tp) / pred_c : 0.0;
    double recall = true_c > 0 ? static_cast<double>(tp) / true_c : 0.0;
    f1_sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                       : 0.0;
  }
  out.macro_f1 = f1_sum / num_classes;
  return out;
}

}  // namespace fedstyle
