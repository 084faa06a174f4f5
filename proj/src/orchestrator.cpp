#include "fedstyle/orchestrator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

namespace fedstyle {

std::string method_name(Method m) {
  switch (m) {
    case Method::kFedStyle: return "fedstyle";
    case Method::kFedAvg: return "fedavg";
    case Method::kFedProx: return "fedprox";
    case Method::kLocal: return "local";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "fedstyle") return Method::kFedStyle;
  if (name == "fedavg") return Method::kFedAvg;
  if (name == "fedprox") return Method::kFedProx;
  if (name == "local") return Method::kLocal;
  throw ConfigError("unknown method '" + name + "'");
}

std::string partition_name(PartitionKind p) {
  switch (p) {
    case PartitionKind::kSorted: return "sorted";
    case PartitionKind::kDirichlet: return "dirichlet";
    case PartitionKind::kEvenly: return "evenly";
  }
  return "?";
}

PartitionKind parse_partition(const std::string& name) {
  if (name == "sorted") return PartitionKind::kSorted;
  if (name == "dirichlet") return PartitionKind::kDirichlet;
  if (name == "evenly") return PartitionKind::kEvenly;
  throw ConfigError("unknown partition '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (local_epochs < 0) throw ConfigError("local_epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
  weights.validate();
  if (mu < 0.0) throw ConfigError("mu must be >= 0");
  if (global_epochs < 0) throw ConfigError("global_epochs must be >= 0");
  if (dataset != "synthetic" && dataset != "csv")
    throw ConfigError("dataset must be 'synthetic' or 'csv'");
  if (dataset == "csv" && csv_path.empty()) throw ConfigError("csv_path is required");
  if (dataset == "synthetic") {
    if (classes < 2) throw ConfigError("classes must be >= 2");
    if (per_class < 10) throw ConfigError("per_class must be >= 10");
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
  }
  if (hidden_dim < 1 || embed_dim < 1) throw ConfigError("model dims must be >= 1");
  if (alpha <= 0.0) throw ConfigError("alpha must be > 0");
  if (num_clients < 0) throw ConfigError("num_clients must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must be in (0, 1)");
  if (!(public_fraction > 0.0 && public_fraction < 1.0))
    throw ConfigError("public_fraction must be in (0, 1)");
  if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (client_threads < 1) throw ConfigError("client_threads must be >= 1");
}

namespace {

double style_norm(const StyleVector& s) {
  double sum = 0.0;
  for (double v : s.v) sum += v * v;
  return std::sqrt(sum);
}

struct PreparedData {
  Dataset flat_train;
  Dataset test_all;
  Dataset public_data;
  std::vector<Dataset> client_data;
};

PreparedData prepare_data(const ExperimentConfig& cfg) {
  Dataset ds = cfg.dataset == "synthetic"
                   ? generate_synthetic(cfg.classes, cfg.per_class, cfg.dim, cfg.sigma,
                                        cfg.seed)
                   : load_csv(cfg.csv_path);

  SplitSpec spec;
  spec.train_fraction = cfg.train_fraction;
  spec.public_fraction_of_train = cfg.public_fraction;
  spec.seed = cfg.seed;
  SplitResult parts = split(ds, spec, cfg.public_overlaps_clients);

  PreparedData out;
  out.flat_train = flatten(parts.train_by_class);
  out.test_all = flatten(parts.test_by_class);
  out.public_data = std::move(parts.public_data);

  const int num_clients = cfg.effective_num_clients();
  Partition partition;
  switch (cfg.partition) {
    case PartitionKind::kSorted:
      if (num_clients != ds.num_classes)
        throw ConfigError("sorted partition requires num_clients == classes (" +
                          std::to_string(num_clients) + " vs " +
                          std::to_string(ds.num_classes) + ")");
      partition = partition_sorted(parts.train_by_class);
      break;
    case PartitionKind::kDirichlet:
      partition = partition_dirichlet(parts.train_by_class, cfg.alpha, num_clients,
                                      cfg.seed);
      break;
    case PartitionKind::kEvenly:
      partition = partition_evenly(parts.train_by_class, num_clients, cfg.seed);
      break;
  }
  for (const auto& idx : partition.client_indices)
    out.client_data.push_back(gather(out.flat_train, idx));
  return out;
}

LocalTrainConfig local_config(const ExperimentConfig& cfg) {
  LocalTrainConfig c;
  c.epochs = cfg.local_epochs;
  c.batch_size = cfg.batch_size;
  c.lr = cfg.lr;
  c.momentum = cfg.momentum;
  c.weights = cfg.weights;
  c.mu = cfg.mu;
  c.exclude_positive = cfg.exclude_positive_in_numerator;
  return c;
}

// Trains one model on the public data only (baseline "local"); each
// "round" is local_epochs epochs followed by an evaluation.
RunResult run_local_baseline(const ExperimentConfig& cfg, const PreparedData& data) {
  ModelDims dims{data.public_data.dim, cfg.hidden_dim, cfg.embed_dim,
                 data.public_data.num_classes};
  dims.validate();
  Rng init_rng = Rng::derive(cfg.seed, {stream::kInit});
  ModelParams params = init_params(dims, init_rng);
  GradientSet velocity = ModelParams::zeros(dims);

  RunResult result;
  result.config = cfg;
  const int n = static_cast<int>(data.public_data.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  EvalResult eval;
  bool evaluated = false;
  for (int round = 1; round <= cfg.rounds; ++round) {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng = Rng::derive(cfg.seed, {stream::kLocalBaseline, static_cast<uint64_t>(round)});
    double loss_sum = 0.0;
    int batches = 0;
    std::vector<ForwardTrace> traces;
    std::vector<Vector> logits;
    std::vector<int> labels;
    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
      rng.shuffle(order);
      for (int start = 0; start < n; start += cfg.batch_size) {
        int stop = std::min(start + cfg.batch_size, n);
        traces.clear();
        logits.clear();
        labels.clear();
        for (int k = start; k < stop; ++k) {
          const Sample& s = data.public_data.samples[order[k]];
          traces.push_back(forward(params, s.x));
          logits.push_back(traces.back().logits);
          labels.push_back(s.y);
        }
        CrossEntropyResult ce = cross_entropy(logits, labels);
        if (!std::isfinite(ce.value))
          throw NumericError("round " + std::to_string(round) +
                             ": non-finite loss in local baseline");
        loss_sum += ce.value;
        ++batches;
        GradientSet grads = backward(params, traces, ce.d_logits, {});
        sgd_step(params, grads, velocity, cfg.lr, cfg.momentum);
      }
    }

    if (round % cfg.eval_interval == 0 || round == cfg.rounds || !evaluated) {
      eval = evaluate(params, data.test_all);
      evaluated = true;
    }
    RoundMetrics m;
    m.round = round;
    m.accuracy = eval.accuracy;
    m.macro_f1 = eval.macro_f1;
    m.mean_local_loss = batches > 0 ? loss_sum / batches : 0.0;
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.rounds.push_back(std::move(m));
  }
  if (evaluated) result.final_confusion = eval.confusion;
  result.trailing_mean_acc = result.rounds.size() >= 10
                                 ? trailing_mean_accuracy(result, 10)
                                 : std::nan("");
  return result;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  PreparedData data = prepare_data(cfg);

  if (cfg.method == Method::kLocal) return run_local_baseline(cfg, data);

  const int num_clients = cfg.effective_num_clients();
  if (cfg.method == Method::kFedStyle && num_clients != data.flat_train.num_classes)
    throw ConfigError("fedstyle requires one client per class (" +
                      std::to_string(num_clients) + " clients, " +
                      std::to_string(data.flat_train.num_classes) + " classes)");

  ModelDims dims{data.flat_train.dim, cfg.hidden_dim, cfg.embed_dim,
                 data.flat_train.num_classes};
  dims.validate();

  ServerState server;
  Rng init_rng = Rng::derive(cfg.seed, {stream::kInit});
  server.global_params = init_params(dims, init_rng);
  server.velocity = ModelParams::zeros(dims);
  server.public_data = data.public_data;
  if (cfg.method == Method::kFedStyle) init_global_styles(server, 0);

  std::vector<ClientState> clients(num_clients);
  for (int i = 0; i < num_clients; ++i) {
    clients[i].client_id = i;
    clients[i].local_data = data.client_data[i];
    if (clients[i].local_data.empty())
      throw ConfigError("client " + std::to_string(i) + " received no data");
    if (cfg.method == Method::kFedStyle) clients[i].prev_styles = server.global_styles;
  }

  const LocalTrainConfig local_cfg = local_config(cfg);
  GlobalTrainConfig global_cfg;
  global_cfg.epochs = cfg.global_epochs;
  global_cfg.batch_size = cfg.batch_size;
  global_cfg.lr = cfg.lr;
  global_cfg.momentum = cfg.momentum;
  global_cfg.weights = cfg.weights;
  global_cfg.exclude_positive = cfg.exclude_positive_in_numerator;

  RunResult result;
  result.config = cfg;

  EvalResult eval;
  bool evaluated = false;
  for (int round = 1; round <= cfg.rounds; ++round) {
    auto t0 = std::chrono::steady_clock::now();

    std::vector<LocalUpdateOutcome> outcomes(num_clients);
    std::vector<std::exception_ptr> failures(num_clients);
    auto run_client = [&](int i) {
      try {
        clients[i].rng = Rng::derive(
            cfg.seed, {stream::kClient, static_cast<uint64_t>(i),
                       static_cast<uint64_t>(round)});
        switch (cfg.method) {
          case Method::kFedStyle:
            outcomes[i] = local_update_fedstyle(clients[i], server.global_params,
                                                server.global_styles, local_cfg, round);
            break;
          case Method::kFedAvg:
            outcomes[i] =
                local_update_fedavg(clients[i], server.global_params, local_cfg, round);
            break;
          case Method::kFedProx:
            outcomes[i] =
                local_update_fedprox(clients[i], server.global_params, local_cfg, round);
            break;
          default: break;
        }
      } catch (...) {
        failures[i] = std::current_exception();
      }
    };

    const int threads = std::min(cfg.client_threads, num_clients);
    if (threads <= 1) {
      for (int i = 0; i < num_clients; ++i) run_client(i);
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
          for (int i = next.fetch_add(1); i < num_clients; i = next.fetch_add(1))
            run_client(i);
        });
      for (auto& th : pool) th.join();
    }
    for (int i = 0; i < num_clients; ++i)
      if (failures[i]) {
        try {
          std::rethrow_exception(failures[i]);
        } catch (const NumericError& e) {
          throw NumericError("round " + std::to_string(round) + ": " + e.what());
        }
      }

    std::vector<ClientUpdate> updates;
    updates.reserve(num_clients);
    for (const auto& o : outcomes) updates.push_back(o.update);

    if (cfg.method == Method::kFedStyle) {
      try {
        global_update(server, updates, global_cfg, round);
      } catch (const NumericError& e) {
        throw NumericError("round " + std::to_string(round) + ": " + e.what());
      }
    } else {
      server.global_params = weighted_average(updates);
    }

    if (round % cfg.eval_interval == 0 || round == cfg.rounds || !evaluated) {
      eval = evaluate(server.global_params, data.test_all);
      evaluated = true;
    }

    RoundMetrics m;
    m.round = round;
    m.accuracy = eval.accuracy;
    m.macro_f1 = eval.macro_f1;
    double loss_sum = 0.0;
    for (const auto& o : outcomes) {
      loss_sum += o.mean_loss;
      m.style_norms.push_back(style_norm(o.update.style));
    }
    m.mean_local_loss = loss_sum / num_clients;
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.rounds.push_back(std::move(m));
  }

  if (evaluated) result.final_confusion = eval.confusion;
  result.trailing_mean_acc = result.rounds.size() >= 10
                                 ? trailing_mean_accuracy(result, 10)
                                 : std::nan("");
  return result;
}

std::vector<SuiteRun> run_suite(const std::vector<ExperimentConfig>& configs,
                                const std::vector<std::string>& names, int jobs) {
  if (configs.empty()) throw InputError("run_suite: no configs");
  std::vector<SuiteRun> runs(configs.size());
  for (size_t i = 0; i < configs.size(); ++i)
    runs[i].name = i < names.size() ? names[i] : "run" + std::to_string(i);

  auto work = [&](size_t i) {
    try {
      runs[i].result = run_experiment(configs[i]);
      runs[i].ok = true;
    } catch (const std::exception& e) {
      runs[i].ok = false;
      runs[i].error = e.what();
    }
  };

  if (jobs <= 1) {
    for (size_t i = 0; i < configs.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    size_t workers = std::min<size_t>(jobs, configs.size());
    for (size_t t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1))
          work(i);
      });
    for (auto& th : pool) th.join();
  }
  return runs;
}

double trailing_mean_accuracy(const RunResult& result, int window) {
  if (window < 1) throw InputError("trailing_mean_accuracy: window must be >= 1");
  if (static_cast<int>(result.rounds.size()) < window)
    throw InputError("trailing_mean_accuracy: only " +
                     std::to_string(result.rounds.size()) + " rounds for window " +
                     std::to_string(window));
  double sum = 0.0;
  for (size_t i = result.rounds.size() - window; i < result.rounds.size(); ++i)
    sum += result.rounds[i].accuracy;
  return sum / window;
}

}  // namespace fedstyle
