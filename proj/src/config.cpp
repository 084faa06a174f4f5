#include "fedstyle/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace fedstyle {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& v, const std::string& key, int line) {
  try {
    size_t pos = 0;
    long long r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': expected integer, got '" + v + "'", line);
  }
}

double parse_real(const std::string& v, const std::string& key, int line) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': expected number, got '" + v + "'", line);
  }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError("key '" + key + "': expected true/false, got '" + v + "'", line);
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct KeySpec {
  std::function<void(ExperimentConfig&, const std::string&, int)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    auto add_int = [&](const std::string& key, int ExperimentConfig::*field) {
      t[key] = {[key, field](ExperimentConfig& c, const std::string& v, int line) {
                  c.*field = static_cast<int>(parse_int(v, key, line));
                },
                [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
    };
    auto add_real = [&](const std::string& key, double ExperimentConfig::*field) {
      t[key] = {[key, field](ExperimentConfig& c, const std::string& v, int line) {
                  c.*field = parse_real(v, key, line);
                },
                [field](const ExperimentConfig& c) { return format_real(c.*field); }};
    };
    auto add_bool = [&](const std::string& key, bool ExperimentConfig::*field) {
      t[key] = {[key, field](ExperimentConfig& c, const std::string& v, int line) {
                  c.*field = parse_bool(v, key, line);
                },
                [field](const ExperimentConfig& c) {
                  return c.*field ? "true" : "false";
                }};
    };
    auto add_weight = [&](const std::string& key, double LossWeights::*field) {
      t[key] = {[key, field](ExperimentConfig& c, const std::string& v, int line) {
                  c.weights.*field = parse_real(v, key, line);
                },
                [field](const ExperimentConfig& c) {
                  return format_real(c.weights.*field);
                }};
    };

    t["method"] = {[](ExperimentConfig& c, const std::string& v, int line) {
                     try {
                       c.method = parse_method(v);
                     } catch (const ConfigError& e) {
                       throw ParseError(e.what(), line);
                     }
                   },
                   [](const ExperimentConfig& c) { return method_name(c.method); }};
    add_int("rounds", &ExperimentConfig::rounds);
    add_int("local_epochs", &ExperimentConfig::local_epochs);
    add_int("batch_size", &ExperimentConfig::batch_size);
    add_real("lr", &ExperimentConfig::lr);
    add_real("momentum", &ExperimentConfig::momentum);
    add_weight("lambda1", &LossWeights::l1);
    add_weight("lambda2", &LossWeights::l2);
    add_weight("lambda3", &LossWeights::l3);
    add_weight("lambda4", &LossWeights::l4);
    add_weight("lambda5", &LossWeights::l5);
    add_real("mu", &ExperimentConfig::mu);
    add_int("global_epochs", &ExperimentConfig::global_epochs);
    t["seed"] = {[](ExperimentConfig& c, const std::string& v, int line) {
                   c.seed = static_cast<uint64_t>(parse_int(v, "seed", line));
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }};
    t["dataset"] = {[](ExperimentConfig& c, const std::string& v, int line) {
                      if (v != "synthetic" && v != "csv")
                        throw ParseError("dataset must be 'synthetic' or 'csv'", line);
                      c.dataset = v;
                    },
                    [](const ExperimentConfig& c) { return c.dataset; }};
    t["csv_path"] = {[](ExperimentConfig& c, const std::string& v, int) { c.csv_path = v; },
                     [](const ExperimentConfig& c) { return c.csv_path; }};
    add_int("classes", &ExperimentConfig::classes);
    add_int("per_class", &ExperimentConfig::per_class);
    add_int("dim", &ExperimentConfig::dim);
    add_real("sigma", &ExperimentConfig::sigma);
    add_int("hidden_dim", &ExperimentConfig::hidden_dim);
    add_int("embed_dim", &ExperimentConfig::embed_dim);
    t["partition"] = {[](ExperimentConfig& c, const std::string& v, int line) {
                        try {
                          c.partition = parse_partition(v);
                        } catch (const ConfigError& e) {
                          throw ParseError(e.what(), line);
                        }
                      },
                      [](const ExperimentConfig& c) {
                        return partition_name(c.partition);
                      }};
    add_real("alpha", &ExperimentConfig::alpha);
    add_int("num_clients", &ExperimentConfig::num_clients);
    add_real("train_fraction", &ExperimentConfig::train_fraction);
    add_real("public_fraction", &ExperimentConfig::public_fraction);
    add_int("eval_interval", &ExperimentConfig::eval_interval);
    add_int("client_threads", &ExperimentConfig::client_threads);
    add_bool("exclude_positive_in_numerator",
             &ExperimentConfig::exclude_positive_in_numerator);
    add_bool("public_overlaps_clients", &ExperimentConfig::public_overlaps_clients);
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "method",        "rounds",        "local_epochs",
      "batch_size",    "lr",            "momentum",
      "lambda1",       "lambda2",       "lambda3",
      "lambda4",       "lambda5",       "mu",
      "global_epochs", "seed",          "dataset",
      "csv_path",      "classes",       "per_class",
      "dim",           "sigma",         "hidden_dim",
      "embed_dim",     "partition",     "alpha",
      "num_clients",   "train_fraction", "public_fraction",
      "eval_interval", "client_threads", "exclude_positive_in_numerator",
      "public_overlaps_clients"};
  return keys;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value', got '" + line + "'", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = key_table().find(key);
    if (it == key_table().end()) throw ParseError("unknown key '" + key + "'", line_no);
    it->second.set(cfg, value, line_no);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_overrides(ExperimentConfig& cfg,
                     const std::map<std::string, std::string>& overrides) {
  for (const auto& [key, value] : overrides) {
    auto it = key_table().find(key);
    if (it == key_table().end()) throw ParseError("unknown key '" + key + "'");
    it->second.set(cfg, value, 0);
  }
}

std::string echo_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (const std::string& key : config_keys())
    out << key << " = " << key_table().at(key).get(cfg) << "\n";
  return out.str();
}

}  // namespace fedstyle
