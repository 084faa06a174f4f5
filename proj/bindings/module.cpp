#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "fedstyle/cli.hpp"
#include "fedstyle/config.hpp"
#include "fedstyle/losses.hpp"
#include "fedstyle/orchestrator.hpp"

namespace py = pybind11;
using namespace fedstyle;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return py::none();
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return py::int_(j.get<long long>());
    case nlohmann::json::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list lst;
      for (const auto& v : j) lst.append(json_to_py(v));
      return lst;
    }
    case nlohmann::json::value_t::object: {
      py::dict d;
      for (auto it = j.begin(); it != j.end(); ++it)
        d[py::str(it.key())] = json_to_py(it.value());
      return d;
    }
    default: return py::none();
  }
}

ExperimentConfig config_from_dict(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  apply_overrides(cfg, kv);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_fedstyle, m) {
  m.doc() = "FedStyle federated learning simulator";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  m.def(
      "generate_synthetic",
      [](int classes, int per_class, int dim, double sigma, uint64_t seed) {
        Dataset ds = generate_synthetic(classes, per_class, dim, sigma, seed);
        std::vector<std::vector<double>> features;
        std::vector<int> labels;
        for (const Sample& s : ds.samples) {
          features.push_back(s.x);
          labels.push_back(s.y);
        }
        return py::make_tuple(features, labels);
      },
      py::arg("classes"), py::arg("per_class"), py::arg("dim"), py::arg("sigma") = 1.0,
      py::arg("seed") = 0,
      "Gaussian style clusters; returns (features, labels), class-major order.");

  m.def(
      "save_csv",
      [](const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
         const std::string& path) {
        if (features.size() != labels.size())
          throw InputError("save_csv: features/labels length mismatch");
        Dataset ds;
        ds.dim = features.empty() ? 0 : static_cast<int>(features[0].size());
        for (size_t i = 0; i < features.size(); ++i) {
          ds.num_classes = std::max(ds.num_classes, labels[i] + 1);
          ds.samples.push_back({features[i], labels[i]});
        }
        ds.validate();
        save_csv(ds, path);
      },
      py::arg("features"), py::arg("labels"), py::arg("path"));

  m.def(
      "load_csv",
      [](const std::string& path) {
        Dataset ds = load_csv(path);
        std::vector<std::vector<double>> features;
        std::vector<int> labels;
        for (const Sample& s : ds.samples) {
          features.push_back(s.x);
          labels.push_back(s.y);
        }
        return py::make_tuple(features, labels);
      },
      py::arg("path"));

  m.def(
      "cs", [](const Vector& a, const Vector& b) { return cs(a, b); }, py::arg("a"),
      py::arg("b"), "exp(cosine similarity) with a zero-norm guard.");

  m.def(
      "cross_entropy",
      [](const std::vector<Vector>& logits, const std::vector<int>& labels) {
        CrossEntropyResult r = cross_entropy(logits, labels);
        return py::make_tuple(r.value, r.d_logits);
      },
      py::arg("logits"), py::arg("labels"),
      "Mean batch cross entropy; returns (value, per-sample logit gradients).");

  m.def(
      "run_experiment",
      [](const std::map<std::string, std::string>& config) {
        RunResult result = run_experiment(config_from_dict(config));
        return json_to_py(nlohmann::json::parse(result_json(result)));
      },
      py::arg("config"),
      "Runs one experiment from a {key: value} config dict (same keys as the "
      "CLI config files); returns the result as nested dicts/lists.");

  m.def(
      "run_suite",
      [](const std::vector<std::map<std::string, std::string>>& configs, int jobs) {
        std::vector<ExperimentConfig> parsed;
        parsed.reserve(configs.size());
        for (const auto& kv : configs) parsed.push_back(config_from_dict(kv));
        std::vector<SuiteRun> runs = run_suite(parsed, {}, jobs);
        py::list out;
        for (const SuiteRun& r : runs) {
          py::dict d;
          d["name"] = r.name;
          d["ok"] = r.ok;
          d["error"] = r.error;
          if (r.ok)
            d["result"] = json_to_py(nlohmann::json::parse(result_json(r.result)));
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("configs"), py::arg("jobs") = 1);

  m.def(
      "default_config",
      []() {
        ExperimentConfig cfg;
        std::map<std::string, std::string> kv;
        std::istringstream echo(echo_config(cfg));
        std::string line;
        while (std::getline(echo, line)) {
          size_t eq = line.find(" = ");
          kv[line.substr(0, eq)] = line.substr(eq + 3);
        }
        return kv;
      },
      "All config keys with their default values.");

  m.attr("__version__") = "0.1.0";
}
