#include "fedstyle/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace fedstyle {

void Dataset::validate() const {
  for (size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.y < 0 || s.y >= num_classes)
      throw InputError("Dataset: sample " + std::to_string(i) + " has label " +
                       std::to_string(s.y) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    if (static_cast<int>(s.x.size()) != dim)
      throw InputError("Dataset: sample " + std::to_string(i) + " has dim " +
                       std::to_string(s.x.size()));
    for (double v : s.x)
      if (!std::isfinite(v))
        throw InputError("Dataset: non-finite feature in sample " + std::to_string(i));
  }
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InputError("SplitSpec: train_fraction must be in (0, 1)");
  if (!(public_fraction_of_train > 0.0 && public_fraction_of_train < 1.0))
    throw InputError("SplitSpec: public_fraction_of_train must be in (0, 1)");
}

Dataset generate_synthetic(int num_classes, int n_per_class, int dim, double sigma,
                           uint64_t seed) {
  if (num_classes < 2) throw InputError("generate_synthetic: need at least 2 classes");
  if (n_per_class < 10) throw InputError("generate_synthetic: need >= 10 samples per class");
  if (dim < 1) throw InputError("generate_synthetic: dim must be >= 1");
  if (sigma < 0.0) throw InputError("generate_synthetic: sigma must be >= 0");

  Rng rng = Rng::derive(seed, {stream::kData});
  std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim));
  for (auto& mu : means) {
    double norm = 0.0;
    for (auto& v : mu) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) norm = 1.0;
    for (auto& v : mu) v *= 3.0 / norm;  // clusters on the radius-3 shell
  }

  Dataset ds;
  ds.num_classes = num_classes;
  ds.dim = dim;
  ds.samples.reserve(static_cast<size_t>(num_classes) * n_per_class);
  for (int c = 0; c < num_classes; ++c) {
    for (int n = 0; n < n_per_class; ++n) {
      Sample s;
      s.y = c;
      s.x.resize(dim);
      for (int k = 0; k < dim; ++k) s.x[k] = means[c][k] + sigma * rng.normal();
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& field, int line_no) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw ParseError("non-numeric field '" + field + "'", line_no);
  }
  while (pos < field.size() && (field[pos] == ' ' || field[pos] == '\t')) ++pos;
  if (pos != field.size())
    throw ParseError("non-numeric field '" + field + "'", line_no);
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("no samples: file is empty", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_fields(line);
  if (header.size() < 2 || header[0] != "label")
    throw ParseError("expected header 'label,f0,...'", line_no);
  const int dim = static_cast<int>(header.size()) - 1;

  Dataset ds;
  ds.dim = dim;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (static_cast<int>(fields.size()) != dim + 1)
      throw ParseError("expected " + std::to_string(dim + 1) + " fields, got " +
                       std::to_string(fields.size()), line_no);
    double label_raw = parse_double(fields[0], line_no);
    int label = static_cast<int>(label_raw);
    if (label_raw != static_cast<double>(label) || label < 0)
      throw ParseError("label must be a nonnegative integer, got '" + fields[0] + "'",
                       line_no);
    Sample s;
    s.y = label;
    s.x.resize(dim);
    for (int k = 0; k < dim; ++k) s.x[k] = parse_double(fields[k + 1], line_no);
    ds.samples.push_back(std::move(s));
    max_label = std::max(max_label, label);
  }
  if (ds.samples.empty()) throw ParseError("no samples", line_no);
  ds.num_classes = max_label + 1;
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("save_csv: cannot open '" + path + "' for writing");
  out << "label";
  for (int k = 0; k < ds.dim; ++k) out << ",f" << k;
  out << "\n";
  out << std::setprecision(17);
  for (const Sample& s : ds.samples) {
    out << s.y;
    for (double v : s.x) out << "," << v;
    out << "\n";
  }
}

SplitResult split(const Dataset& ds, const SplitSpec& spec, bool keep_public_in_train) {
  spec.validate();
  ds.validate();

  std::vector<std::vector<int>> by_class(ds.num_classes);
  for (size_t i = 0; i < ds.samples.size(); ++i)
    by_class[ds.samples[i].y].push_back(static_cast<int>(i));
  for (int c = 0; c < ds.num_classes; ++c)
    if (by_class[c].size() < 5)
      throw InputError("split: class " + std::to_string(c) + " has only " +
                       std::to_string(by_class[c].size()) + " samples (need >= 5)");

  SplitResult out;
  out.train_by_class.resize(ds.num_classes);
  out.test_by_class.resize(ds.num_classes);
  out.public_data.num_classes = ds.num_classes;
  out.public_data.dim = ds.dim;

  for (int c = 0; c < ds.num_classes; ++c) {
    std::vector<int>& idx = by_class[c];
    Rng rng = Rng::derive(spec.seed, {stream::kSplit, static_cast<uint64_t>(c)});
    rng.shuffle(idx);

    int n = static_cast<int>(idx.size());
    int n_train = static_cast<int>(std::floor(spec.train_fraction * n));
    // ceil keeps the public set class-complete even for tiny classes
    int n_public =
        static_cast<int>(std::ceil(spec.public_fraction_of_train * n_train));

    Dataset& train = out.train_by_class[c];
    Dataset& test = out.test_by_class[c];
    train.num_classes = test.num_classes = ds.num_classes;
    train.dim = test.dim = ds.dim;

    for (int k = 0; k < n_train; ++k) {
      const Sample& s = ds.samples[idx[k]];
      if (k < n_public) {
        out.public_data.samples.push_back(s);
        if (!keep_public_in_train) continue;
      }
      train.samples.push_back(s);
    }
    for (int k = n_train; k < n; ++k) test.samples.push_back(ds.samples[idx[k]]);
  }
  return out;
}

Dataset flatten(const std::vector<Dataset>& by_class) {
  Dataset out;
  if (by_class.empty()) return out;
  out.num_classes = by_class[0].num_classes;
  out.dim = by_class[0].dim;
  for (const Dataset& d : by_class)
    out.samples.insert(out.samples.end(), d.samples.begin(), d.samples.end());
  return out;
}

Partition partition_sorted(const std::vector<Dataset>& train_by_class) {
  Partition p;
  p.client_indices.resize(train_by_class.size());
  int offset = 0;
  for (size_t c = 0; c < train_by_class.size(); ++c) {
    int n = static_cast<int>(train_by_class[c].size());
    p.client_indices[c].resize(n);
    std::iota(p.client_indices[c].begin(), p.client_indices[c].end(), offset);
    offset += n;
  }
  return p;
}

namespace {

// Moves single samples from the largest client until nobody is empty.
void repair_empty_clients(Partition& p) {
  for (;;) {
    int empty = -1;
    for (int k = 0; k < p.num_clients(); ++k)
      if (p.client_indices[k].empty()) {
        empty = k;
        break;
      }
    if (empty < 0) return;
    int largest = 0;
    for (int k = 1; k < p.num_clients(); ++k)
      if (p.client_indices[k].size() > p.client_indices[largest].size()) largest = k;
    if (p.client_indices[largest].size() <= 1)
      throw InputError("partition: not enough samples to give every client one");
    p.client_indices[empty].push_back(p.client_indices[largest].back());
    p.client_indices[largest].pop_back();
  }
}

}  // namespace

Partition partition_dirichlet(const std::vector<Dataset>& train_by_class, double alpha,
                              int num_clients, uint64_t seed) {
  if (alpha <= 0.0) throw InputError("partition_dirichlet: alpha must be > 0");
  if (num_clients < 2) throw InputError("partition_dirichlet: need >= 2 clients");

  Partition p;
  p.client_indices.resize(num_clients);
  Rng rng = Rng::derive(seed, {stream::kPartition});

  int offset = 0;
  for (size_t c = 0; c < train_by_class.size(); ++c) {
    int n = static_cast<int>(train_by_class[c].size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), offset);
    rng.shuffle(idx);

    std::vector<double> props = rng.dirichlet(alpha, num_clients);
    double cum = 0.0;
    int prev = 0;
    for (int k = 0; k < num_clients; ++k) {
      cum += props[k];
      int bound = k + 1 == num_clients ? n : static_cast<int>(std::floor(cum * n));
      for (int t = prev; t < bound; ++t) p.client_indices[k].push_back(idx[t]);
      prev = bound;
    }
    offset += n;
  }
  repair_empty_clients(p);
  return p;
}

Partition partition_evenly(const std::vector<Dataset>& train_by_class, int num_clients,
                           uint64_t seed) {
  if (num_clients < 2) throw InputError("partition_evenly: need >= 2 clients");

  int total = 0;
  for (const Dataset& d : train_by_class) total += static_cast<int>(d.size());
  std::vector<int> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng::derive(seed, {stream::kPartition});
  rng.shuffle(idx);

  Partition p;
  p.client_indices.resize(num_clients);
  for (int t = 0; t < total; ++t)
    p.client_indices[t % num_clients].push_back(idx[t]);
  return p;
}

Dataset gather(const Dataset& flat, const std::vector<int>& indices) {
  Dataset out;
  out.num_classes = flat.num_classes;
  out.dim = flat.dim;
  out.samples.reserve(indices.size());
  for (int i : indices) out.samples.push_back(flat.samples[i]);
  return out;
}

}  // namespace fedstyle
