#pragma once

#include <string>
#include <vector>

#include "fedstyle/errors.hpp"
#include "fedstyle/rng.hpp"

namespace fedstyle {

struct Sample {
  std::vector<double> x;
  int y = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  int num_classes = 0;
  int dim = 0;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  void validate() const;
};

// Per-client lists of sample indices into one flat dataset.
struct Partition {
  std::vector<std::vector<int>> client_indices;

  int num_clients() const { return static_cast<int>(client_indices.size()); }
};

struct SplitSpec {
  double train_fraction = 0.8;
  double public_fraction_of_train = 0.1;
  uint64_t seed = 0;

  void validate() const;
};

struct SplitResult {
  std::vector<Dataset> train_by_class;  // public portion already removed
  std::vector<Dataset> test_by_class;
  Dataset public_data;
};

// Gaussian clusters: class means drawn from N(0, I) then rescaled to norm
// 3, samples mean + sigma * N(0, I). Deterministic given the seed;
// samples ordered class-major.
Dataset generate_synthetic(int num_classes, int n_per_class, int dim, double sigma,
                           uint64_t seed);

// CSV with mandatory header "label,f0,...,f{d-1}"; rows are
// "label,features...". LF or CRLF. Throws ParseError with a line number.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

// Per-class shuffle seeded by (seed, class); first train_fraction to
// train, rest to test; the first public_fraction of each class's train
// portion becomes the server's public set. keep_public_in_train retains
// those samples client-side as well (the overlapping reading).
SplitResult split(const Dataset& ds, const SplitSpec& spec,
                  bool keep_public_in_train = false);

// Concatenates per-class sets class-major into one dataset; partitions
// index into this layout.
Dataset flatten(const std::vector<Dataset>& by_class);

// Client i gets exactly the class-i train set (extreme heterogeneity).
Partition partition_sorted(const std::vector<Dataset>& train_by_class);

// Per class, proportions ~ Dir(alpha) over clients; empty clients are
// repaired by stealing one sample at a time from the largest client.
Partition partition_dirichlet(const std::vector<Dataset>& train_by_class, double alpha,
                              int num_clients, uint64_t seed);

// Global shuffle, round-robin; client sizes differ by at most one.
Partition partition_evenly(const std::vector<Dataset>& train_by_class, int num_clients,
                           uint64_t seed);

// Materializes one client's local dataset from a partition over flat.
Dataset gather(const Dataset& flat, const std::vector<int>& indices);

}  // namespace fedstyle
