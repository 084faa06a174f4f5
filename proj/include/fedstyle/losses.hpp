#pragma once

#include <vector>

#include "fedstyle/nn.hpp"

namespace fedstyle {

// Per-class mean embedding (a "style"). class_id indexes [0, C);
// round records when it was computed.
struct StyleVector {
  int class_id = 0;
  Vector v;
  int round = 0;
};

// Exactly one style per class, ordered by class_id.
struct StyleSet {
  std::vector<StyleVector> entries;

  StyleSet() = default;
  explicit StyleSet(std::vector<StyleVector> e);

  int num_classes() const { return static_cast<int>(entries.size()); }
  const StyleVector& operator[](int class_id) const { return entries[class_id]; }
  StyleVector& operator[](int class_id) { return entries[class_id]; }

  // Throws InputError unless entries are complete over 0..C-1 and match
  // embed_dim (when embed_dim > 0).
  void validate(int embed_dim = 0) const;
};

struct LossWeights {
  double l1 = 10.0;
  double l2 = 0.05;
  double l3 = 20.0;
  double l4 = 10.0;
  double l5 = 0.005;

  void validate() const;
};

// Mean negative log softmax over the batch; gradient is
// (softmax - onehot) / batch_size per sample.
struct CrossEntropyResult {
  double value = 0.0;
  std::vector<Vector> d_logits;
};
CrossEntropyResult cross_entropy(const std::vector<Vector>& logits,
                                 const std::vector<int>& labels);

// exp(cosine similarity) with zero-norm guard eps = 1e-12.
double cs(const Vector& a, const Vector& b);

// Scalar loss plus its gradient w.r.t. a single differentiated style.
struct StyleLossResult {
  double value = 0.0;
  Vector d_style;
};

// The contrastive ratio shared by the local (set pair prev/global)
// and global (uploads/prev-global) variants:
//
//   sum_j [cs(m, A[j]) + cs(m, B[j])] / (cs(m, A[i]) + cs(m, B[i]))
//
// m is the only differentiated argument; A and B are constants.
// exclude_positive drops j == i from the numerator sum.
StyleLossResult style_contrast_ratio(const StyleVector& m, const StyleSet& set_a,
                                     const StyleSet& set_b, bool exclude_positive);

// Client-side contrastive term: numerator pairs (prev local cache,
// current global styles); positive class is m_self.class_id.
StyleLossResult contrastive_local(const StyleVector& m_self, const StyleSet& prev_styles,
                                  const StyleSet& global_styles,
                                  bool exclude_positive = false);

// Server-side contrastive term: numerator pairs (uploaded client styles,
// previous-round global styles).
StyleLossResult contrastive_global(const StyleVector& m_global_i,
                                   const StyleSet& prev_global,
                                   const StyleSet& local_styles,
                                   bool exclude_positive = false);

// Mean squared difference to the same-class global style; gradient
// 2 (m - g) / embed_dim.
StyleLossResult mse_align(const StyleVector& m_self, const StyleVector& m_global_i);

// Composite gradients of a batch loss: entries already carry the batch
// normalization, ready to feed nn backward() unchanged.
struct CompositeLossResult {
  double value = 0.0;
  std::vector<Vector> d_logits;  // per sample
  std::vector<Vector> d_embed;   // per sample
};

// Local objective: l1 * cross-entropy + l2 * contrastive + l3 * mse,
// where m_batch is the differentiable batch-mean embedding. Embedding
// gradients distribute through the mean (1/batch to each sample).
CompositeLossResult local_loss(const std::vector<Vector>& batch_logits,
                               const std::vector<int>& batch_labels,
                               const StyleVector& m_batch, const StyleSet& prev_styles,
                               const StyleSet& global_styles, const LossWeights& w,
                               bool exclude_positive = false);

// Global objective over a single-class public batch:
// l4 * cross-entropy + l5 * contrastive_global on the class-mean embedding.
CompositeLossResult global_loss(const std::vector<Vector>& batch_logits,
                                const std::vector<int>& batch_labels,
                                const StyleVector& m_class, const StyleSet& prev_global,
                                const StyleSet& local_styles, const LossWeights& w,
                                bool exclude_positive = false);

// FedProx regularizer: (mu/2) ||theta - theta_ref||^2 over all tensors.
struct ProximalResult {
  double value = 0.0;
  GradientSet d_params;
};
ProximalResult proximal_term(const ModelParams& local, const ModelParams& global_ref,
                             double mu);

}  // namespace fedstyle
