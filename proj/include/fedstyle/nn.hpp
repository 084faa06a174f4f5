#pragma once

#include <string>
#include <vector>

#include "fedstyle/errors.hpp"
#include "fedstyle/rng.hpp"

namespace fedstyle {

using Vector = std::vector<double>;

// Dense row-major matrix. All the linear algebra this project needs is
// gemv, transposed gemv and rank-1 accumulation, so we keep it minimal.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

// y = M x + b
void affine(const Matrix& m, const Vector& x, const Vector& b, Vector& y);
// y = M^T x
void mul_transposed(const Matrix& m, const Vector& x, Vector& y);
// M += a * b^T
void add_outer(Matrix& m, const Vector& a, const Vector& b);

struct ModelDims {
  int input_dim = 32;
  int hidden_dim = 64;
  int embed_dim = 16;
  int num_classes = 2;

  void validate() const;
};

// All weights and biases of the 3-layer dense classifier:
//   h1 = relu(W1 x + b1), z = relu(W2 h1 + b2), logits = W3 z + b3
// z (the second hidden activation) is the embedding.
struct ModelParams {
  Matrix W1, W2, W3;
  Vector b1, b2, b3;

  static ModelParams zeros(const ModelDims& dims);

  ModelDims dims() const {
    return ModelDims{W1.cols, W1.rows, W2.rows, W3.rows};
  }

  // Applies fn(name, tensor_data) to each of the six tensors, in a fixed
  // order (W1, b1, W2, b2, W3, b3).
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn("W1", W1.data);
    fn("b1", b1);
    fn("W2", W2.data);
    fn("b2", b2);
    fn("W3", W3.data);
    fn("b3", b3);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    fn("W1", W1.data);
    fn("b1", b1);
    fn("W2", W2.data);
    fn("b2", b2);
    fn("W3", W3.data);
    fn("b3", b3);
  }

  bool all_finite() const;
};

// One gradient (or velocity) tensor per parameter tensor, same shapes.
using GradientSet = ModelParams;

// Cached intermediates of one forward pass, enough to run backward
// without touching the inputs again.
struct ForwardTrace {
  Vector input;      // x
  Vector pre1;       // W1 x + b1
  Vector act1;       // relu(pre1)
  Vector pre2;       // W2 act1 + b2
  Vector embedding;  // relu(pre2); the penultimate activations
  Vector logits;     // W3 embedding + b3
};

ForwardTrace forward(const ModelParams& params, const Vector& x);

// Reverse pass over a batch of traces. Two upstream gradient entry
// points: d_logits (classification head) and d_embed (losses that act on
// the embedding directly, bypassing W3/b3). Either may be empty, meaning
// all-zero. Returns gradients summed over the batch.
GradientSet backward(const ModelParams& params,
                     const std::vector<ForwardTrace>& traces,
                     const std::vector<Vector>& d_logits,
                     const std::vector<Vector>& d_embed);

// v <- momentum v + g; theta <- theta - lr v. Throws NumericError naming
// the offending tensor if grads are not finite.
void sgd_step(ModelParams& params, const GradientSet& grads, GradientSet& velocity,
              double lr, double momentum);

// Xavier-uniform weights (U(-s, s), s = sqrt(6 / (fan_in + fan_out))),
// zero biases. Deterministic given the stream.
ModelParams init_params(const ModelDims& dims, Rng& rng);

}  // namespace fedstyle
