#include "fedstyle/nn.hpp"

#include <cmath>

namespace fedstyle {

void affine(const Matrix& m, const Vector& x, const Vector& b, Vector& y) {
  if (static_cast<int>(x.size()) != m.cols || static_cast<int>(b.size()) != m.rows)
    throw ShapeError("affine: got x[" + std::to_string(x.size()) + "], b[" +
                     std::to_string(b.size()) + "] for " + std::to_string(m.rows) +
                     "x" + std::to_string(m.cols) + " matrix");
  y.assign(m.rows, 0.0);
  for (int r = 0; r < m.rows; ++r) {
    double acc = b[r];
    const double* row = &m.data[static_cast<size_t>(r) * m.cols];
    for (int c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void mul_transposed(const Matrix& m, const Vector& x, Vector& y) {
  if (static_cast<int>(x.size()) != m.rows)
    throw ShapeError("mul_transposed: vector length " + std::to_string(x.size()) +
                     " vs " + std::to_string(m.rows) + " rows");
  y.assign(m.cols, 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = &m.data[static_cast<size_t>(r) * m.cols];
    double xr = x[r];
    for (int c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
  }
}

void add_outer(Matrix& m, const Vector& a, const Vector& b) {
  if (static_cast<int>(a.size()) != m.rows || static_cast<int>(b.size()) != m.cols)
    throw ShapeError("add_outer: shape mismatch");
  for (int r = 0; r < m.rows; ++r) {
    double* row = &m.data[static_cast<size_t>(r) * m.cols];
    double ar = a[r];
    for (int c = 0; c < m.cols; ++c) row[c] += ar * b[c];
  }
}

void ModelDims::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || embed_dim < 1)
    throw InputError("ModelDims: all dims must be >= 1");
  if (num_classes < 2) throw InputError("ModelDims: num_classes must be >= 2");
}

ModelParams ModelParams::zeros(const ModelDims& dims) {
  ModelParams p;
  p.W1 = Matrix(dims.hidden_dim, dims.input_dim);
  p.b1.assign(dims.hidden_dim, 0.0);
  p.W2 = Matrix(dims.embed_dim, dims.hidden_dim);
  p.b2.assign(dims.embed_dim, 0.0);
  p.W3 = Matrix(dims.num_classes, dims.embed_dim);
  p.b3.assign(dims.num_classes, 0.0);
  return p;
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each([&](const char*, const std::vector<double>& t) {
    for (double v : t)
      if (!std::isfinite(v)) ok = false;
  });
  return ok;
}

namespace {
inline double relu(double v) { return v > 0.0 ? v : 0.0; }
inline double relu_gate(double pre) { return pre > 0.0 ? 1.0 : 0.0; }
}  // namespace

ForwardTrace forward(const ModelParams& params, const Vector& x) {
  if (static_cast<int>(x.size()) != params.W1.cols)
    throw ShapeError("forward: input length " + std::to_string(x.size()) +
                     ", model expects " + std::to_string(params.W1.cols));
  ForwardTrace t;
  t.input = x;
  affine(params.W1, x, params.b1, t.pre1);
  t.act1.resize(t.pre1.size());
  for (size_t i = 0; i < t.pre1.size(); ++i) t.act1[i] = relu(t.pre1[i]);
  affine(params.W2, t.act1, params.b2, t.pre2);
  t.embedding.resize(t.pre2.size());
  for (size_t i = 0; i < t.pre2.size(); ++i) t.embedding[i] = relu(t.pre2[i]);
  affine(params.W3, t.embedding, params.b3, t.logits);
  return t;
}

GradientSet backward(const ModelParams& params,
                     const std::vector<ForwardTrace>& traces,
                     const std::vector<Vector>& d_logits,
                     const std::vector<Vector>& d_embed) {
  if (traces.empty()) throw ShapeError("backward: empty batch");
  if (!d_logits.empty() && d_logits.size() != traces.size())
    throw ShapeError("backward: " + std::to_string(d_logits.size()) +
                     " logit gradients for " + std::to_string(traces.size()) + " traces");
  if (!d_embed.empty() && d_embed.size() != traces.size())
    throw ShapeError("backward: " + std::to_string(d_embed.size()) +
                     " embedding gradients for " + std::to_string(traces.size()) + " traces");

  GradientSet g = ModelParams::zeros(params.dims());
  Vector dz, dpre2, da1, dpre1;
  for (size_t s = 0; s < traces.size(); ++s) {
    const ForwardTrace& t = traces[s];
    dz.assign(t.embedding.size(), 0.0);
    if (!d_logits.empty()) {
      const Vector& dl = d_logits[s];
      if (dl.size() != t.logits.size()) throw ShapeError("backward: logit gradient length");
      add_outer(g.W3, dl, t.embedding);
      for (size_t i = 0; i < dl.size(); ++i) g.b3[i] += dl[i];
      mul_transposed(params.W3, dl, dz);
    }
    if (!d_embed.empty()) {
      const Vector& de = d_embed[s];
      if (de.size() != t.embedding.size()) throw ShapeError("backward: embed gradient length");
      for (size_t i = 0; i < de.size(); ++i) dz[i] += de[i];
    }
    dpre2.resize(dz.size());
    for (size_t i = 0; i < dz.size(); ++i) dpre2[i] = dz[i] * relu_gate(t.pre2[i]);
    add_outer(g.W2, dpre2, t.act1);
    for (size_t i = 0; i < dpre2.size(); ++i) g.b2[i] += dpre2[i];
    mul_transposed(params.W2, dpre2, da1);
    dpre1.resize(da1.size());
    for (size_t i = 0; i < da1.size(); ++i) dpre1[i] = da1[i] * relu_gate(t.pre1[i]);
    add_outer(g.W1, dpre1, t.input);
    for (size_t i = 0; i < dpre1.size(); ++i) g.b1[i] += dpre1[i];
  }
  return g;
}

void sgd_step(ModelParams& params, const GradientSet& grads, GradientSet& velocity,
              double lr, double momentum) {
  if (lr <= 0.0) throw InputError("sgd_step: lr must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) throw InputError("sgd_step: momentum in [0, 1)");
  grads.for_each([](const char* name, const std::vector<double>& t) {
    for (double v : t)
      if (!std::isfinite(v))
        throw NumericError(std::string("sgd_step: non-finite gradient in ") + name);
  });

  auto step = [&](std::vector<double>& th, const std::vector<double>& g,
                  std::vector<double>& v) {
    if (th.size() != g.size() || th.size() != v.size())
      throw ShapeError("sgd_step: tensor shapes disagree");
    for (size_t i = 0; i < th.size(); ++i) {
      v[i] = momentum * v[i] + g[i];
      th[i] -= lr * v[i];
    }
  };
  step(params.W1.data, grads.W1.data, velocity.W1.data);
  step(params.b1, grads.b1, velocity.b1);
  step(params.W2.data, grads.W2.data, velocity.W2.data);
  step(params.b2, grads.b2, velocity.b2);
  step(params.W3.data, grads.W3.data, velocity.W3.data);
  step(params.b3, grads.b3, velocity.b3);
}

ModelParams init_params(const ModelDims& dims, Rng& rng) {
  dims.validate();
  ModelParams p = ModelParams::zeros(dims);
  auto fill = [&](Matrix& w) {
    double s = std::sqrt(6.0 / (w.cols + w.rows));  // fan_in + fan_out
    for (auto& v : w.data) v = rng.uniform(-s, s);
  };
  fill(p.W1);
  fill(p.W2);
  fill(p.W3);
  return p;
}

}  // namespace fedstyle
