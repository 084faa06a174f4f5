#include "fedstyle/losses.hpp"

#include <algorithm>
#include <cmath>

namespace fedstyle {

namespace {
constexpr double kNormEps = 1e-12;

double norm2(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace

StyleSet::StyleSet(std::vector<StyleVector> e) : entries(std::move(e)) { validate(); }

void StyleSet::validate(int embed_dim) const {
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].class_id != static_cast<int>(i))
      throw InputError("StyleSet: entry " + std::to_string(i) + " has class_id " +
                       std::to_string(entries[i].class_id));
    if (embed_dim > 0 && static_cast<int>(entries[i].v.size()) != embed_dim)
      throw InputError("StyleSet: style " + std::to_string(i) + " has length " +
                       std::to_string(entries[i].v.size()) + ", expected " +
                       std::to_string(embed_dim));
    for (double x : entries[i].v)
      if (!std::isfinite(x))
        throw InputError("StyleSet: non-finite entry in style " + std::to_string(i));
  }
}

void LossWeights::validate() const {
  for (double l : {l1, l2, l3, l4, l5})
    if (!(l >= 0.0) || !std::isfinite(l))
      throw InputError("LossWeights: weights must be finite and >= 0");
}

CrossEntropyResult cross_entropy(const std::vector<Vector>& logits,
                                 const std::vector<int>& labels) {
  if (logits.empty()) throw InputError("cross_entropy: empty batch");
  if (logits.size() != labels.size())
    throw ShapeError("cross_entropy: " + std::to_string(logits.size()) + " logits vs " +
                     std::to_string(labels.size()) + " labels");
  const size_t batch = logits.size();
  const int num_classes = static_cast<int>(logits[0].size());

  CrossEntropyResult out;
  out.d_logits.resize(batch);
  for (size_t s = 0; s < batch; ++s) {
    const Vector& l = logits[s];
    if (static_cast<int>(l.size()) != num_classes)
      throw ShapeError("cross_entropy: ragged logits");
    if (labels[s] < 0 || labels[s] >= num_classes)
      throw InputError("cross_entropy: label " + std::to_string(labels[s]) +
                       " out of range [0, " + std::to_string(num_classes) + ")");
    double mx = *std::max_element(l.begin(), l.end());
    double sum = 0.0;
    for (double v : l) sum += std::exp(v - mx);
    double lse = mx + std::log(sum);
    out.value += lse - l[labels[s]];

    Vector& g = out.d_logits[s];
    g.resize(num_classes);
    for (int c = 0; c < num_classes; ++c)
      g[c] = std::exp(l[c] - lse) / static_cast<double>(batch);
    g[labels[s]] -= 1.0 / static_cast<double>(batch);
  }
  out.value /= static_cast<double>(batch);
  return out;
}

double cs(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("cs: vector lengths differ");
  double na = std::max(norm2(a), kNormEps);
  double nb = std::max(norm2(b), kNormEps);
  return std::exp(dot(a, b) / (na * nb));
}

namespace {

// value and d/da of cs(a, b); b is constant.
struct CsGrad {
  double value;
  Vector d_a;
};

CsGrad cs_with_grad(const Vector& a, const Vector& b) {
  double raw_na = norm2(a);
  double na = std::max(raw_na, kNormEps);
  double nb = std::max(norm2(b), kNormEps);
  double cosine = dot(a, b) / (na * nb);
  double value = std::exp(cosine);

  CsGrad out;
  out.value = value;
  out.d_a.assign(a.size(), 0.0);
  // d cos / d a = b/(na nb) - cos * a / na^2; the second term vanishes
  // when the eps guard is active (na is then constant in a).
  double inv = 1.0 / (na * nb);
  double self = raw_na > kNormEps ? cosine / (na * na) : 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    out.d_a[i] = value * (b[i] * inv - self * a[i]);
  return out;
}

}  // namespace

StyleLossResult style_contrast_ratio(const StyleVector& m, const StyleSet& set_a,
                                     const StyleSet& set_b, bool exclude_positive) {
  const int dim = static_cast<int>(m.v.size());
  set_a.validate(dim);
  set_b.validate(dim);
  const int num_classes = set_a.num_classes();
  if (num_classes == 0 || set_b.num_classes() != num_classes)
    throw InputError("style_contrast_ratio: style sets incomplete or inconsistent");
  const int i = m.class_id;
  if (i < 0 || i >= num_classes)
    throw InputError("style_contrast_ratio: class_id " + std::to_string(i) +
                     " outside [0, " + std::to_string(num_classes) + ")");

  double num = 0.0, den = 0.0;
  Vector d_num(m.v.size(), 0.0), d_den(m.v.size(), 0.0);
  for (int j = 0; j < num_classes; ++j) {
    CsGrad ca = cs_with_grad(m.v, set_a[j].v);
    CsGrad cb = cs_with_grad(m.v, set_b[j].v);
    if (!(exclude_positive && j == i)) {
      num += ca.value + cb.value;
      for (size_t k = 0; k < d_num.size(); ++k) d_num[k] += ca.d_a[k] + cb.d_a[k];
    }
    if (j == i) {
      den = ca.value + cb.value;
      for (size_t k = 0; k < d_den.size(); ++k) d_den[k] = ca.d_a[k] + cb.d_a[k];
    }
  }

  StyleLossResult out;
  out.value = num / den;
  out.d_style.resize(m.v.size());
  for (size_t k = 0; k < out.d_style.size(); ++k)
    out.d_style[k] = (d_num[k] * den - num * d_den[k]) / (den * den);
  return out;
}

StyleLossResult contrastive_local(const StyleVector& m_self, const StyleSet& prev_styles,
                                  const StyleSet& global_styles, bool exclude_positive) {
  return style_contrast_ratio(m_self, prev_styles, global_styles, exclude_positive);
}

StyleLossResult contrastive_global(const StyleVector& m_global_i,
                                   const StyleSet& prev_global,
                                   const StyleSet& local_styles, bool exclude_positive) {
  return style_contrast_ratio(m_global_i, local_styles, prev_global, exclude_positive);
}

StyleLossResult mse_align(const StyleVector& m_self, const StyleVector& m_global_i) {
  if (m_self.class_id != m_global_i.class_id)
    throw InputError("mse_align: class mismatch (" + std::to_string(m_self.class_id) +
                     " vs " + std::to_string(m_global_i.class_id) + ")");
  if (m_self.v.size() != m_global_i.v.size())
    throw ShapeError("mse_align: style lengths differ");
  const double n = static_cast<double>(m_self.v.size());

  StyleLossResult out;
  out.d_style.resize(m_self.v.size());
  for (size_t k = 0; k < m_self.v.size(); ++k) {
    double d = m_self.v[k] - m_global_i.v[k];
    out.value += d * d / n;
    out.d_style[k] = 2.0 * d / n;
  }
  return out;
}

CompositeLossResult local_loss(const std::vector<Vector>& batch_logits,
                               const std::vector<int>& batch_labels,
                               const StyleVector& m_batch, const StyleSet& prev_styles,
                               const StyleSet& global_styles, const LossWeights& w,
                               bool exclude_positive) {
  w.validate();
  CrossEntropyResult ce = cross_entropy(batch_logits, batch_labels);
  StyleLossResult contrast =
      contrastive_local(m_batch, prev_styles, global_styles, exclude_positive);
  StyleLossResult align = mse_align(m_batch, global_styles[m_batch.class_id]);

  const double batch = static_cast<double>(batch_logits.size());
  CompositeLossResult out;
  out.value = w.l1 * ce.value + w.l2 * contrast.value + w.l3 * align.value;

  out.d_logits = std::move(ce.d_logits);
  for (auto& g : out.d_logits)
    for (auto& v : g) v *= w.l1;

  Vector per_sample(m_batch.v.size());
  for (size_t k = 0; k < per_sample.size(); ++k)
    per_sample[k] = (w.l2 * contrast.d_style[k] + w.l3 * align.d_style[k]) / batch;
  out.d_embed.assign(batch_logits.size(), per_sample);
  return out;
}

CompositeLossResult global_loss(const std::vector<Vector>& batch_logits,
                                const std::vector<int>& batch_labels,
                                const StyleVector& m_class, const StyleSet& prev_global,
                                const StyleSet& local_styles, const LossWeights& w,
                                bool exclude_positive) {
  w.validate();
  CrossEntropyResult ce = cross_entropy(batch_logits, batch_labels);
  StyleLossResult contrast =
      contrastive_global(m_class, prev_global, local_styles, exclude_positive);

  const double batch = static_cast<double>(batch_logits.size());
  CompositeLossResult out;
  out.value = w.l4 * ce.value + w.l5 * contrast.value;

  out.d_logits = std::move(ce.d_logits);
  for (auto& g : out.d_logits)
    for (auto& v : g) v *= w.l4;

  Vector per_sample(m_class.v.size());
  for (size_t k = 0; k < per_sample.size(); ++k)
    per_sample[k] = w.l5 * contrast.d_style[k] / batch;
  out.d_embed.assign(batch_logits.size(), per_sample);
  return out;
}

ProximalResult proximal_term(const ModelParams& local, const ModelParams& global_ref,
                             double mu) {
  if (mu < 0.0) throw InputError("proximal_term: mu must be >= 0");
  ProximalResult out;
  out.d_params = ModelParams::zeros(local.dims());

  auto accumulate = [&](const std::vector<double>& th, const std::vector<double>& ref,
                        std::vector<double>& g) {
    if (th.size() != ref.size()) throw InputError("proximal_term: parameter shapes differ");
    for (size_t i = 0; i < th.size(); ++i) {
      double d = th[i] - ref[i];
      out.value += 0.5 * mu * d * d;
      g[i] = mu * d;
    }
  };
  accumulate(local.W1.data, global_ref.W1.data, out.d_params.W1.data);
  accumulate(local.b1, global_ref.b1, out.d_params.b1);
  accumulate(local.W2.data, global_ref.W2.data, out.d_params.W2.data);
  accumulate(local.b2, global_ref.b2, out.d_params.b2);
  accumulate(local.W3.data, global_ref.W3.data, out.d_params.W3.data);
  accumulate(local.b3, global_ref.b3, out.d_params.b3);
  return out;
}

}  // namespace fedstyle
