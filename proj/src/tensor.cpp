// Copyright 2026 The statret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "statret/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "statret/error.hpp"

namespace statret {

Tensor::Tensor(std::vector<std::size_t> shape_) : shape(std::move(shape_)) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  values.assign(n, 0.0);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
Tensor Tensor::vector(std::size_t n) { return Tensor({n}); }

Tensor Tensor::from(std::vector<std::size_t> shape_, std::vector<double> values_) {
  Tensor t(std::move(shape_));
  if (values_.size() != t.values.size())
    throw ValidationError("tensor: value count does not match shape");
  t.values = std::move(values_);
  return t;
}

void Tensor::ensure_grad() {
  if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() {
  ensure_grad();
  std::fill(grad.begin(), grad.end(), 0.0);
}

std::size_t ModelParams::add(std::string name, Tensor tensor, bool trainable) {
  if (contains(name)) throw ValidationError("duplicate parameter name: " + name);
  tensor.ensure_grad();
  params_.push_back(ParamTensor{std::move(name), std::move(tensor), trainable});
  return params_.size() - 1;
}

std::size_t ModelParams::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  throw ValidationError("unknown parameter: " + std::string(name));
}

bool ModelParams::contains(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const ParamTensor& p) { return p.name == name; });
}

void ModelParams::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

namespace ops {

Tensor window_concat(const Tensor& rows, std::size_t half_window) {
  const std::size_t m = rows.rows(), d = rows.cols(), width = 2 * half_window + 1;
  Tensor out = Tensor::matrix(m, width * d);
  for (std::size_t i = 0; i < m; ++i) {
    auto dst = out.row(i);
    for (std::size_t w = 0; w < width; ++w) {
      // source row i - K + w
      if (i + w < half_window || i + w - half_window >= m) continue;
      auto src = rows.row(i + w - half_window);
      std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(w * d));
    }
  }
  return out;
}

Tensor window_concat_backward(const Tensor& d_windows, std::size_t half_window,
                              std::size_t row_dim) {
  const std::size_t m = d_windows.rows(), width = 2 * half_window + 1;
  if (d_windows.cols() != width * row_dim)
    throw ValidationError("window_concat_backward: shape mismatch");
  Tensor out = Tensor::matrix(m, row_dim);
  for (std::size_t i = 0; i < m; ++i) {
    auto src = d_windows.row(i);
    for (std::size_t w = 0; w < width; ++w) {
      if (i + w < half_window || i + w - half_window >= m) continue;
      auto dst = out.row(i + w - half_window);
      for (std::size_t k = 0; k < row_dim; ++k) dst[k] += src[w * row_dim + k];
    }
  }
  return out;
}

ConvOutput conv_context(const Tensor& embeddings, const Tensor& kernel,
                        std::span<const double> bias, std::size_t half_window) {
  const std::size_t width = (2 * half_window + 1) * embeddings.cols();
  if (kernel.cols() != width || bias.size() != kernel.rows())
    throw ValidationError("conv_context: kernel/bias shape does not match window size");
  ConvOutput out;
  out.windows = window_concat(embeddings, half_window);
  const std::size_t m = embeddings.rows(), nf = kernel.rows();
  out.pre_activation = Tensor::matrix(m, nf);
  out.context = Tensor::matrix(m, nf);
  for (std::size_t i = 0; i < m; ++i) {
    auto win = out.windows.row(i);
    auto pre = out.pre_activation.row(i);
    auto ctx = out.context.row(i);
    for (std::size_t f = 0; f < nf; ++f) {
      pre[f] = dot(kernel.row(f), win);
      ctx[f] = std::max(pre[f], 0.0) + bias[f];
    }
  }
  return out;
}

Tensor conv_context_backward(const ConvOutput& fwd, const Tensor& kernel,
                             const Tensor& d_context, std::size_t half_window,
                             std::size_t embed_dim, std::span<double> d_kernel,
                             std::span<double> d_bias) {
  const std::size_t m = d_context.rows(), nf = kernel.rows(), width = kernel.cols();
  Tensor d_windows = Tensor::matrix(m, width);
  for (std::size_t i = 0; i < m; ++i) {
    auto dctx = d_context.row(i);
    auto pre = fwd.pre_activation.row(i);
    auto win = fwd.windows.row(i);
    auto dwin = d_windows.row(i);
    for (std::size_t f = 0; f < nf; ++f) {
      if (!d_bias.empty()) d_bias[f] += dctx[f];
      if (pre[f] <= 0.0) continue;
      const double g = dctx[f];
      if (g == 0.0) continue;
      auto krow = kernel.row(f);
      if (!d_kernel.empty()) {
        double* dk = d_kernel.data() + f * width;
        for (std::size_t k = 0; k < width; ++k) dk[k] += g * win[k];
      }
      for (std::size_t k = 0; k < width; ++k) dwin[k] += g * krow[k];
    }
  }
  return window_concat_backward(d_windows, half_window, embed_dim);
}

namespace {
void check_mask(std::span<const double> scores, std::span<const bool> mask, const char* who) {
  if (!mask.empty() && mask.size() != scores.size())
    throw ValidationError(std::string(who) + ": mask length differs from scores");
  if (scores.empty()) throw ValidationError(std::string(who) + ": empty input");
  if (!mask.empty() && std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
    throw ValidationError(std::string(who) + ": all positions masked");
}
bool active(std::span<const bool> mask, std::size_t i) { return mask.empty() || mask[i]; }
}  // namespace

std::vector<double> masked_softmax(std::span<const double> scores, std::span<const bool> mask) {
  check_mask(scores, mask, "masked_softmax");
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (active(mask, i)) mx = std::max(mx, scores[i]);
  std::vector<double> out(scores.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!active(mask, i)) continue;
    out[i] = std::exp(scores[i] - mx);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

std::vector<double> softmax_backward(std::span<const double> output,
                                     std::span<const double> upstream) {
  double inner = 0.0;
  for (std::size_t i = 0; i < output.size(); ++i) inner += output[i] * upstream[i];
  std::vector<double> d(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) d[i] = output[i] * (upstream[i] - inner);
  return d;
}

std::vector<double> sparsemax(std::span<const double> scores, std::span<const bool> mask) {
  check_mask(scores, mask, "sparsemax");
  std::vector<double> z;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (active(mask, i)) z.push_back(scores[i]);
  std::stable_sort(z.begin(), z.end(), std::greater<>());
  // Support size: the largest k with 1 + k * z_(k) > sum_{j<=k} z_(j).
  double cumsum = 0.0, support_sum = 0.0;
  std::size_t support = 0;
  for (std::size_t k = 1; k <= z.size(); ++k) {
    cumsum += z[k - 1];
    if (1.0 + static_cast<double>(k) * z[k - 1] > cumsum) {
      support = k;
      support_sum = cumsum;
    }
  }
  std::vector<double> out(scores.size(), 0.0);
  if (support == 1) {
    // z_max - (z_max - 1) can round away from 1; write the vertex exactly.
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (active(mask, i) && (best == scores.size() || scores[i] > scores[best])) best = i;
    out[best] = 1.0;
    return out;
  }
  const double tau = (support_sum - 1.0) / static_cast<double>(support);
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (active(mask, i)) out[i] = std::max(scores[i] - tau, 0.0);
  return out;
}

std::vector<double> sparsemax_backward(std::span<const double> output,
                                       std::span<const double> upstream) {
  if (output.size() != upstream.size())
    throw ValidationError("sparsemax_backward: length mismatch");
  double total = 0.0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    if (output[i] > 0.0) {
      total += upstream[i];
      ++support;
    }
  }
  std::vector<double> d(output.size(), 0.0);
  if (support == 0) return d;
  const double mean = total / static_cast<double>(support);
  for (std::size_t i = 0; i < output.size(); ++i)
    if (output[i] > 0.0) d[i] = upstream[i] - mean;
  return d;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void affine(const Tensor& weight, std::span<const double> bias, std::span<const double> x,
            std::span<double> y) {
  if (weight.cols() != x.size() || weight.rows() != y.size() ||
      (!bias.empty() && bias.size() != y.size()))
    throw ValidationError("affine: shape mismatch");
  for (std::size_t r = 0; r < y.size(); ++r)
    y[r] = dot(weight.row(r), x) + (bias.empty() ? 0.0 : bias[r]);
}

void affine_backward(const Tensor& weight, std::span<const double> x,
                     std::span<const double> dy, std::span<double> d_weight,
                     std::span<double> d_bias, std::span<double> d_x) {
  const std::size_t cols = weight.cols();
  for (std::size_t r = 0; r < dy.size(); ++r) {
    const double g = dy[r];
    if (!d_bias.empty()) d_bias[r] += g;
    if (g == 0.0) continue;
    if (!d_weight.empty()) {
      double* dw = d_weight.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dw[c] += g * x[c];
    }
    if (!d_x.empty()) {
      auto w = weight.row(r);
      for (std::size_t c = 0; c < cols; ++c) d_x[c] += g * w[c];
    }
  }
}

void tanh_inplace(std::span<double> x) {
  for (auto& v : x) v = std::tanh(v);
}

void tanh_backward(std::span<const double> y, std::span<const double> dy, std::span<double> d_x) {
  for (std::size_t i = 0; i < y.size(); ++i) d_x[i] = dy[i] * (1.0 - y[i] * y[i]);
}

void relu_inplace(std::span<double> x) {
  for (auto& v : x) v = std::max(v, 0.0);
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids) {
  const std::size_t d = table.cols();
  Tensor out = Tensor::matrix(ids.size(), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table.rows())
      throw ValidationError("embedding_lookup: id out of range: " + std::to_string(ids[i]));
    auto src = table.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void embedding_backward(const Tensor& d_rows, std::span<const std::int32_t> ids,
                        std::size_t dim, std::span<double> d_table) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double* dst = d_table.data() + static_cast<std::size_t>(ids[i]) * dim;
    auto src = d_rows.row(i);
    for (std::size_t k = 0; k < dim; ++k) dst[k] += src[k];
  }
}

DropoutMask make_dropout_mask(std::size_t n, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ValidationError("dropout rate must be in [0, 1)");
  DropoutMask mask;
  mask.scale.assign(n, 1.0);
  if (rate == 0.0) return mask;
  std::bernoulli_distribution keep(1.0 - rate);
  const double s = 1.0 / (1.0 - rate);
  for (auto& v : mask.scale) v = keep(rng) ? s : 0.0;
  return mask;
}

void apply_dropout(std::span<double> x, const DropoutMask& mask) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= mask.scale[i];
}

LossGrad cross_entropy(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) throw ValidationError("cross_entropy: target out of range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - mx);
  LossGrad out;
  out.loss = mx + std::log(total) - logits[target];
  out.d_logits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i)
    out.d_logits[i] = std::exp(logits[i] - mx) / total - (i == target ? 1.0 : 0.0);
  return out;
}

namespace {
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

LossGrad binary_cross_entropy(double logit, int label) {
  if (label != 0 && label != 1) throw ValidationError("binary_cross_entropy: label must be 0 or 1");
  LossGrad out;
  // -log sigmoid(x) = softplus(-x); -log(1 - sigmoid(x)) = softplus(x)
  out.loss = label == 1 ? softplus(-logit) : softplus(logit);
  out.d_logits = {sigmoid(logit) - static_cast<double>(label)};
  return out;
}

}  // namespace ops
}  // namespace statret
