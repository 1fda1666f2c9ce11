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

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace statret {

// Dense row-major 64-bit tensor with an optional gradient buffer.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty, or same length as values

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape_);
  static Tensor matrix(std::size_t rows, std::size_t cols);
  static Tensor vector(std::size_t n);
  static Tensor from(std::vector<std::size_t> shape_, std::vector<double> values_);

  std::size_t size() const { return values.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  std::span<double> row(std::size_t i) { return {values.data() + i * cols(), cols()}; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  std::span<double> grad_row(std::size_t i) { return {grad.data() + i * cols(), cols()}; }

  bool has_grad() const { return !grad.empty(); }
  void ensure_grad();
  void zero_grad();
};

struct ParamTensor {
  std::string name;
  Tensor tensor;
  bool trainable = true;
};

// Named learnable tensors. Names are unique.
class ModelParams {
 public:
  std::size_t add(std::string name, Tensor tensor, bool trainable = true);

  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;
  ParamTensor& operator[](std::size_t i) { return params_[i]; }
  const ParamTensor& operator[](std::size_t i) const { return params_[i]; }
  ParamTensor& get(std::string_view name) { return params_[index_of(name)]; }
  const ParamTensor& get(std::string_view name) const { return params_[index_of(name)]; }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t scalar_count() const;

 private:
  std::vector<ParamTensor> params_;
};

using Rng = std::mt19937_64;

namespace ops {

// Row i of the result concatenates rows i-K..i+K of `rows`; rows outside
// [0, M) contribute zeros.
Tensor window_concat(const Tensor& rows, std::size_t half_window);
// Adjoint of window_concat: folds window gradients back onto the M rows.
Tensor window_concat_backward(const Tensor& d_windows, std::size_t half_window,
                              std::size_t row_dim);

struct ConvOutput {
  Tensor windows;         // M x (2K+1)D
  Tensor pre_activation;  // M x N_f, F * window
  Tensor context;         // M x N_f, ReLU(pre) + bias
};

// c_i = ReLU(F * window_i) + bias. The bias is added after the ReLU.
ConvOutput conv_context(const Tensor& embeddings, const Tensor& kernel,
                        std::span<const double> bias, std::size_t half_window);
// Accumulates into d_kernel / d_bias and returns d_embeddings.
Tensor conv_context_backward(const ConvOutput& fwd, const Tensor& kernel,
                             const Tensor& d_context, std::size_t half_window,
                             std::size_t embed_dim, std::span<double> d_kernel,
                             std::span<double> d_bias);

// mask[i] == true means position i takes part. Empty mask = all positions.
std::vector<double> masked_softmax(std::span<const double> scores, std::span<const bool> mask = {});
std::vector<double> softmax_backward(std::span<const double> output,
                                     std::span<const double> upstream);

// Euclidean projection onto the probability simplex over unmasked entries.
std::vector<double> sparsemax(std::span<const double> scores, std::span<const bool> mask = {});
// Jacobian-vector product: centered upstream on the support, 0 elsewhere.
std::vector<double> sparsemax_backward(std::span<const double> output,
                                       std::span<const double> upstream);

double dot(std::span<const double> a, std::span<const double> b);

// y = W x + b (b may be empty).
void affine(const Tensor& weight, std::span<const double> bias, std::span<const double> x,
            std::span<double> y);
// Given dy: d_weight += dy x^T, d_bias += dy, d_x += W^T dy. Any output span
// may be empty to skip it.
void affine_backward(const Tensor& weight, std::span<const double> x,
                     std::span<const double> dy, std::span<double> d_weight,
                     std::span<double> d_bias, std::span<double> d_x);

void tanh_inplace(std::span<double> x);
// d_x = dy * (1 - y^2) where y = tanh(x).
void tanh_backward(std::span<const double> y, std::span<const double> dy, std::span<double> d_x);
void relu_inplace(std::span<double> x);

Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids);
// Scatter-adds row gradients into d_table (same layout as the table).
void embedding_backward(const Tensor& d_rows, std::span<const std::int32_t> ids,
                        std::size_t dim, std::span<double> d_table);

// Inverted dropout; the mask holds 0 or 1/(1-rate) per element.
struct DropoutMask {
  std::vector<double> scale;
};
DropoutMask make_dropout_mask(std::size_t n, double rate, Rng& rng);
void apply_dropout(std::span<double> x, const DropoutMask& mask);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> d_logits;
};
// -log softmax(logits)[target], max-subtracted.
LossGrad cross_entropy(std::span<const double> logits, std::size_t target);
// Binary cross-entropy on a single logit, written in softplus form.
LossGrad binary_cross_entropy(double logit, int label);

}  // namespace ops
}  // namespace statret
