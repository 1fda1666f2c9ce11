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

#include <span>
#include <string>
#include <vector>

#include "statret/tensor.hpp"
#include "statret/text.hpp"

namespace statret {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 512;
  std::size_t filters = 512;
  std::size_t half_window = 1;  // window size 2K+1
  std::size_t attention_dim = 200;
  double dropout = 0.2;
  // Average the softmax-normalized word weights instead of the raw word
  // scores when forming sentence scores in the sparse-average encoder.
  bool normalized_word_scores = false;
  // Feed concat(query, article) to the classification head instead of the
  // article vector alone.
  bool head_uses_query = false;
};

namespace param_name {
inline constexpr const char* kEmbedding = "embedding";
inline constexpr const char* kConvKernel = "conv.kernel";
inline constexpr const char* kConvBias = "conv.bias";
inline constexpr const char* kWordAttnWeight = "word_attn.weight";
inline constexpr const char* kWordAttnBias = "word_attn.bias";
inline constexpr const char* kWordAttnQuery = "word_attn.query";
inline constexpr const char* kParaAttnWeight = "para_attn.weight";
inline constexpr const char* kParaAttnBias = "para_attn.bias";
inline constexpr const char* kHeadWeight = "head.weight";
inline constexpr const char* kHeadBias = "head.bias";
}  // namespace param_name

// Indices of the sentence-encoder tensors inside a ModelParams set:
// embedding |V|xD, kernel N_f x (2K+1)D, conv bias N_f, attention weight
// d_a x N_f, attention bias d_a, global attention query d_a.
struct CnnEncoderParams {
  std::size_t embedding, kernel, conv_bias, attn_weight, attn_bias, attn_query;
  static CnnEncoderParams add(ModelParams& params, const EncoderConfig& cfg, Rng& rng);
  static CnnEncoderParams resolve(const ModelParams& params);
};

// General attention over sentences: weight d x d, scalar bias.
struct GeneralAttentionParams {
  std::size_t weight, bias;
  static GeneralAttentionParams add(ModelParams& params, std::size_t dim, Rng& rng);
  static GeneralAttentionParams resolve(const ModelParams& params);
};

// One fully connected layer to a single logit.
struct HeadParams {
  std::size_t weight, bias;
  static HeadParams add(ModelParams& params, std::size_t input_dim, Rng& rng);
  static HeadParams resolve(const ModelParams& params);
};

struct SentenceEncoding {
  std::vector<double> vector;        // r
  std::vector<double> word_scores;   // a_i, raw
  std::vector<double> word_weights;  // alpha_i = softmax(a)
};

// Intermediates kept for the backward pass.
struct SentenceTrace {
  std::vector<TokenId> ids;
  ops::DropoutMask dropout;
  ops::ConvOutput conv;
  Tensor hidden;  // M x d_a, tanh(V c_i + v)
  SentenceEncoding out;
};

enum class ParagraphMode { kSparseAvg, kGeneralAttn };

std::string to_string(ParagraphMode mode);

struct ArticleEncoding {
  std::vector<double> vector;            // r^a
  std::vector<double> sentence_scores;   // omega^s or a^s before sparsemax
  std::vector<double> sentence_weights;  // sparsemax output
  ParagraphMode mode = ParagraphMode::kSparseAvg;
};

struct GeneralAttnTrace {
  std::vector<std::vector<double>> hidden;  // tanh(A r_i + b) per sentence
};

// Pass `dropout_rng` only in training; nullptr disables dropout.
SentenceEncoding encode_sentence_cnn(std::span<const TokenId> ids, const ModelParams& params,
                                     const CnnEncoderParams& idx, const EncoderConfig& cfg,
                                     Rng* dropout_rng = nullptr, SentenceTrace* trace = nullptr);

// Back-propagates d_vector (wrt r) plus optional direct gradients wrt the
// raw word scores and the normalized word weights. Accumulates into `grads`.
void encode_sentence_cnn_backward(const SentenceTrace& trace, std::span<const double> d_vector,
                                  std::span<const double> d_word_scores,
                                  std::span<const double> d_word_weights,
                                  const ModelParams& params, const CnnEncoderParams& idx,
                                  const EncoderConfig& cfg, ModelParams& grads);

// omega_j = mean word score of sentence j; weights = sparsemax(omega);
// r^a = sum_j weights_j r_j. Query-independent.
ArticleEncoding encode_paragraph_sparse_avg(std::span<const SentenceEncoding> sentences,
                                            bool normalized_word_scores = false);

struct SparseAvgGrads {
  std::vector<std::vector<double>> d_vectors;
  std::vector<std::vector<double>> d_word_scores;
  std::vector<std::vector<double>> d_word_weights;
};
SparseAvgGrads encode_paragraph_sparse_avg_backward(std::span<const SentenceEncoding> sentences,
                                                    const ArticleEncoding& enc,
                                                    std::span<const double> d_article,
                                                    bool normalized_word_scores = false);

// a^s_i = q^T tanh(A r_i + b); weights = sparsemax(a^s); r^a = sum_i w_i r_i.
ArticleEncoding encode_paragraph_general_attn(std::span<const double> query_vec,
                                              const std::vector<std::vector<double>>& sentence_vectors,
                                              const ModelParams& params,
                                              const GeneralAttentionParams& idx,
                                              GeneralAttnTrace* trace = nullptr);

struct GeneralAttnGrads {
  std::vector<double> d_query;
  std::vector<std::vector<double>> d_vectors;
};
GeneralAttnGrads encode_paragraph_general_attn_backward(
    std::span<const double> query_vec, const std::vector<std::vector<double>>& sentence_vectors,
    const ArticleEncoding& enc, const GeneralAttnTrace& trace, std::span<const double> d_article,
    const ModelParams& params, const GeneralAttentionParams& idx, ModelParams& grads);

double similarity_dot(std::span<const double> query_vec, std::span<const double> article_vec);

// Logit of the relevance classifier. `query_vec` is used only when the head
// was built with head_uses_query.
double classify_relevance(std::span<const double> article_vec, std::span<const double> query_vec,
                          const ModelParams& params, const HeadParams& idx, bool head_uses_query);

struct HeadGrads {
  std::vector<double> d_article;
  std::vector<double> d_query;  // empty unless head_uses_query
};
HeadGrads classify_relevance_backward(std::span<const double> article_vec,
                                      std::span<const double> query_vec, double d_logit,
                                      const ModelParams& params, const HeadParams& idx,
                                      bool head_uses_query, ModelParams& grads);

}  // namespace statret
