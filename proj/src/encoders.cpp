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

#include "statret/encoders.hpp"

#include <cmath>

#include "statret/error.hpp"

namespace statret {

namespace {

Tensor uniform(std::vector<std::size_t> shape, double limit, Rng& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : t.values) v = dist(rng);
  return t;
}

double xavier(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

std::span<double> grad_of(ModelParams& grads, std::size_t i) {
  auto& t = grads[i].tensor;
  t.ensure_grad();
  return t.grad;
}

}  // namespace

std::string to_string(ParagraphMode mode) {
  return mode == ParagraphMode::kSparseAvg ? "sparse_avg" : "general_attn";
}

CnnEncoderParams CnnEncoderParams::add(ModelParams& params, const EncoderConfig& cfg, Rng& rng) {
  if (cfg.vocab_size < 2 || cfg.embed_dim == 0 || cfg.filters == 0 || cfg.attention_dim == 0)
    throw ValidationError("encoder dimensions must be positive");
  const std::size_t width = (2 * cfg.half_window + 1) * cfg.embed_dim;
  CnnEncoderParams idx{};
  Tensor emb = uniform({cfg.vocab_size, cfg.embed_dim}, 0.5, rng);
  std::fill(emb.values.begin(), emb.values.begin() + static_cast<std::ptrdiff_t>(cfg.embed_dim), 0.0);
  idx.embedding = params.add(param_name::kEmbedding, std::move(emb));
  idx.kernel = params.add(param_name::kConvKernel,
                          uniform({cfg.filters, width}, xavier(width, cfg.filters), rng));
  idx.conv_bias = params.add(param_name::kConvBias, Tensor::vector(cfg.filters));
  idx.attn_weight = params.add(
      param_name::kWordAttnWeight,
      uniform({cfg.attention_dim, cfg.filters}, xavier(cfg.filters, cfg.attention_dim), rng));
  idx.attn_bias = params.add(param_name::kWordAttnBias, Tensor::vector(cfg.attention_dim));
  idx.attn_query = params.add(param_name::kWordAttnQuery,
                              uniform({cfg.attention_dim}, xavier(cfg.attention_dim, 1), rng));
  return idx;
}

CnnEncoderParams CnnEncoderParams::resolve(const ModelParams& params) {
  return {params.index_of(param_name::kEmbedding),     params.index_of(param_name::kConvKernel),
          params.index_of(param_name::kConvBias),      params.index_of(param_name::kWordAttnWeight),
          params.index_of(param_name::kWordAttnBias), params.index_of(param_name::kWordAttnQuery)};
}

GeneralAttentionParams GeneralAttentionParams::add(ModelParams& params, std::size_t dim, Rng& rng) {
  GeneralAttentionParams idx{};
  idx.weight = params.add(param_name::kParaAttnWeight, uniform({dim, dim}, xavier(dim, dim), rng));
  idx.bias = params.add(param_name::kParaAttnBias, Tensor::vector(1));
  return idx;
}

GeneralAttentionParams GeneralAttentionParams::resolve(const ModelParams& params) {
  return {params.index_of(param_name::kParaAttnWeight), params.index_of(param_name::kParaAttnBias)};
}

HeadParams HeadParams::add(ModelParams& params, std::size_t input_dim, Rng& rng) {
  HeadParams idx{};
  idx.weight = params.add(param_name::kHeadWeight, uniform({input_dim}, xavier(input_dim, 1), rng));
  idx.bias = params.add(param_name::kHeadBias, Tensor::vector(1));
  return idx;
}

HeadParams HeadParams::resolve(const ModelParams& params) {
  return {params.index_of(param_name::kHeadWeight), params.index_of(param_name::kHeadBias)};
}

SentenceEncoding encode_sentence_cnn(std::span<const TokenId> ids, const ModelParams& params,
                                     const CnnEncoderParams& idx, const EncoderConfig& cfg,
                                     Rng* dropout_rng, SentenceTrace* trace) {
  if (ids.empty()) throw ValidationError("encode_sentence_cnn: empty sentence");
  const Tensor& table = params[idx.embedding].tensor;
  Tensor emb = ops::embedding_lookup(table, ids);
  ops::DropoutMask mask;
  if (dropout_rng && cfg.dropout > 0.0) {
    mask = ops::make_dropout_mask(emb.size(), cfg.dropout, *dropout_rng);
    ops::apply_dropout(emb.values, mask);
  }
  ops::ConvOutput conv = ops::conv_context(emb, params[idx.kernel].tensor,
                                           params[idx.conv_bias].tensor.values, cfg.half_window);
  const std::size_t m = ids.size(), nf = conv.context.cols();
  const Tensor& attn_w = params[idx.attn_weight].tensor;
  const auto& attn_b = params[idx.attn_bias].tensor.values;
  const auto& attn_q = params[idx.attn_query].tensor.values;

  Tensor hidden = Tensor::matrix(m, attn_w.rows());
  SentenceEncoding out;
  out.word_scores.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto h = hidden.row(i);
    ops::affine(attn_w, attn_b, conv.context.row(i), h);
    ops::tanh_inplace(h);
    out.word_scores[i] = ops::dot(attn_q, h);
  }
  out.word_weights = ops::masked_softmax(out.word_scores);
  out.vector.assign(nf, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto c = conv.context.row(i);
    for (std::size_t f = 0; f < nf; ++f) out.vector[f] += out.word_weights[i] * c[f];
  }
  if (trace) {
    trace->ids.assign(ids.begin(), ids.end());
    trace->dropout = std::move(mask);
    trace->conv = std::move(conv);
    trace->hidden = std::move(hidden);
    trace->out = out;
  }
  return out;
}

void encode_sentence_cnn_backward(const SentenceTrace& trace, std::span<const double> d_vector,
                                  std::span<const double> d_word_scores,
                                  std::span<const double> d_word_weights,
                                  const ModelParams& params, const CnnEncoderParams& idx,
                                  const EncoderConfig& cfg, ModelParams& grads) {
  const auto& ctx = trace.conv.context;
  const std::size_t m = ctx.rows(), nf = ctx.cols();
  const auto& alpha = trace.out.word_weights;

  Tensor d_ctx = Tensor::matrix(m, nf);
  std::vector<double> d_alpha(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto c = ctx.row(i);
    auto dc = d_ctx.row(i);
    if (!d_vector.empty()) {
      for (std::size_t f = 0; f < nf; ++f) dc[f] = alpha[i] * d_vector[f];
      d_alpha[i] = ops::dot(c, d_vector);
    }
    if (!d_word_weights.empty()) d_alpha[i] += d_word_weights[i];
  }
  std::vector<double> d_scores = ops::softmax_backward(alpha, d_alpha);
  if (!d_word_scores.empty())
    for (std::size_t i = 0; i < m; ++i) d_scores[i] += d_word_scores[i];

  const Tensor& attn_w = params[idx.attn_weight].tensor;
  const auto& attn_q = params[idx.attn_query].tensor.values;
  auto g_attn_w = grad_of(grads, idx.attn_weight);
  auto g_attn_b = grad_of(grads, idx.attn_bias);
  auto g_attn_q = grad_of(grads, idx.attn_query);
  const std::size_t da = attn_w.rows();
  std::vector<double> d_hidden(da), d_pre(da);
  for (std::size_t i = 0; i < m; ++i) {
    if (d_scores[i] == 0.0) continue;
    auto h = trace.hidden.row(i);
    for (std::size_t k = 0; k < da; ++k) {
      g_attn_q[k] += d_scores[i] * h[k];
      d_hidden[k] = d_scores[i] * attn_q[k];
    }
    ops::tanh_backward(h, d_hidden, d_pre);
    ops::affine_backward(attn_w, ctx.row(i), d_pre, g_attn_w, g_attn_b, d_ctx.row(i));
  }

  Tensor d_emb = ops::conv_context_backward(trace.conv, params[idx.kernel].tensor, d_ctx,
                                            cfg.half_window, cfg.embed_dim,
                                            grad_of(grads, idx.kernel), grad_of(grads, idx.conv_bias));
  if (!trace.dropout.scale.empty()) ops::apply_dropout(d_emb.values, trace.dropout);
  ops::embedding_backward(d_emb, trace.ids, cfg.embed_dim, grad_of(grads, idx.embedding));
}

namespace {
std::vector<double> sentence_scores(std::span<const SentenceEncoding> sentences, bool normalized) {
  std::vector<double> omega;
  omega.reserve(sentences.size());
  for (const auto& s : sentences) {
    const auto& w = normalized ? s.word_weights : s.word_scores;
    double sum = 0.0;
    for (double v : w) sum += v;
    omega.push_back(sum / static_cast<double>(w.size()));
  }
  return omega;
}

std::vector<double> weighted_sum(std::span<const double> weights,
                                 const auto& vectors, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] == 0.0) continue;
    const auto& v = vectors[j];
    for (std::size_t f = 0; f < dim; ++f) out[f] += weights[j] * v[f];
  }
  return out;
}
}  // namespace

ArticleEncoding encode_paragraph_sparse_avg(std::span<const SentenceEncoding> sentences,
                                            bool normalized_word_scores) {
  if (sentences.empty()) throw ValidationError("paragraph encoder: article has no sentences");
  ArticleEncoding enc;
  enc.mode = ParagraphMode::kSparseAvg;
  enc.sentence_scores = sentence_scores(sentences, normalized_word_scores);
  enc.sentence_weights = ops::sparsemax(enc.sentence_scores);
  std::vector<std::span<const double>> vecs;
  for (const auto& s : sentences) vecs.emplace_back(s.vector);
  enc.vector = weighted_sum(enc.sentence_weights, vecs, sentences.front().vector.size());
  return enc;
}

SparseAvgGrads encode_paragraph_sparse_avg_backward(std::span<const SentenceEncoding> sentences,
                                                    const ArticleEncoding& enc,
                                                    std::span<const double> d_article,
                                                    bool normalized_word_scores) {
  const std::size_t n = sentences.size();
  SparseAvgGrads g;
  std::vector<double> d_weights(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& r = sentences[j].vector;
    g.d_vectors.emplace_back(r.size());
    for (std::size_t f = 0; f < r.size(); ++f) g.d_vectors[j][f] = enc.sentence_weights[j] * d_article[f];
    d_weights[j] = ops::dot(r, d_article);
  }
  std::vector<double> d_omega = ops::sparsemax_backward(enc.sentence_weights, d_weights);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t m = sentences[j].word_scores.size();
    std::vector<double> per_word(m, d_omega[j] / static_cast<double>(m));
    if (normalized_word_scores) {
      g.d_word_scores.emplace_back();
      g.d_word_weights.push_back(std::move(per_word));
    } else {
      g.d_word_scores.push_back(std::move(per_word));
      g.d_word_weights.emplace_back();
    }
  }
  return g;
}

ArticleEncoding encode_paragraph_general_attn(std::span<const double> query_vec,
                                              const std::vector<std::vector<double>>& sentence_vectors,
                                              const ModelParams& params,
                                              const GeneralAttentionParams& idx,
                                              GeneralAttnTrace* trace) {
  if (sentence_vectors.empty()) throw ValidationError("paragraph encoder: article has no sentences");
  const Tensor& a = params[idx.weight].tensor;
  const double b = params[idx.bias].tensor.values[0];
  const std::size_t d = a.rows();
  if (query_vec.size() != d) throw ValidationError("general attention: query dimension mismatch");
  ArticleEncoding enc;
  enc.mode = ParagraphMode::kGeneralAttn;
  if (trace) trace->hidden.clear();
  for (const auto& r : sentence_vectors) {
    if (r.size() != a.cols()) throw ValidationError("general attention: sentence dimension mismatch");
    std::vector<double> h(d);
    ops::affine(a, {}, r, h);
    for (auto& v : h) v = std::tanh(v + b);
    enc.sentence_scores.push_back(ops::dot(query_vec, h));
    if (trace) trace->hidden.push_back(std::move(h));
  }
  enc.sentence_weights = ops::sparsemax(enc.sentence_scores);
  enc.vector = weighted_sum(enc.sentence_weights, sentence_vectors, sentence_vectors.front().size());
  return enc;
}

GeneralAttnGrads encode_paragraph_general_attn_backward(
    std::span<const double> query_vec, const std::vector<std::vector<double>>& sentence_vectors,
    const ArticleEncoding& enc, const GeneralAttnTrace& trace, std::span<const double> d_article,
    const ModelParams& params, const GeneralAttentionParams& idx, ModelParams& grads) {
  const Tensor& a = params[idx.weight].tensor;
  const std::size_t n = sentence_vectors.size(), d = a.rows();
  GeneralAttnGrads g;
  g.d_query.assign(query_vec.size(), 0.0);
  std::vector<double> d_weights(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& r = sentence_vectors[j];
    g.d_vectors.emplace_back(r.size());
    for (std::size_t f = 0; f < r.size(); ++f) g.d_vectors[j][f] = enc.sentence_weights[j] * d_article[f];
    d_weights[j] = ops::dot(r, d_article);
  }
  std::vector<double> d_scores = ops::sparsemax_backward(enc.sentence_weights, d_weights);
  auto g_a = grad_of(grads, idx.weight);
  auto g_b = grad_of(grads, idx.bias);
  std::vector<double> d_h(d), d_pre(d);
  for (std::size_t j = 0; j < n; ++j) {
    if (d_scores[j] == 0.0) continue;
    const auto& h = trace.hidden[j];
    for (std::size_t k = 0; k < d; ++k) {
      g.d_query[k] += d_scores[j] * h[k];
      d_h[k] = d_scores[j] * query_vec[k];
    }
    ops::tanh_backward(h, d_h, d_pre);
    for (double v : d_pre) g_b[0] += v;
    ops::affine_backward(a, sentence_vectors[j], d_pre, g_a, {}, g.d_vectors[j]);
  }
  return g;
}

double similarity_dot(std::span<const double> query_vec, std::span<const double> article_vec) {
  return ops::dot(query_vec, article_vec);
}

double classify_relevance(std::span<const double> article_vec, std::span<const double> query_vec,
                          const ModelParams& params, const HeadParams& idx, bool head_uses_query) {
  const auto& w = params[idx.weight].tensor.values;
  double logit = params[idx.bias].tensor.values[0];
  const std::size_t need = article_vec.size() + (head_uses_query ? query_vec.size() : 0);
  if (w.size() != need) throw ValidationError("classification head: input dimension mismatch");
  std::span<const double> wspan(w);
  if (head_uses_query) {
    logit += ops::dot(wspan.first(query_vec.size()), query_vec);
    wspan = wspan.subspan(query_vec.size());
  }
  return logit + ops::dot(wspan, article_vec);
}

HeadGrads classify_relevance_backward(std::span<const double> article_vec,
                                      std::span<const double> query_vec, double d_logit,
                                      const ModelParams& params, const HeadParams& idx,
                                      bool head_uses_query, ModelParams& grads) {
  const auto& w = params[idx.weight].tensor.values;
  auto g_w = grad_of(grads, idx.weight);
  grad_of(grads, idx.bias)[0] += d_logit;
  HeadGrads g;
  std::size_t offset = 0;
  if (head_uses_query) {
    g.d_query.resize(query_vec.size());
    for (std::size_t k = 0; k < query_vec.size(); ++k) {
      g_w[k] += d_logit * query_vec[k];
      g.d_query[k] = d_logit * w[k];
    }
    offset = query_vec.size();
  }
  g.d_article.resize(article_vec.size());
  for (std::size_t k = 0; k < article_vec.size(); ++k) {
    g_w[offset + k] += d_logit * article_vec[k];
    g.d_article[k] = d_logit * w[offset + k];
  }
  return g;
}

}  // namespace statret
