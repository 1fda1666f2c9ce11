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

#include "statret/model.hpp"

#include "statret/error.hpp"
#include "statret/hash.hpp"

namespace statret {

using nlohmann::json;

namespace {
constexpr std::string_view kCheckpointFormat = "statret-checkpoint";
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kCnnDot ? "cnn_dot" : "general_attn_head";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "cnn_dot") return ModelKind::kCnnDot;
  if (name == "general_attn_head") return ModelKind::kGeneralAttnHead;
  throw ValidationError("unknown model kind: " + std::string(name));
}

json ModelConfig::to_json() const {
  return {{"model_kind", to_string(kind)},
          {"vocab_size", encoder.vocab_size},
          {"embed_dim", encoder.embed_dim},
          {"filters", encoder.filters},
          {"half_window", encoder.half_window},
          {"attention_dim", encoder.attention_dim},
          {"dropout", encoder.dropout},
          {"normalized_word_scores", encoder.normalized_word_scores},
          {"head_uses_query", encoder.head_uses_query}};
}

ModelConfig ModelConfig::from_json(const json& j) {
  try {
    ModelConfig c;
    c.kind = model_kind_from_string(j.at("model_kind").get<std::string>());
    c.encoder.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.encoder.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.encoder.filters = j.at("filters").get<std::size_t>();
    c.encoder.half_window = j.at("half_window").get<std::size_t>();
    c.encoder.attention_dim = j.at("attention_dim").get<std::size_t>();
    c.encoder.dropout = j.at("dropout").get<double>();
    c.encoder.normalized_word_scores = j.at("normalized_word_scores").get<bool>();
    c.encoder.head_uses_query = j.at("head_uses_query").get<bool>();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model config: ") + e.what());
  }
}

Model Model::create(ModelConfig config, const Vocabulary& vocab, std::uint64_t seed) {
  config.encoder.vocab_size = vocab.size();
  if (config.encoder.dropout < 0.0 || config.encoder.dropout >= 1.0)
    throw ValidationError("dropout must be in [0, 1)");
  Model m;
  m.config_ = config;
  m.vocab_hash_ = vocab.hash();
  Rng rng(seed);
  CnnEncoderParams::add(m.params_, config.encoder, rng);
  if (config.kind == ModelKind::kGeneralAttnHead) {
    GeneralAttentionParams::add(m.params_, config.encoder.filters, rng);
    const std::size_t head_in = config.encoder.filters * (config.encoder.head_uses_query ? 2 : 1);
    HeadParams::add(m.params_, head_in, rng);
  }
  return m;
}

ParagraphMode Model::paragraph_mode() const {
  return config_.kind == ModelKind::kCnnDot ? ParagraphMode::kSparseAvg
                                            : ParagraphMode::kGeneralAttn;
}

void Model::check_vocabulary(const Vocabulary& vocab) const {
  if (vocab.hash() != vocab_hash_)
    throw ValidationError("checkpoint vocabulary hash does not match the corpus vocabulary");
}

std::vector<double> Model::encode_query(std::span<const TokenId> ids) const {
  if (ids.empty()) throw ValidationError("query has no tokens");
  return encode_sentence_cnn(ids, params_, CnnEncoderParams::resolve(params_), config_.encoder)
      .vector;
}

PrecomputedArticle Model::precompute(const Article& article) const {
  const auto idx = CnnEncoderParams::resolve(params_);
  PrecomputedArticle pre;
  for (const auto& s : article.sentences) {
    pre.sentences.push_back(encode_sentence_cnn(s.token_ids, params_, idx, config_.encoder));
    pre.sentence_vectors.push_back(pre.sentences.back().vector);
  }
  if (config_.kind == ModelKind::kCnnDot)
    pre.sparse_avg =
        encode_paragraph_sparse_avg(pre.sentences, config_.encoder.normalized_word_scores);
  return pre;
}

ArticleEncoding Model::encode_article(std::span<const double> query_vec,
                                      const PrecomputedArticle& article) const {
  if (config_.kind == ModelKind::kCnnDot) return article.sparse_avg;
  return encode_paragraph_general_attn(query_vec, article.sentence_vectors, params_,
                                       GeneralAttentionParams::resolve(params_));
}

double Model::score(std::span<const double> query_vec, const PrecomputedArticle& article) const {
  if (config_.kind == ModelKind::kCnnDot) return similarity_dot(query_vec, article.sparse_avg.vector);
  ArticleEncoding enc = encode_article(query_vec, article);
  return classify_relevance(enc.vector, query_vec, params_, HeadParams::resolve(params_),
                            config_.encoder.head_uses_query);
}

double Model::group_loss(std::span<const TokenId> query, std::span<const Article* const> articles,
                         Rng* dropout_rng, ModelParams* grads) const {
  return group_loss(config_, params_, query, articles, dropout_rng, grads);
}

double Model::group_loss(const ModelConfig& config, const ModelParams& params,
                         std::span<const TokenId> query, std::span<const Article* const> articles,
                         Rng* dropout_rng, ModelParams* grads) {
  if (articles.size() < 2) throw ValidationError("group_loss needs a positive and >= 1 negative");
  const auto& ecfg = config.encoder;
  const auto cnn = CnnEncoderParams::resolve(params);
  const bool want_grad = grads != nullptr;

  SentenceTrace qtrace;
  const SentenceEncoding q =
      encode_sentence_cnn(query, params, cnn, ecfg, dropout_rng, want_grad ? &qtrace : nullptr);
  const std::size_t dim = q.vector.size();

  struct ArticleState {
    std::vector<SentenceTrace> traces;
    std::vector<SentenceEncoding> sentences;
    std::vector<std::vector<double>> vectors;
    ArticleEncoding enc;
    GeneralAttnTrace attn;
  };
  std::vector<ArticleState> states(articles.size());
  std::vector<double> outputs(articles.size());
  for (std::size_t k = 0; k < articles.size(); ++k) {
    auto& st = states[k];
    for (const auto& s : articles[k]->sentences) {
      SentenceTrace* tr = nullptr;
      if (want_grad) tr = &st.traces.emplace_back();
      st.sentences.push_back(encode_sentence_cnn(s.token_ids, params, cnn, ecfg, dropout_rng, tr));
      st.vectors.push_back(st.sentences.back().vector);
    }
    if (config.kind == ModelKind::kCnnDot) {
      st.enc = encode_paragraph_sparse_avg(st.sentences, ecfg.normalized_word_scores);
      outputs[k] = similarity_dot(q.vector, st.enc.vector);
    } else {
      st.enc = encode_paragraph_general_attn(q.vector, st.vectors, params,
                                             GeneralAttentionParams::resolve(params), &st.attn);
      outputs[k] = classify_relevance(st.enc.vector, q.vector, params, HeadParams::resolve(params),
                                      ecfg.head_uses_query);
    }
  }

  double loss = 0.0;
  std::vector<double> d_outputs(articles.size());
  if (config.kind == ModelKind::kCnnDot) {
    auto lg = ops::cross_entropy(outputs, 0);
    loss = lg.loss;
    d_outputs = std::move(lg.d_logits);
  } else {
    for (std::size_t k = 0; k < articles.size(); ++k) {
      auto lg = ops::binary_cross_entropy(outputs[k], k == 0 ? 1 : 0);
      loss += lg.loss;
      d_outputs[k] = lg.d_logits[0];
    }
  }
  if (!want_grad) return loss;

  std::vector<double> d_query(dim, 0.0);
  for (std::size_t k = 0; k < articles.size(); ++k) {
    auto& st = states[k];
    std::vector<double> d_article(dim);
    if (config.kind == ModelKind::kCnnDot) {
      for (std::size_t f = 0; f < dim; ++f) {
        d_query[f] += d_outputs[k] * st.enc.vector[f];
        d_article[f] = d_outputs[k] * q.vector[f];
      }
      auto g = encode_paragraph_sparse_avg_backward(st.sentences, st.enc, d_article,
                                                    ecfg.normalized_word_scores);
      for (std::size_t j = 0; j < st.traces.size(); ++j)
        encode_sentence_cnn_backward(st.traces[j], g.d_vectors[j], g.d_word_scores[j],
                                     g.d_word_weights[j], params, cnn, ecfg, *grads);
    } else {
      auto hg = classify_relevance_backward(st.enc.vector, q.vector, d_outputs[k], params,
                                            HeadParams::resolve(params), ecfg.head_uses_query,
                                            *grads);
      for (std::size_t f = 0; f < hg.d_query.size(); ++f) d_query[f] += hg.d_query[f];
      auto g = encode_paragraph_general_attn_backward(q.vector, st.vectors, st.enc, st.attn,
                                                      hg.d_article, params,
                                                      GeneralAttentionParams::resolve(params),
                                                      *grads);
      for (std::size_t f = 0; f < dim; ++f) d_query[f] += g.d_query[f];
      for (std::size_t j = 0; j < st.traces.size(); ++j)
        encode_sentence_cnn_backward(st.traces[j], g.d_vectors[j], {}, {}, params, cnn, ecfg,
                                     *grads);
    }
  }
  encode_sentence_cnn_backward(qtrace, d_query, {}, {}, params, cnn, ecfg, *grads);
  return loss;
}

std::string Model::to_json() const {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kFormatVersion;
  j["config"] = config_.to_json();
  j["vocab_hash"] = vocab_hash_;
  json ps = json::array();
  for (const auto& p : params_)
    ps.push_back({{"name", p.name},
                  {"shape", p.tensor.shape},
                  {"trainable", p.trainable},
                  {"values", p.tensor.values}});
  j["params"] = std::move(ps);
  j["metadata"] = metadata_;
  return j.dump();
}

Model Model::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat) throw ValidationError("not a checkpoint file");
  if (!j.contains("version") || j["version"] != kFormatVersion)
    throw ValidationError("unsupported checkpoint version");
  try {
    Model m;
    m.config_ = ModelConfig::from_json(j.at("config"));
    m.vocab_hash_ = j.at("vocab_hash").get<std::string>();
    for (const auto& jp : j.at("params")) {
      Tensor t = Tensor::from(jp.at("shape").get<std::vector<std::size_t>>(),
                              jp.at("values").get<std::vector<double>>());
      m.params_.add(jp.at("name").get<std::string>(), std::move(t), jp.at("trainable").get<bool>());
    }
    m.metadata_ = j.value("metadata", json::object());
    // Shape validation against the config.
    const auto& e = m.config_.encoder;
    const auto& emb = m.params_.get(param_name::kEmbedding).tensor;
    const auto& ker = m.params_.get(param_name::kConvKernel).tensor;
    if (emb.rows() != e.vocab_size || emb.cols() != e.embed_dim || ker.rows() != e.filters ||
        ker.cols() != (2 * e.half_window + 1) * e.embed_dim)
      throw ValidationError("checkpoint: tensor shapes do not match config");
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
}

Model Model::load(const std::string& path) { return from_json(read_file(path)); }

void Model::save(const std::string& path) const { write_file(path, to_json()); }

}  // namespace statret
