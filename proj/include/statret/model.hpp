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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "statret/corpus.hpp"
#include "statret/encoders.hpp"

namespace statret {

enum class ModelKind {
  kCnnDot,           // sparse-average article encoder, dot-product similarity
  kGeneralAttnHead,  // query-conditioned article encoder, classifier head
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct ModelConfig {
  ModelKind kind = ModelKind::kCnnDot;
  EncoderConfig encoder;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Query-independent parts of an article's encoding, computed once per
// article in evaluation mode.
struct PrecomputedArticle {
  std::vector<SentenceEncoding> sentences;
  std::vector<std::vector<double>> sentence_vectors;
  ArticleEncoding sparse_avg;  // filled for kCnnDot only
};

class Model {
 public:
  static constexpr int kFormatVersion = 1;

  static Model create(ModelConfig config, const Vocabulary& vocab, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  const std::string& vocab_hash() const { return vocab_hash_; }
  ParagraphMode paragraph_mode() const;
  void check_vocabulary(const Vocabulary& vocab) const;

  std::vector<double> encode_query(std::span<const TokenId> ids) const;
  PrecomputedArticle precompute(const Article& article) const;
  ArticleEncoding encode_article(std::span<const double> query_vec,
                                 const PrecomputedArticle& article) const;
  // Similarity for kCnnDot, classifier logit for kGeneralAttnHead.
  double score(std::span<const double> query_vec, const PrecomputedArticle& article) const;

  // Loss for one query against candidates (articles[0] is the positive).
  // kCnnDot: -log softmax over dot scores. kGeneralAttnHead: summed binary
  // cross-entropy with label 1 for articles[0], 0 for the rest.
  // With `grads` set, accumulates parameter gradients into it; `grads` may
  // be this model's own params. `dropout_rng` enables dropout.
  double group_loss(std::span<const TokenId> query, std::span<const Article* const> articles,
                    Rng* dropout_rng, ModelParams* grads) const;

  // Same, against explicit params (used by gradient checks).
  static double group_loss(const ModelConfig& config, const ModelParams& params,
                           std::span<const TokenId> query, std::span<const Article* const> articles,
                           Rng* dropout_rng, ModelParams* grads);

  nlohmann::json& metadata() { return metadata_; }
  const nlohmann::json& metadata() const { return metadata_; }

  std::string to_json() const;
  static Model from_json(std::string_view json);
  static Model load(const std::string& path);
  void save(const std::string& path) const;

 private:
  ModelConfig config_;
  ModelParams params_;
  std::string vocab_hash_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

// Published hyperparameters of the attentive CNN reranker.
inline ModelConfig reference_cnn_config(ModelKind kind = ModelKind::kCnnDot) {
  ModelConfig c;
  c.kind = kind;
  c.encoder.embed_dim = 512;
  c.encoder.filters = 512;
  c.encoder.attention_dim = 200;
  c.encoder.dropout = 0.2;
  return c;
}

// Published settings of the pretrained transformer sentence encoder. Kept for
// reference only: the library ships the CNN sentence encoder.
struct TransformerProfile {
  std::size_t max_position_embeddings = 514;
  std::size_t hidden_size = 768;
  std::size_t hidden_layers = 12;
  std::size_t attention_heads = 12;
  double dropout = 0.1;
};

}  // namespace statret
