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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statret/bm25.hpp"
#include "statret/corpus.hpp"
#include "statret/model.hpp"
#include "statret/pipeline.hpp"

namespace statret {

enum class NegativeSource { kLexical, kRandom };

struct TrainingInstance {
  std::string query_id;
  std::string query_text;
  std::vector<TokenId> query_token_ids;
  ArticleRef positive = 0;
  std::vector<ArticleRef> negatives;
  std::vector<NegativeSource> provenance;  // parallel to negatives
};

struct SamplingConfig {
  std::size_t n_neg = 4;
  // Fraction of negatives taken from the BM25 ranking; the rest are random.
  double lexical_random_mix = 0.5;
  // Depth of the BM25 ranking lexical negatives are drawn from.
  std::size_t lexical_pool = 1000;
  std::uint64_t seed = 0;
};

// One instance per (query, positive article). Lexical negatives follow BM25
// rank order skipping every positive of the query; random negatives are
// uniform over the rest of the corpus.
std::vector<TrainingInstance> build_training_set(const QuerySet& queries, const CorpusStore& corpus,
                                                 const InvertedIndex& index,
                                                 const SamplingConfig& config);

std::string training_set_to_json(std::span<const TrainingInstance> instances,
                                 const CorpusStore& corpus, const SamplingConfig& config);
std::vector<TrainingInstance> training_set_from_json(std::string_view json,
                                                     const CorpusStore& corpus);

struct SoftmaxLoss {
  double loss = 0.0;
  double d_positive = 0.0;
  std::vector<double> d_negatives;
};

// -log( e^pos / (e^pos + sum_j e^neg_j) ), max-subtracted.
SoftmaxLoss loss_similarity_softmax(double positive, std::span<const double> negatives);

// Binary cross-entropy of sigmoid(logit) against label in {0, 1}.
double loss_binary_head(double logit, int label);

struct OptimConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  std::size_t n_neg = 4;
  double lexical_random_mix = 0.5;

  void validate() const;
};

struct TrainConfig {
  ModelConfig model;
  OptimConfig optim;
  // Lexical filter and normalization used by per-epoch validation.
  PipelineConfig validation;
  std::size_t threads = 1;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean instance loss over the epoch
  double val_macro_f2_at_1 = 0.0;
};

struct TrainResult {
  Model model;  // parameters from the best validation epoch
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) on trainable tensors.
class AdamOptimizer {
 public:
  AdamOptimizer(const ModelParams& params, double learning_rate);
  // Applies one update from the grad buffers of `grads` (same layout as params).
  void step(ModelParams& params, const ModelParams& grads, double grad_scale);

 private:
  double lr_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Trains from `initial` (or a freshly initialized model when null). After
// every epoch the full two-stage pipeline at alpha_fuse = 1 is scored on the
// validation queries by Macro-F2@1; the best epoch is kept and training
// stops after `patience` epochs without strict improvement.
TrainResult train(const TrainConfig& config, std::span<const TrainingInstance> training_set,
                  const QuerySet& validation, const CorpusStore& corpus,
                  const InvertedIndex& index, const Model* initial = nullptr,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

std::string epoch_log_line(const EpochLog& log);

}  // namespace statret
