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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statret/bm25.hpp"
#include "statret/corpus.hpp"
#include "statret/model.hpp"

namespace statret {

enum class Normalization { kMinMax, kZScore, kNone };

std::string to_string(Normalization n);
Normalization normalization_from_string(std::string_view name);

struct PipelineConfig {
  std::size_t n_filter = 150;
  double alpha_fuse = 0.5;
  std::size_t top_k = 20;
  Normalization normalization = Normalization::kMinMax;

  void validate() const;
};

// Default lexical filter depth per model kind.
std::size_t default_n_filter(ModelKind kind);

struct RankedArticle {
  ArticleRef ref;
  double s_lexical;
  double s_deep;
  double s_final;
  std::size_t rank;
};

struct RetrievalResult {
  std::string query_id;
  std::vector<RankedArticle> ranked;
  bool no_lexical_match = false;
  std::size_t candidate_count = 0;
  // Fraction of judged articles inside the lexical candidate set (the best
  // recall reranking can reach); empty when the query has no judgments.
  std::optional<double> recall_ceiling;
};

// Per-query scaling over the candidate set. minmax maps to [0,1] and a
// constant set to 0.5; zscore maps a constant set to 0.
std::vector<double> normalize_scores(std::span<const double> scores, Normalization n);

// alpha * norm(deep) + (1 - alpha) * norm(lexical), elementwise.
std::vector<double> fuse_scores(std::span<const double> lexical, std::span<const double> deep,
                                double alpha_fuse, Normalization n);

// Sorts by (s_final desc, ref asc) and assigns 1-based ranks.
void rank_articles(std::vector<RankedArticle>& articles);

struct SweepRow {
  double alpha_fuse;
  double macro_f2_at_1;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double best_alpha = 0.0;
  double best_macro_f2_at_1 = 0.0;

  std::string to_tsv() const;
};

struct AttentionExplanation {
  std::string query_id;
  std::string query_text;
  std::string article_ref;
  ParagraphMode mode = ParagraphMode::kSparseAvg;
  bool query_independent = true;
  std::vector<double> sentence_weights;
  std::vector<double> sentence_scores;
  std::vector<std::vector<std::string>> sentence_tokens;
  std::vector<std::vector<double>> word_weights;

  std::string to_json() const;
  // Standalone page; darker highlight = larger weight.
  std::string to_html() const;
};

// Two-stage retrieval over an immutable corpus/index/model. `model` may be
// null, in which case deep scores are 0 and only alpha_fuse = 0 is allowed.
class Retriever {
 public:
  Retriever(const CorpusStore& corpus, const InvertedIndex& index, const Model* model,
            std::size_t threads = 1);

  RetrievalResult retrieve(const Query& query, const PipelineConfig& config);
  std::vector<RetrievalResult> retrieve_all(const QuerySet& queries, const PipelineConfig& config);

  // Evaluates Macro-F2@1 for alpha in {0, step, ..., 1}; ties go to the
  // smaller alpha. Only n_filter and normalization of `base` are used.
  SweepResult sweep_alpha(const QuerySet& queries, double grid_step, const PipelineConfig& base);

  // Macro-F2@1 over judged queries for one config.
  double macro_f2_at_1(const QuerySet& queries, const PipelineConfig& config);

  AttentionExplanation explain(const Query& query, ArticleRef ref);

 private:
  struct Scored {
    LexicalCandidates lexical;
    std::vector<double> deep;
  };

  const CorpusStore& corpus_;
  const InvertedIndex& index_;
  const Model* model_;
  std::size_t threads_;
  std::vector<std::optional<PrecomputedArticle>> cache_;

  Scored score_candidates(const Query& query, std::size_t n_filter);
  std::vector<Scored> score_all(const QuerySet& queries, std::size_t n_filter);
  void warm(std::span<const ArticleRef> refs);
  RetrievalResult finish(const Query& query, const Scored& scored, const PipelineConfig& config) const;
};

}  // namespace statret
