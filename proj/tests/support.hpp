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

// Brute-force oracles and small fixtures shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "statret/bm25.hpp"
#include "statret/gradcheck.hpp"
#include "statret/corpus.hpp"
#include "statret/metrics.hpp"
#include "statret/model.hpp"
#include "statret/synthetic.hpp"

namespace statret::testing {

// Euclidean projection onto the simplex by enumerating every support set.
// For a support S the threshold is tau = (sum_S z - 1) / |S|; the valid
// support keeps z_i > tau inside S and z_j <= tau outside.
inline std::vector<double> sparsemax_oracle(const std::vector<double>& z) {
  const std::size_t n = z.size();
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) sum += z[i], ++k;
    const double tau = (sum - 1.0) / static_cast<double>(k);
    std::vector<double> p(n, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        p[i] = z[i] - tau;
        if (p[i] < 0.0) feasible = false;
      } else if (z[i] > tau) {
        feasible = false;
      }
    }
    if (!feasible) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist += (p[i] - z[i]) * (p[i] - z[i]);
    if (dist < best_dist) best_dist = dist, best = p;
  }
  return best;
}

// BM25 scored document by document from raw token lists.
struct Bm25Oracle {
  std::vector<std::vector<std::string>> docs;
  double k1 = 1.2, b = 0.75;

  double score(const std::vector<std::string>& query, std::size_t d) const {
    const double n = static_cast<double>(docs.size());
    double avgdl = 0.0;
    for (const auto& doc : docs) avgdl += static_cast<double>(doc.size());
    avgdl /= n;
    double total = 0.0;
    for (const auto& t : query) {
      double df = 0.0;
      for (const auto& doc : docs) df += std::count(doc.begin(), doc.end(), t) > 0 ? 1.0 : 0.0;
      const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
      if (tf == 0.0) continue;
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double dl = static_cast<double>(docs[d].size());
      total += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
    }
    return total;
  }

  // (doc, score) pairs with positive score, best first, ties by doc index.
  std::vector<std::pair<std::size_t, double>> rank(const std::vector<std::string>& query) const {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const double s = score(query, d);
      if (s > 0.0) out.emplace_back(d, s);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    return out;
  }
};

// Per-query metrics straight from their definitions.
struct MetricOracle {
  double precision, recall, f2, ndcg;
};

inline MetricOracle metric_oracle(const std::vector<std::string>& run,
                                  const std::vector<std::string>& relevant, std::size_t k) {
  const std::set<std::string> rel(relevant.begin(), relevant.end());
  const std::size_t depth = std::min(k, run.size());
  double hits = 0.0, dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (rel.count(run[i])) {
      hits += 1.0;
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, rel.size()); ++i)
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  MetricOracle m{};
  m.precision = hits / static_cast<double>(k);
  m.recall = rel.empty() ? 0.0 : hits / static_cast<double>(rel.size());
  const double beta2 = 4.0;
  const double denom = beta2 * m.precision + m.recall;
  m.f2 = denom == 0.0 ? 0.0 : (1.0 + beta2) * m.precision * m.recall / denom;
  m.ndcg = idcg == 0.0 ? 0.0 : dcg / idcg;
  return m;
}

// A tiny vocabulary and hand-built articles for gradient checks.
inline Vocabulary tiny_vocabulary(std::size_t words) {
  std::vector<std::string> tokens{"<pad>", "<unk>"};
  for (std::size_t i = 0; i < words; ++i) tokens.push_back("w" + std::to_string(i));
  return Vocabulary::from_tokens(tokens, 1);
}

inline Article make_article(std::vector<std::vector<TokenId>> sentences) {
  Article a;
  a.law_id = "L";
  a.article_id = "1";
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Sentence s;
    s.index = i;
    s.token_ids = sentences[i];
    for (TokenId id : s.token_ids) s.tokens.push_back("w" + std::to_string(id));
    a.sentences.push_back(std::move(s));
  }
  return a;
}

inline ModelConfig tiny_config(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  c.encoder.embed_dim = 4;
  c.encoder.filters = 4;
  c.encoder.attention_dim = 3;
  c.encoder.half_window = 1;
  c.encoder.dropout = 0.0;
  return c;
}

// Group loss of one query against a positive and negatives, written in the
// shape check_gradients expects. With flip_param set, the gradient of that
// tensor is negated after the backward pass.
inline LossFn group_loss_fn(const ModelConfig& config, std::vector<TokenId> query,
                            std::vector<Article> articles, std::string flip_param = "") {
  return [config, query = std::move(query), articles = std::move(articles),
          flip_param](ModelParams& params, bool with_grad) {
    std::vector<const Article*> ptrs;
    for (const auto& a : articles) ptrs.push_back(&a);
    const double loss =
        Model::group_loss(config, params, query, ptrs, nullptr, with_grad ? &params : nullptr);
    if (with_grad && !flip_param.empty())
      for (double& g : params.get(flip_param).tensor.grad) g = -g;
    return loss;
  };
}

// A synthetic corpus loaded in memory.
struct SyntheticFixture {
  SyntheticData data;
  CorpusStore corpus;
  InvertedIndex index;
  QuerySet all, train, valid, test;

  explicit SyntheticFixture(SyntheticConfig cfg)
      : data(generate_synthetic(cfg)),
        corpus(CorpusStore::ingest_jsonl(data.corpus_jsonl, IngestOptions{})),
        index(InvertedIndex::build(corpus)),
        all(QuerySet::parse_jsonl(data.queries_jsonl, &corpus)),
        train(QuerySet::parse_jsonl(data.train_jsonl, &corpus)),
        valid(QuerySet::parse_jsonl(data.valid_jsonl, &corpus)),
        test(QuerySet::parse_jsonl(data.test_jsonl, &corpus)) {}
};

}  // namespace statret::testing
