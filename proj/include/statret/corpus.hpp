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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "statret/text.hpp"

namespace statret {

// Dense article handle. Articles are stored sorted by (law_id, article_id),
// so ordering refs numerically equals ordering them by "law_id:article_id".
using ArticleRef = std::uint32_t;

struct Sentence {
  std::size_t index = 0;
  std::vector<std::string> tokens;
  std::vector<TokenId> token_ids;
};

struct Article {
  std::string law_id;
  std::string article_id;
  std::string title;
  std::string raw_text;
  std::vector<Sentence> sentences;

  std::string ref_string() const { return law_id + ":" + article_id; }
  std::size_t token_count() const;
};

struct IngestOptions {
  LanguageProfile profile;
  int min_frequency = 2;
  std::size_t max_sentences = 256;
};

struct IngestReport {
  std::size_t documents = 0;  // distinct law_id values
  std::size_t articles = 0;
  std::size_t sentences = 0;
  std::size_t duplicate_lines = 0;
  std::size_t truncated_articles = 0;
  std::vector<std::string> warnings;
};

class CorpusStore {
 public:
  static constexpr int kFormatVersion = 1;

  // Parses corpus JSONL (one article per line). Errors carry 1-based line
  // numbers. Byte-identical repeated lines are collapsed; the same
  // (law_id, article_id) with different content is an error.
  static CorpusStore ingest_jsonl(std::string_view jsonl, const IngestOptions& options);
  static CorpusStore ingest_file(const std::string& path, const IngestOptions& options);

  static CorpusStore from_json(std::string_view json);
  std::string to_json() const;
  static CorpusStore load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<Article>& articles() const { return articles_; }
  const Article& article(ArticleRef ref) const;
  std::size_t size() const { return articles_.size(); }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const LanguageProfile& profile() const { return profile_; }
  const IngestReport& report() const { return report_; }

  std::optional<ArticleRef> find(std::string_view law_id, std::string_view article_id) const;
  // Accepts "law_id:article_id" (split at the first colon).
  std::optional<ArticleRef> find_ref(std::string_view ref) const;
  std::string ref_string(ArticleRef ref) const { return article(ref).ref_string(); }

 private:
  LanguageProfile profile_;
  Vocabulary vocabulary_;
  std::vector<Article> articles_;
  std::map<std::pair<std::string, std::string>, ArticleRef> lookup_;
  IngestReport report_;

  void rebuild_lookup();
};

struct Query {
  std::string query_id;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<TokenId> token_ids;
  // Ground truth as "law_id:article_id" strings, in file order.
  std::vector<std::string> relevant;
  // Resolved against a corpus when one was supplied at load time.
  std::vector<ArticleRef> relevant_refs;
};

struct QuerySet {
  std::vector<Query> queries;
  // Fraction of query tokens mapped to UNK (0 when no corpus was supplied).
  double unk_rate = 0.0;

  // With a corpus: tokenizes with its profile, encodes with its vocabulary
  // and requires every relevant pair to resolve. Without one: judgments only.
  static QuerySet parse_jsonl(std::string_view jsonl, const CorpusStore* corpus);
  static QuerySet load(const std::string& path, const CorpusStore* corpus);

  const Query* find(std::string_view query_id) const;
};

// Builds a Query from free text (no judgments), e.g. for `explain`.
Query make_query(std::string query_id, std::string text, const CorpusStore& corpus);

}  // namespace statret
