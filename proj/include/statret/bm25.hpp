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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "statret/corpus.hpp"

namespace statret {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Okapi BM25 with the +1-smoothed IDF, which is positive for every df <= N.
inline double bm25_idf(std::size_t doc_count, std::size_t doc_frequency) {
  const double n = static_cast<double>(doc_count);
  const double df = static_cast<double>(doc_frequency);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

inline double bm25_term_score(double idf, double tf, double doc_length,
                              double avg_doc_length, const Bm25Params& p) {
  const double norm = p.k1 * (1.0 - p.b + p.b * doc_length / avg_doc_length);
  return idf * tf * (p.k1 + 1.0) / (tf + norm);
}

struct Posting {
  ArticleRef ref;
  std::uint32_t term_frequency;
};

struct CandidateScore {
  ArticleRef ref;
  double lexical_score;
  std::size_t rank;  // 1-based
};

struct LexicalCandidates {
  std::vector<CandidateScore> candidates;
  // Set when no article shares a single query term.
  bool no_lexical_match = false;
};

// A document for index construction: its ref and its token strings.
struct IndexDocument {
  ArticleRef ref;
  std::vector<std::string> tokens;
};

// Inverted index over token strings (not vocabulary ids), so rare terms that
// the neural vocabulary folds into UNK stay distinct for lexical matching.
class InvertedIndex {
 public:
  static constexpr int kFormatVersion = 1;

  static InvertedIndex build(const CorpusStore& corpus, Bm25Params params = {});
  static InvertedIndex build(std::span<const IndexDocument> docs, Bm25Params params = {});

  // Sums the per-term contribution over query tokens in order; repeated
  // query tokens count once per occurrence.
  double score(std::span<const std::string> query_tokens, ArticleRef ref) const;

  // Articles with a positive score, best first; ties by ascending ref.
  LexicalCandidates top_n(std::span<const std::string> query_tokens, std::size_t n) const;

  std::optional<std::uint32_t> term_id(std::string_view term) const;
  std::size_t doc_frequency(std::string_view term) const;
  std::span<const Posting> postings(std::string_view term) const;
  std::size_t doc_length(ArticleRef ref) const;
  double avg_doc_length() const { return avg_doc_length_; }
  std::size_t doc_count() const { return doc_count_; }
  std::size_t term_count() const { return terms_.size(); }
  const Bm25Params& params() const { return params_; }
  // Identifies the corpus the index was built from.
  const std::string& corpus_fingerprint() const { return fingerprint_; }

  std::string to_json() const;
  static InvertedIndex from_json(std::string_view json);
  static InvertedIndex load(const std::string& path);
  void save(const std::string& path) const;

  // Fails unless the index was built from this corpus.
  void check_compatible(const CorpusStore& corpus) const;

 private:
  Bm25Params params_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<std::vector<Posting>> postings_;
  // Indexed by ArticleRef; refs not present in the build have length 0 and
  // are flagged absent.
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<bool> present_;
  std::size_t doc_count_ = 0;
  double avg_doc_length_ = 0.0;
  std::string fingerprint_;

  void rebuild_term_ids();
};

std::string corpus_fingerprint(const CorpusStore& corpus);

}  // namespace statret
