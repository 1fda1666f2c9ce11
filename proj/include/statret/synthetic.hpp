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
#include <optional>
#include <string>
#include <vector>

namespace statret {

// Synthetic statute corpus. Every query has one gold article. A query names
// one concept in its colloquial form plus two context words. Articles state
// one concept (colloquial or legal form) next to two context words drawn
// from a shared pool. For a `synonym_rate` share of queries the gold article
// states the concept only in legal form and shares one context word, while a
// distractor article repeats both context words around another concept.
struct SyntheticConfig {
  std::size_t articles = 200;
  std::size_t queries = 100;
  std::uint64_t seed = 7;
  double synonym_rate = 0.5;
  std::size_t concepts = 0;       // 0 = max(4, queries / 25)
  std::size_t context_words = 0;  // 0 = max(60, 3 * articles / 2)
  double test_fraction = 0.2;
  double valid_fraction = 0.1;  // of all queries, carved from the non-test part
};

struct SyntheticQueryInfo {
  std::string query_id;
  std::string gold;                       // "law_id:article_id"
  std::optional<std::string> distractor;  // synonym queries only
  bool synonym = false;
  std::string split;  // train | valid | test
  std::vector<std::string> concepts;
};

struct SyntheticData {
  std::string corpus_jsonl;
  std::string queries_jsonl;  // every query
  std::string train_jsonl;
  std::string valid_jsonl;
  std::string test_jsonl;
  std::vector<SyntheticQueryInfo> info;

  std::string map_json() const;
};

SyntheticData generate_synthetic(const SyntheticConfig& config);

}  // namespace statret
