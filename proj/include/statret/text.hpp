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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace statret {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;

enum class ScriptKind { kSpaced, kNonSpaced };

struct LanguageProfile {
  ScriptKind script = ScriptKind::kSpaced;
  // Character n-gram width for non-spaced scripts.
  int ngram = 2;

  std::string name() const;
  static LanguageProfile from_name(std::string_view name);
};

// NFC-normalize and lowercase, then split. Spaced scripts split on Unicode
// whitespace and strip leading/trailing punctuation from each token.
// Non-spaced scripts emit code-point n-grams within each whitespace-free
// chunk (a chunk shorter than n becomes a single token).
std::vector<std::string> tokenize(std::string_view text,
                                  const LanguageProfile& profile);

// Splits on newlines and after sentence-final punctuation (. ! ? 。).
// Segments are trimmed; empty segments are dropped.
std::vector<std::string> split_sentences(std::string_view text);

class Vocabulary {
 public:
  Vocabulary();

  // Counts every token occurrence. Ids are assigned after PAD/UNK in
  // descending frequency, ties broken lexicographically.
  static Vocabulary build(const std::vector<std::vector<std::string>>& documents,
                          int min_frequency);
  static Vocabulary from_tokens(std::vector<std::string> id_to_token,
                                int min_frequency);

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;

  std::size_t size() const { return id_to_token_.size(); }
  int min_frequency() const { return min_frequency_; }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  // Stable content hash; checkpoints record it to detect mismatched corpora.
  std::string hash() const;

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
  int min_frequency_ = 2;
};

}  // namespace statret
