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

#include "statret/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>

#include "statret/error.hpp"
#include "statret/hash.hpp"

namespace statret {

std::string LanguageProfile::name() const {
  return script == ScriptKind::kSpaced ? "spaced"
                                       : "non-spaced:" + std::to_string(ngram);
}

LanguageProfile LanguageProfile::from_name(std::string_view name) {
  LanguageProfile p;
  if (name == "spaced") return p;
  if (name.starts_with("non-spaced")) {
    p.script = ScriptKind::kNonSpaced;
    auto colon = name.find(':');
    if (colon != std::string_view::npos) {
      try {
        p.ngram = std::stoi(std::string(name.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ValidationError("bad n-gram width in profile: " + std::string(name));
      }
      if (p.ngram < 1) throw ValidationError("n-gram width must be >= 1");
    }
    return p;
  }
  throw ValidationError("unknown language profile: " + std::string(name));
}

namespace {

icu::UnicodeString normalize_lower(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw InternalError("ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString out = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw ValidationError("text is not valid Unicode");
  out.toLower(icu::Locale::getRoot());
  // Lowercasing can denormalize a handful of code points.
  out = nfc->normalize(out, status);
  if (U_FAILURE(status)) throw ValidationError("text is not valid Unicode");
  return out;
}

std::string to_utf8(const std::vector<UChar32>& cps, std::size_t from,
                    std::size_t to) {
  icu::UnicodeString s;
  for (std::size_t i = from; i < to; ++i) s.append(cps[i]);
  std::string out;
  s.toUTF8String(out);
  return out;
}

// Whitespace-separated chunks as code-point sequences.
std::vector<std::vector<UChar32>> chunks(const icu::UnicodeString& s) {
  std::vector<std::vector<UChar32>> out;
  std::vector<UChar32> cur;
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text,
                                  const LanguageProfile& profile) {
  std::vector<std::string> tokens;
  for (const auto& chunk : chunks(normalize_lower(text))) {
    if (profile.script == ScriptKind::kSpaced) {
      std::size_t lo = 0, hi = chunk.size();
      while (lo < hi && u_ispunct(chunk[lo])) ++lo;
      while (hi > lo && u_ispunct(chunk[hi - 1])) --hi;
      if (lo < hi) tokens.push_back(to_utf8(chunk, lo, hi));
      continue;
    }
    const auto n = static_cast<std::size_t>(profile.ngram);
    if (chunk.size() <= n) {
      tokens.push_back(to_utf8(chunk, 0, chunk.size()));
      continue;
    }
    for (std::size_t i = 0; i + n <= chunk.size(); ++i)
      tokens.push_back(to_utf8(chunk, i, i + n));
  }
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto flush = [&out](std::string_view seg) {
    constexpr std::string_view ws = " \t\r\f\v";
    auto b = seg.find_first_not_of(ws);
    if (b == std::string_view::npos) return;
    auto e = seg.find_last_not_of(ws);
    out.emplace_back(seg.substr(b, e - b + 1));
  };
  static constexpr std::string_view kCjkStop = "\xE3\x80\x82";  // U+3002
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '\n') {
      flush(text.substr(start, i - start));
      start = ++i;
    } else if (c == '.' || c == '!' || c == '?') {
      flush(text.substr(start, i + 1 - start));
      start = ++i;
    } else if (text.substr(i).starts_with(kCjkStop)) {
      i += kCjkStop.size();
      flush(text.substr(start, i - start));
      start = i;
    } else {
      ++i;
    }
  }
  flush(text.substr(start));
  return out;
}

Vocabulary::Vocabulary() : id_to_token_{"<pad>", "<unk>"} {}

Vocabulary Vocabulary::build(
    const std::vector<std::vector<std::string>>& documents, int min_frequency) {
  if (documents.empty()) throw ValidationError("cannot build vocabulary: empty corpus");
  if (min_frequency < 1) throw ValidationError("min_frequency must be >= 1");
  std::map<std::string, long> counts;
  for (const auto& doc : documents)
    for (const auto& tok : doc) ++counts[tok];
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [tok, n] : counts)
    if (n >= min_frequency) kept.emplace_back(tok, n);
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;  // map order already lexicographic
  });
  std::vector<std::string> ids{"<pad>", "<unk>"};
  for (auto& [tok, n] : kept) ids.push_back(tok);
  return from_tokens(std::move(ids), min_frequency);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> id_to_token,
                                   int min_frequency) {
  if (id_to_token.size() < 2)
    throw ValidationError("vocabulary must contain PAD and UNK");
  Vocabulary v;
  v.id_to_token_ = std::move(id_to_token);
  v.min_frequency_ = min_frequency;
  for (std::size_t i = 2; i < v.id_to_token_.size(); ++i) {
    auto [it, inserted] =
        v.token_to_id_.emplace(v.id_to_token_[i], static_cast<TokenId>(i));
    if (!inserted) throw ValidationError("duplicate vocabulary token: " + it->first);
  }
  return v;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    throw ValidationError("token id out of range: " + std::to_string(id));
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::string Vocabulary::hash() const {
  std::string joined;
  for (const auto& t : id_to_token_) {
    joined += t;
    joined.push_back('\0');
  }
  return sha256_hex(joined);
}

}  // namespace statret
