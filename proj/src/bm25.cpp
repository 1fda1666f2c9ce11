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

#include "statret/bm25.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "statret/error.hpp"
#include "statret/hash.hpp"

namespace statret {

using nlohmann::json;

namespace {
constexpr std::string_view kIndexFormat = "statret-index";
}

std::string corpus_fingerprint(const CorpusStore& corpus) {
  std::string joined = corpus.vocabulary().hash();
  for (const auto& a : corpus.articles()) {
    joined.push_back('\n');
    joined += a.ref_string();
    joined.push_back(' ');
    joined += std::to_string(a.token_count());
  }
  return sha256_hex(joined);
}

InvertedIndex InvertedIndex::build(const CorpusStore& corpus, Bm25Params params) {
  std::vector<IndexDocument> docs;
  docs.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    IndexDocument d{static_cast<ArticleRef>(i), {}};
    for (const auto& s : corpus.articles()[i].sentences)
      d.tokens.insert(d.tokens.end(), s.tokens.begin(), s.tokens.end());
    docs.push_back(std::move(d));
  }
  InvertedIndex index = build(docs, params);
  index.fingerprint_ = statret::corpus_fingerprint(corpus);
  return index;
}

InvertedIndex InvertedIndex::build(std::span<const IndexDocument> docs, Bm25Params params) {
  if (docs.empty()) throw ValidationError("cannot index an empty corpus");
  if (params.k1 < 0.0 || params.b < 0.0 || params.b > 1.0)
    throw ValidationError("BM25 parameters out of range (k1 >= 0, 0 <= b <= 1)");
  InvertedIndex index;
  index.params_ = params;

  ArticleRef max_ref = 0;
  for (const auto& d : docs) max_ref = std::max(max_ref, d.ref);
  index.doc_lengths_.assign(static_cast<std::size_t>(max_ref) + 1, 0);
  index.present_.assign(static_cast<std::size_t>(max_ref) + 1, false);

  std::map<std::string, std::map<ArticleRef, std::uint32_t>> tf;
  std::size_t total_len = 0;
  for (const auto& d : docs) {
    if (index.present_[d.ref])
      throw ValidationError("duplicate article ref #" + std::to_string(d.ref) + " in index build");
    index.present_[d.ref] = true;
    index.doc_lengths_[d.ref] = static_cast<std::uint32_t>(d.tokens.size());
    total_len += d.tokens.size();
    for (const auto& t : d.tokens) ++tf[t][d.ref];
  }
  index.doc_count_ = docs.size();
  index.avg_doc_length_ = static_cast<double>(total_len) / static_cast<double>(docs.size());
  if (index.avg_doc_length_ <= 0.0) throw ValidationError("cannot index documents with no tokens");

  for (auto& [term, per_doc] : tf) {
    index.terms_.push_back(term);
    std::vector<Posting> plist;
    plist.reserve(per_doc.size());
    for (auto [ref, n] : per_doc) plist.push_back({ref, n});
    index.postings_.push_back(std::move(plist));
  }
  index.rebuild_term_ids();
  return index;
}

void InvertedIndex::rebuild_term_ids() {
  term_ids_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i)
    term_ids_.emplace(terms_[i], static_cast<std::uint32_t>(i));
}

std::optional<std::uint32_t> InvertedIndex::term_id(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t InvertedIndex::doc_frequency(std::string_view term) const {
  auto id = term_id(term);
  return id ? postings_[*id].size() : 0;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  auto id = term_id(term);
  if (!id) return {};
  return postings_[*id];
}

std::size_t InvertedIndex::doc_length(ArticleRef ref) const {
  if (ref >= present_.size() || !present_[ref])
    throw ValidationError("article ref #" + std::to_string(ref) + " not in index");
  return doc_lengths_[ref];
}

double InvertedIndex::score(std::span<const std::string> query_tokens, ArticleRef ref) const {
  const double len = static_cast<double>(doc_length(ref));
  double total = 0.0;
  for (const auto& t : query_tokens) {
    auto id = term_id(t);
    if (!id) continue;
    const auto& plist = postings_[*id];
    auto it = std::lower_bound(plist.begin(), plist.end(), ref,
                               [](const Posting& p, ArticleRef r) { return p.ref < r; });
    if (it == plist.end() || it->ref != ref) continue;
    total += bm25_term_score(bm25_idf(doc_count_, plist.size()), it->term_frequency, len,
                             avg_doc_length_, params_);
  }
  return total;
}

LexicalCandidates InvertedIndex::top_n(std::span<const std::string> query_tokens,
                                       std::size_t n) const {
  if (n == 0) throw ValidationError("top_n: n must be >= 1");
  // Term-at-a-time accumulation in query order; adds exactly the same terms
  // in the same order as score(), so both paths agree bit-for-bit.
  std::vector<double> acc(present_.size(), 0.0);
  std::vector<bool> touched(present_.size(), false);
  for (const auto& t : query_tokens) {
    auto id = term_id(t);
    if (!id) continue;
    const auto& plist = postings_[*id];
    const double idf = bm25_idf(doc_count_, plist.size());
    for (const auto& p : plist) {
      acc[p.ref] += bm25_term_score(idf, p.term_frequency, doc_lengths_[p.ref], avg_doc_length_,
                                    params_);
      touched[p.ref] = true;
    }
  }
  std::vector<CandidateScore> all;
  for (std::size_t r = 0; r < acc.size(); ++r)
    if (touched[r] && acc[r] > 0.0) all.push_back({static_cast<ArticleRef>(r), acc[r], 0});
  LexicalCandidates out;
  out.no_lexical_match = all.empty();
  auto better = [](const CandidateScore& a, const CandidateScore& b) {
    return a.lexical_score != b.lexical_score ? a.lexical_score > b.lexical_score : a.ref < b.ref;
  };
  const std::size_t keep = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  all.resize(keep);
  for (std::size_t i = 0; i < all.size(); ++i) all[i].rank = i + 1;
  out.candidates = std::move(all);
  return out;
}

std::string InvertedIndex::to_json() const {
  json j;
  j["format"] = kIndexFormat;
  j["version"] = kFormatVersion;
  j["k1"] = params_.k1;
  j["b"] = params_.b;
  j["corpus_fingerprint"] = fingerprint_;
  j["doc_count"] = doc_count_;
  j["doc_lengths"] = doc_lengths_;
  std::vector<int> present(present_.begin(), present_.end());
  j["present"] = present;
  j["terms"] = terms_;
  json plists = json::array();
  for (const auto& plist : postings_) {
    json flat = json::array();
    for (const auto& p : plist) {
      flat.push_back(p.ref);
      flat.push_back(p.term_frequency);
    }
    plists.push_back(std::move(flat));
  }
  j["postings"] = std::move(plists);
  return j.dump();
}

InvertedIndex InvertedIndex::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("index: malformed JSON: ") + e.what());
  }
  if (j.value("format", "") != kIndexFormat) throw ValidationError("not an index file");
  if (!j.contains("version") || j["version"] != kFormatVersion)
    throw ValidationError("unsupported index version");
  try {
    InvertedIndex index;
    index.params_ = {j.at("k1").get<double>(), j.at("b").get<double>()};
    index.fingerprint_ = j.at("corpus_fingerprint").get<std::string>();
    index.doc_count_ = j.at("doc_count").get<std::size_t>();
    index.doc_lengths_ = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
    for (int p : j.at("present").get<std::vector<int>>()) index.present_.push_back(p != 0);
    index.terms_ = j.at("terms").get<std::vector<std::string>>();
    for (const auto& flat : j.at("postings")) {
      std::vector<Posting> plist;
      for (std::size_t i = 0; i + 1 < flat.size(); i += 2)
        plist.push_back({flat[i].get<ArticleRef>(), flat[i + 1].get<std::uint32_t>()});
      index.postings_.push_back(std::move(plist));
    }
    if (index.postings_.size() != index.terms_.size() ||
        index.present_.size() != index.doc_lengths_.size() || index.doc_count_ == 0)
      throw ValidationError("index: inconsistent file");
    std::size_t total = 0;
    for (std::size_t r = 0; r < index.present_.size(); ++r)
      if (index.present_[r]) total += index.doc_lengths_[r];
    index.avg_doc_length_ = static_cast<double>(total) / static_cast<double>(index.doc_count_);
    index.rebuild_term_ids();
    return index;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("index: ") + e.what());
  }
}

InvertedIndex InvertedIndex::load(const std::string& path) { return from_json(read_file(path)); }

void InvertedIndex::save(const std::string& path) const { write_file(path, to_json()); }

void InvertedIndex::check_compatible(const CorpusStore& corpus) const {
  if (fingerprint_ != statret::corpus_fingerprint(corpus))
    throw ValidationError("index was built from a different corpus store");
}

}  // namespace statret
