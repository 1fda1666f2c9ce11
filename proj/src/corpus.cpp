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

#include "statret/corpus.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "statret/error.hpp"
#include "statret/hash.hpp"

namespace statret {

using nlohmann::json;

namespace {

constexpr std::string_view kCorpusFormat = "statret-corpus";

std::string line_error(std::size_t line_no, const std::string& msg) {
  return "line " + std::to_string(line_no) + ": " + msg;
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw ValidationError(line_error(line_no, std::string("missing string field '") + key + "'"));
  return it->get<std::string>();
}

void validate_id(const std::string& id, const char* what, bool allow_colon,
                 std::size_t line_no) {
  if (id.empty()) throw ValidationError(line_error(line_no, std::string("empty ") + what));
  for (char c : id) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || (!allow_colon && c == ':'))
      throw ValidationError(line_error(
          line_no, std::string(what) + " contains whitespace or ':': '" + id + "'"));
  }
}

// Calls fn(line_no, line) for each non-blank line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) fn(line_no, line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

json parse_line(std::string_view line, std::size_t line_no) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ValidationError(line_error(line_no, "expected a JSON object"));
    return j;
  } catch (const json::parse_error& e) {
    throw ValidationError(line_error(line_no, std::string("malformed JSON: ") + e.what()));
  }
}

}  // namespace

std::size_t Article::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

CorpusStore CorpusStore::ingest_jsonl(std::string_view jsonl, const IngestOptions& options) {
  struct Raw {
    std::size_t line_no;
    std::string law_id, article_id, title, text;
  };
  std::vector<Raw> raws;
  for_each_line(jsonl, [&](std::size_t line_no, std::string_view line) {
    json j = parse_line(line, line_no);
    Raw r{line_no, require_string(j, "law_id", line_no), require_string(j, "article_id", line_no),
          require_string(j, "title", line_no), require_string(j, "text", line_no)};
    validate_id(r.law_id, "law_id", false, line_no);
    validate_id(r.article_id, "article_id", true, line_no);
    raws.push_back(std::move(r));
  });
  if (raws.empty()) throw ValidationError("empty corpus");

  std::stable_sort(raws.begin(), raws.end(), [](const Raw& a, const Raw& b) {
    return std::tie(a.law_id, a.article_id) < std::tie(b.law_id, b.article_id);
  });

  CorpusStore store;
  store.profile_ = options.profile;
  std::set<std::string> laws;
  for (std::size_t i = 0; i < raws.size(); ++i) {
    const Raw& r = raws[i];
    if (i > 0 && raws[i - 1].law_id == r.law_id && raws[i - 1].article_id == r.article_id) {
      if (raws[i - 1].title == r.title && raws[i - 1].text == r.text) {
        ++store.report_.duplicate_lines;
        continue;
      }
      throw ValidationError(line_error(r.line_no, "duplicate article " + r.law_id + ":" +
                                                      r.article_id + " (first seen on line " +
                                                      std::to_string(raws[i - 1].line_no) + ")"));
    }
    Article a{r.law_id, r.article_id, r.title, r.text, {}};
    for (auto& seg : split_sentences(r.text)) {
      auto tokens = tokenize(seg, options.profile);
      if (tokens.empty()) continue;
      a.sentences.push_back(Sentence{a.sentences.size(), std::move(tokens), {}});
    }
    if (a.sentences.empty())
      throw ValidationError(line_error(r.line_no, "empty article " + a.ref_string()));
    if (a.sentences.size() > options.max_sentences) {
      store.report_.warnings.push_back("article " + a.ref_string() + " truncated from " +
                                       std::to_string(a.sentences.size()) + " to " +
                                       std::to_string(options.max_sentences) + " sentences");
      a.sentences.resize(options.max_sentences);
      ++store.report_.truncated_articles;
    }
    laws.insert(a.law_id);
    store.articles_.push_back(std::move(a));
  }

  std::vector<std::vector<std::string>> docs;
  for (const auto& a : store.articles_)
    for (const auto& s : a.sentences) docs.push_back(s.tokens);
  store.vocabulary_ = Vocabulary::build(docs, options.min_frequency);
  for (auto& a : store.articles_)
    for (auto& s : a.sentences) s.token_ids = store.vocabulary_.encode(s.tokens);

  store.report_.documents = laws.size();
  store.report_.articles = store.articles_.size();
  for (const auto& a : store.articles_) store.report_.sentences += a.sentences.size();
  store.rebuild_lookup();
  return store;
}

CorpusStore CorpusStore::ingest_file(const std::string& path, const IngestOptions& options) {
  return ingest_jsonl(read_file(path), options);
}

void CorpusStore::rebuild_lookup() {
  lookup_.clear();
  for (std::size_t i = 0; i < articles_.size(); ++i)
    lookup_.emplace(std::make_pair(articles_[i].law_id, articles_[i].article_id),
                    static_cast<ArticleRef>(i));
}

const Article& CorpusStore::article(ArticleRef ref) const {
  if (ref >= articles_.size())
    throw ValidationError("unknown article ref #" + std::to_string(ref));
  return articles_[ref];
}

std::optional<ArticleRef> CorpusStore::find(std::string_view law_id,
                                            std::string_view article_id) const {
  auto it = lookup_.find({std::string(law_id), std::string(article_id)});
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<ArticleRef> CorpusStore::find_ref(std::string_view ref) const {
  auto colon = ref.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  return find(ref.substr(0, colon), ref.substr(colon + 1));
}

std::string CorpusStore::to_json() const {
  json j;
  j["format"] = kCorpusFormat;
  j["version"] = kFormatVersion;
  j["profile"] = profile_.name();
  j["min_frequency"] = vocabulary_.min_frequency();
  j["vocabulary"] = vocabulary_.tokens();
  json arts = json::array();
  for (const auto& a : articles_) {
    json sents = json::array();
    for (const auto& s : a.sentences) sents.push_back({{"tokens", s.tokens}, {"ids", s.token_ids}});
    arts.push_back({{"law_id", a.law_id},
                    {"article_id", a.article_id},
                    {"title", a.title},
                    {"raw_text", a.raw_text},
                    {"sentences", std::move(sents)}});
  }
  j["articles"] = std::move(arts);
  json rep;
  rep["documents"] = report_.documents;
  rep["articles"] = report_.articles;
  rep["sentences"] = report_.sentences;
  rep["duplicate_lines"] = report_.duplicate_lines;
  rep["truncated_articles"] = report_.truncated_articles;
  rep["warnings"] = report_.warnings;
  j["report"] = std::move(rep);
  return j.dump();
}

CorpusStore CorpusStore::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("corpus store: malformed JSON: ") + e.what());
  }
  if (j.value("format", "") != kCorpusFormat)
    throw ValidationError("not a corpus store file");
  if (!j.contains("version") || j["version"] != kFormatVersion)
    throw ValidationError("unsupported corpus store version");
  try {
    CorpusStore store;
    store.profile_ = LanguageProfile::from_name(j.at("profile").get<std::string>());
    store.vocabulary_ = Vocabulary::from_tokens(j.at("vocabulary").get<std::vector<std::string>>(),
                                                j.at("min_frequency").get<int>());
    for (const auto& ja : j.at("articles")) {
      Article a;
      a.law_id = ja.at("law_id").get<std::string>();
      a.article_id = ja.at("article_id").get<std::string>();
      a.title = ja.at("title").get<std::string>();
      a.raw_text = ja.at("raw_text").get<std::string>();
      for (const auto& js : ja.at("sentences")) {
        Sentence s;
        s.index = a.sentences.size();
        s.tokens = js.at("tokens").get<std::vector<std::string>>();
        s.token_ids = js.at("ids").get<std::vector<TokenId>>();
        if (s.tokens.size() != s.token_ids.size() || s.tokens.empty())
          throw ValidationError("corpus store: inconsistent sentence in " + a.ref_string());
        for (TokenId id : s.token_ids)
          if (id < 0 || static_cast<std::size_t>(id) >= store.vocabulary_.size())
            throw ValidationError("corpus store: token id out of range in " + a.ref_string());
        a.sentences.push_back(std::move(s));
      }
      store.articles_.push_back(std::move(a));
    }
    const json& rep = j.at("report");
    store.report_.documents = rep.at("documents").get<std::size_t>();
    store.report_.articles = rep.at("articles").get<std::size_t>();
    store.report_.sentences = rep.at("sentences").get<std::size_t>();
    store.report_.duplicate_lines = rep.at("duplicate_lines").get<std::size_t>();
    store.report_.truncated_articles = rep.at("truncated_articles").get<std::size_t>();
    store.report_.warnings = rep.at("warnings").get<std::vector<std::string>>();
    store.rebuild_lookup();
    return store;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("corpus store: ") + e.what());
  }
}

CorpusStore CorpusStore::load(const std::string& path) { return from_json(read_file(path)); }

void CorpusStore::save(const std::string& path) const { write_file(path, to_json()); }

Query make_query(std::string query_id, std::string text, const CorpusStore& corpus) {
  Query q;
  q.query_id = std::move(query_id);
  q.text = std::move(text);
  q.tokens = tokenize(q.text, corpus.profile());
  q.token_ids = corpus.vocabulary().encode(q.tokens);
  return q;
}

QuerySet QuerySet::parse_jsonl(std::string_view jsonl, const CorpusStore* corpus) {
  QuerySet set;
  std::set<std::string> seen;
  std::size_t total_tokens = 0, unk_tokens = 0;
  for_each_line(jsonl, [&](std::size_t line_no, std::string_view line) {
    json j = parse_line(line, line_no);
    Query q;
    q.query_id = require_string(j, "query_id", line_no);
    validate_id(q.query_id, "query_id", true, line_no);
    q.text = require_string(j, "text", line_no);
    if (!seen.insert(q.query_id).second)
      throw ValidationError(line_error(line_no, "duplicate query_id " + q.query_id));
    if (auto it = j.find("relevant"); it != j.end()) {
      if (!it->is_array()) throw ValidationError(line_error(line_no, "'relevant' must be an array"));
      std::set<std::string> rel_seen;
      for (const auto& pair : *it) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
          throw ValidationError(line_error(line_no, "relevant entries must be [law_id, article_id]"));
        std::string ref = pair[0].get<std::string>() + ":" + pair[1].get<std::string>();
        if (!rel_seen.insert(ref).second) continue;
        if (corpus) {
          auto r = corpus->find(pair[0].get<std::string>(), pair[1].get<std::string>());
          if (!r)
            throw ValidationError(line_error(
                line_no, "query " + q.query_id + ": relevant article " + ref + " not in corpus"));
          q.relevant_refs.push_back(*r);
        }
        q.relevant.push_back(std::move(ref));
      }
    }
    if (corpus) {
      q.tokens = tokenize(q.text, corpus->profile());
      q.token_ids = corpus->vocabulary().encode(q.tokens);
      total_tokens += q.token_ids.size();
      unk_tokens += static_cast<std::size_t>(std::count(q.token_ids.begin(), q.token_ids.end(), kUnkId));
    }
    set.queries.push_back(std::move(q));
  });
  set.unk_rate = total_tokens ? static_cast<double>(unk_tokens) / static_cast<double>(total_tokens) : 0.0;
  return set;
}

QuerySet QuerySet::load(const std::string& path, const CorpusStore* corpus) {
  return parse_jsonl(read_file(path), corpus);
}

const Query* QuerySet::find(std::string_view query_id) const {
  for (const auto& q : queries)
    if (q.query_id == query_id) return &q;
  return nullptr;
}

}  // namespace statret
