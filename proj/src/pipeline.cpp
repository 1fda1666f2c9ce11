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

#include "statret/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "statret/error.hpp"
#include "statret/metrics.hpp"
#include "statret/parallel.hpp"

namespace statret {

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::kMinMax: return "minmax";
    case Normalization::kZScore: return "zscore";
    case Normalization::kNone: return "none";
  }
  return "minmax";
}

Normalization normalization_from_string(std::string_view name) {
  if (name == "minmax") return Normalization::kMinMax;
  if (name == "zscore") return Normalization::kZScore;
  if (name == "none") return Normalization::kNone;
  throw ValidationError("unknown normalization: " + std::string(name));
}

void PipelineConfig::validate() const {
  if (n_filter < 1) throw ValidationError("n_filter must be >= 1");
  if (top_k < 1 || top_k > n_filter) throw ValidationError("top_k must be in [1, n_filter]");
  if (!(alpha_fuse >= 0.0 && alpha_fuse <= 1.0)) throw ValidationError("alpha_fuse must be in [0, 1]");
}

std::size_t default_n_filter(ModelKind kind) {
  return kind == ModelKind::kCnnDot ? 1000 : 150;
}

std::vector<double> normalize_scores(std::span<const double> scores, Normalization n) {
  std::vector<double> out(scores.begin(), scores.end());
  if (scores.empty() || n == Normalization::kNone) return out;
  if (n == Normalization::kMinMax) {
    auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    const double min = *lo, range = *hi - *lo;
    for (auto& v : out) v = range > 0.0 ? (v - min) / range : 0.5;
    return out;
  }
  double mean = 0.0;
  for (double v : scores) mean += v;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double v : scores) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(scores.size()));
  for (auto& v : out) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return out;
}

std::vector<double> fuse_scores(std::span<const double> lexical, std::span<const double> deep,
                                double alpha_fuse, Normalization n) {
  if (lexical.size() != deep.size())
    throw ValidationError("fuse_scores: lexical and deep scores cover different candidates");
  auto lex = normalize_scores(lexical, n);
  auto dp = normalize_scores(deep, n);
  std::vector<double> out(lex.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = alpha_fuse * dp[i] + (1.0 - alpha_fuse) * lex[i];
  return out;
}

void rank_articles(std::vector<RankedArticle>& articles) {
  std::sort(articles.begin(), articles.end(), [](const RankedArticle& a, const RankedArticle& b) {
    return a.s_final != b.s_final ? a.s_final > b.s_final : a.ref < b.ref;
  });
  for (std::size_t i = 0; i < articles.size(); ++i) articles[i].rank = i + 1;
}

std::string SweepResult::to_tsv() const {
  std::ostringstream os;
  os << "alpha_fuse\tmacro_f2_at_1\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f\t%.6f\n", r.alpha_fuse, r.macro_f2_at_1);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "# best\t%.4f\t%.6f\n", best_alpha, best_macro_f2_at_1);
  os << buf;
  return os.str();
}

Retriever::Retriever(const CorpusStore& corpus, const InvertedIndex& index, const Model* model,
                     std::size_t threads)
    : corpus_(corpus), index_(index), model_(model), threads_(std::max<std::size_t>(1, threads)) {
  index_.check_compatible(corpus_);
  if (model_) model_->check_vocabulary(corpus_.vocabulary());
  cache_.resize(corpus_.size());
}

void Retriever::warm(std::span<const ArticleRef> refs) {
  if (!model_) return;
  std::vector<ArticleRef> todo;
  for (ArticleRef r : refs)
    if (!cache_[r]) todo.push_back(r);
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
  parallel_for(todo.size(), threads_, [&](std::size_t i) {
    cache_[todo[i]] = model_->precompute(corpus_.article(todo[i]));
  });
}

Retriever::Scored Retriever::score_candidates(const Query& query, std::size_t n_filter) {
  Scored s;
  s.lexical = index_.top_n(query.tokens, n_filter);
  s.deep.assign(s.lexical.candidates.size(), 0.0);
  if (!model_ || s.lexical.candidates.empty()) return s;
  std::vector<ArticleRef> refs;
  for (const auto& c : s.lexical.candidates) refs.push_back(c.ref);
  warm(refs);
  const auto qvec = model_->encode_query(query.token_ids);
  parallel_for(refs.size(), threads_,
               [&](std::size_t i) { s.deep[i] = model_->score(qvec, *cache_[refs[i]]); });
  return s;
}

std::vector<Retriever::Scored> Retriever::score_all(const QuerySet& queries, std::size_t n_filter) {
  std::vector<Scored> out;
  out.reserve(queries.queries.size());
  for (const auto& q : queries.queries) out.push_back(score_candidates(q, n_filter));
  return out;
}

RetrievalResult Retriever::finish(const Query& query, const Scored& scored,
                                  const PipelineConfig& config) const {
  RetrievalResult r;
  r.query_id = query.query_id;
  r.no_lexical_match = scored.lexical.no_lexical_match;
  r.candidate_count = scored.lexical.candidates.size();
  if (!query.relevant_refs.empty()) {
    std::size_t inside = 0;
    for (ArticleRef g : query.relevant_refs)
      for (const auto& c : scored.lexical.candidates)
        if (c.ref == g) {
          ++inside;
          break;
        }
    r.recall_ceiling = static_cast<double>(inside) / static_cast<double>(query.relevant_refs.size());
  }
  std::vector<double> lex;
  for (const auto& c : scored.lexical.candidates) lex.push_back(c.lexical_score);
  auto fused = fuse_scores(lex, scored.deep, config.alpha_fuse, config.normalization);
  for (std::size_t i = 0; i < lex.size(); ++i)
    r.ranked.push_back({scored.lexical.candidates[i].ref, lex[i], scored.deep[i], fused[i], 0});
  rank_articles(r.ranked);
  if (r.ranked.size() > config.top_k) r.ranked.resize(config.top_k);
  return r;
}

RetrievalResult Retriever::retrieve(const Query& query, const PipelineConfig& config) {
  config.validate();
  if (!model_ && config.alpha_fuse != 0.0)
    throw ValidationError("alpha_fuse > 0 requires a model checkpoint");
  return finish(query, score_candidates(query, config.n_filter), config);
}

std::vector<RetrievalResult> Retriever::retrieve_all(const QuerySet& queries,
                                                     const PipelineConfig& config) {
  config.validate();
  if (!model_ && config.alpha_fuse != 0.0)
    throw ValidationError("alpha_fuse > 0 requires a model checkpoint");
  auto scored = score_all(queries, config.n_filter);
  std::vector<RetrievalResult> out;
  for (std::size_t i = 0; i < scored.size(); ++i)
    out.push_back(finish(queries.queries[i], scored[i], config));
  return out;
}

namespace {
double top1_f2(const CorpusStore& corpus, const Query& q, const RetrievalResult& r) {
  std::vector<std::string> refs;
  if (!r.ranked.empty()) refs.push_back(corpus.ref_string(r.ranked.front().ref));
  return prf2_at_k(refs, q.relevant, 1).f2;
}
}  // namespace

double Retriever::macro_f2_at_1(const QuerySet& queries, const PipelineConfig& config) {
  PipelineConfig c = config;
  c.top_k = 1;
  auto results = retrieve_all(queries, c);
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (queries.queries[i].relevant.empty()) continue;
    total += top1_f2(corpus_, queries.queries[i], results[i]);
    ++n;
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

SweepResult Retriever::sweep_alpha(const QuerySet& queries, double grid_step,
                                   const PipelineConfig& base) {
  std::vector<const Query*> judged;
  for (const auto& q : queries.queries)
    if (!q.relevant.empty()) judged.push_back(&q);
  if (judged.empty()) throw ValidationError("sweep_alpha: empty validation set");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ValidationError("grid step must be in (0, 1]");
  const double steps_f = 1.0 / grid_step;
  const auto steps = static_cast<std::size_t>(std::llround(steps_f));
  if (std::abs(steps_f - static_cast<double>(steps)) > 1e-9)
    throw ValidationError("grid step must divide 1 evenly");
  if (!model_) throw ValidationError("sweep_alpha requires a model checkpoint");

  PipelineConfig c = base;
  c.top_k = 1;
  c.validate();
  std::vector<Scored> scored;
  for (const Query* q : judged) scored.push_back(score_candidates(*q, c.n_filter));

  SweepResult result;
  for (std::size_t s = 0; s <= steps; ++s) {
    c.alpha_fuse = static_cast<double>(s) / static_cast<double>(steps);
    double total = 0.0;
    for (std::size_t i = 0; i < judged.size(); ++i)
      total += top1_f2(corpus_, *judged[i], finish(*judged[i], scored[i], c));
    const double macro = total / static_cast<double>(judged.size());
    result.rows.push_back({c.alpha_fuse, macro});
    if (s == 0 || macro > result.best_macro_f2_at_1) {
      result.best_alpha = c.alpha_fuse;
      result.best_macro_f2_at_1 = macro;
    }
  }
  return result;
}

AttentionExplanation Retriever::explain(const Query& query, ArticleRef ref) {
  if (!model_) throw ValidationError("explain requires a model checkpoint");
  const Article& article = corpus_.article(ref);
  ArticleRef refs[] = {ref};
  warm(refs);
  const auto qvec = model_->encode_query(query.token_ids);
  const PrecomputedArticle& pre = *cache_[ref];
  ArticleEncoding enc = model_->encode_article(qvec, pre);
  AttentionExplanation e;
  e.query_id = query.query_id;
  e.query_text = query.text;
  e.article_ref = article.ref_string();
  e.mode = enc.mode;
  e.query_independent = enc.mode == ParagraphMode::kSparseAvg;
  e.sentence_weights = enc.sentence_weights;
  e.sentence_scores = enc.sentence_scores;
  for (std::size_t j = 0; j < article.sentences.size(); ++j) {
    e.sentence_tokens.push_back(article.sentences[j].tokens);
    e.word_weights.push_back(pre.sentences[j].word_weights);
  }
  return e;
}

std::string AttentionExplanation::to_json() const {
  nlohmann::json j;
  j["query_id"] = query_id;
  j["article_ref"] = article_ref;
  j["mode"] = to_string(mode);
  j["query_independent"] = query_independent;
  j["sentence_weights"] = sentence_weights;
  j["sentence_scores"] = sentence_scores;
  j["word_weights"] = word_weights;
  j["sentence_tokens"] = sentence_tokens;
  return j.dump(2) + "\n";
}

namespace {
std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}
}  // namespace

std::string AttentionExplanation::to_html() const {
  std::ostringstream os;
  os << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Attention: "
     << html_escape(article_ref) << "</title>\n<style>\n"
     << "body{font-family:sans-serif;max-width:60em;margin:2em auto;line-height:1.6}\n"
     << ".sent{padding:.3em .5em;margin:.2em 0;border-left:6px solid #b22}\n"
     << ".w{padding:0 .1em}\n.meta{color:#555;font-size:.9em}\n</style></head><body>\n";
  os << "<h2>" << html_escape(article_ref) << "</h2>\n";
  os << "<p class=\"meta\">query " << html_escape(query_id) << ": " << html_escape(query_text)
     << "<br>mode: " << to_string(mode)
     << (query_independent ? " (weights do not depend on the query)" : " (query-conditioned)")
     << "</p>\n";
  for (std::size_t j = 0; j < sentence_tokens.size(); ++j) {
    const double sw = j < sentence_weights.size() ? sentence_weights[j] : 0.0;
    os << "<div class=\"sent\" title=\"sentence weight " << fmt(sw)
       << "\" style=\"background:rgba(178,34,34," << fmt(sw) << ")\">";
    double wmax = 0.0;
    for (double w : word_weights[j]) wmax = std::max(wmax, w);
    for (std::size_t i = 0; i < sentence_tokens[j].size(); ++i) {
      const double w = word_weights[j][i];
      const double op = wmax > 0.0 ? 0.6 * w / wmax : 0.0;
      os << "<span class=\"w\" title=\"" << fmt(w) << "\" style=\"background:rgba(30,60,200,"
         << fmt(op) << ")\">" << html_escape(sentence_tokens[j][i]) << "</span> ";
    }
    os << "</div>\n";
  }
  os << "</body></html>\n";
  return os.str();
}

}  // namespace statret
