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

#include "statret/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "statret/error.hpp"

namespace statret {

namespace {

using Rng = std::mt19937_64;

constexpr std::array kArticleFillers = {
    "the",       "of",     "and",  "to",    "in",       "shall",     "be",       "by",
    "with",      "any",    "or",   "for",   "on",       "under",     "such",     "as",
    "person",    "law",    "case", "other", "relevant", "competent", "authority", "provisions",
    "specified", "may",    "not",  "its",   "this",     "where"};
constexpr std::array kBoilerplate = {"this", "article", "shall", "take", "effect", "in", "accordance",
                                     "with", "the", "law", "and", "its", "provisions"};
constexpr std::array kQueryFillers = {"what", "is", "the", "of", "a", "for", "when",
                                      "how",  "in", "to", "can", "who", "does"};

struct Concept {
  std::string colloquial;
  std::string legal;
};

std::string pseudo_word(Rng& rng) {
  static constexpr std::string_view kCons = "bdfgklmnprstvz";
  static constexpr std::string_view kVows = "aeiou";
  std::uniform_int_distribution<std::size_t> c(0, kCons.size() - 1), v(0, kVows.size() - 1);
  std::string w;
  for (int s = 0; s < 3; ++s) {
    w.push_back(kCons[c(rng)]);
    w.push_back(kVows[v(rng)]);
  }
  return w;
}

template <typename Arr>
std::string pick(const Arr& arr, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, arr.size() - 1);
  return arr[d(rng)];
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s.push_back(' ');
    s += w;
  }
  return s;
}

// Sentences pair a concept word with a context word inside a fixed clause.
constexpr std::array kTemplates = {
    std::pair{"Any", "shall be governed by the"},
    std::pair{"The", "of a person is subject to the"},
    std::pair{"Where", "applies the"},
    std::pair{"A", "may be granted with the"},
};

std::string sentence(const std::string& first, const std::string& second, Rng& rng) {
  const auto& [lead, middle] = kTemplates[std::uniform_int_distribution<std::size_t>(0, kTemplates.size() - 1)(rng)];
  return std::string(lead) + " " + first + " " + middle + " " + second + " under this law.";
}

// Every article has the same shape: one concept word stated twice, each time
// next to a context word, then a closing sentence naming both context words
// so each appears at least twice in the corpus.
std::string article_text(const std::string& concept_word, const std::string& ctx1, const std::string& ctx2,
                         Rng& rng) {
  return sentence(concept_word, ctx1, rng) + " " + sentence(concept_word, ctx2, rng) + " Matters of " + ctx1 +
         " and " + ctx2 + " take effect in accordance with the law.";
}

}  // namespace

std::string SyntheticData::map_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& q : info) {
    arr.push_back({{"query_id", q.query_id},
                   {"gold", q.gold},
                   {"distractor", q.distractor ? nlohmann::json(*q.distractor) : nlohmann::json()},
                   {"synonym", q.synonym},
                   {"split", q.split},
                   {"concepts", q.concepts}});
  }
  return arr.dump(1) + "\n";
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.queries == 0) throw ValidationError("gen-synthetic: need at least one query");
  if (!(cfg.synonym_rate >= 0.0 && cfg.synonym_rate <= 1.0))
    throw ValidationError("gen-synthetic: synonym_rate must be in [0, 1]");
  if (!(cfg.test_fraction >= 0.0 && cfg.valid_fraction >= 0.0 &&
        cfg.test_fraction + cfg.valid_fraction < 1.0))
    throw ValidationError("gen-synthetic: split fractions must be >= 0 and sum below 1");
  const auto n_syn = static_cast<std::size_t>(std::llround(cfg.synonym_rate * static_cast<double>(cfg.queries)));
  if (cfg.articles < cfg.queries + n_syn)
    throw ValidationError("gen-synthetic: articles must cover one gold per query plus one distractor per synonym query");
  const std::size_t n_concepts = cfg.concepts ? cfg.concepts : std::max<std::size_t>(4, cfg.queries / 25);
  if (n_concepts < 2) throw ValidationError("gen-synthetic: need at least 2 concepts");
  const std::size_t n_context = cfg.context_words ? cfg.context_words : std::max<std::size_t>(60, 3 * cfg.articles / 2);
  if (n_context < 4) throw ValidationError("gen-synthetic: need at least 4 context words");

  Rng rng(cfg.seed);

  std::set<std::string> used(kArticleFillers.begin(), kArticleFillers.end());
  used.insert(kBoilerplate.begin(), kBoilerplate.end());
  used.insert(kQueryFillers.begin(), kQueryFillers.end());
  auto fresh = [&] {
    for (;;) {
      std::string w = pseudo_word(rng);
      if (used.insert(w).second) return w;
    }
  };
  std::vector<Concept> concepts;
  for (std::size_t i = 0; i < n_concepts; ++i) concepts.push_back({fresh(), fresh()});

  // Concepts are spread evenly over queries.
  std::vector<std::size_t> query_concept(cfg.queries);
  for (std::size_t q = 0; q < cfg.queries; ++q) query_concept[q] = q % n_concepts;
  std::shuffle(query_concept.begin(), query_concept.end(), rng);

  std::vector<std::size_t> qorder(cfg.queries);
  std::iota(qorder.begin(), qorder.end(), 0);
  std::shuffle(qorder.begin(), qorder.end(), rng);
  std::vector<bool> synonym(cfg.queries, false);
  for (std::size_t i = 0; i < n_syn; ++i) synonym[qorder[i]] = true;

  // Context words come from a shared pool. Every article carries a distinct
  // pair, and queries on the same concept never share a context word.
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < n_context; ++i) pool.push_back(fresh());
  std::set<std::pair<std::size_t, std::size_t>> pairs_used;
  std::vector<std::set<std::size_t>> concept_ctx(n_concepts);
  std::uniform_int_distribution<std::size_t> any_ctx(0, n_context - 1);
  auto draw_pair = [&](const std::set<std::size_t>* avoid, std::size_t keep) {
    for (std::size_t attempt = 0; attempt < 100000; ++attempt) {
      std::size_t x = keep == n_context ? any_ctx(rng) : keep, y = any_ctx(rng);
      if (x == y) continue;
      if (avoid && ((keep == n_context && avoid->count(x)) || avoid->count(y))) continue;
      if (pairs_used.count({std::min(x, y), std::max(x, y)})) continue;
      pairs_used.insert({std::min(x, y), std::max(x, y)});
      return std::make_pair(x, y);
    }
    throw ValidationError("gen-synthetic: context pool too small for the requested queries");
  };

  // Article slots are shuffled so gold/distractor refs carry no order signal.
  std::vector<std::size_t> slots(cfg.articles);
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  auto slot_ref = [](std::size_t slot) {
    char law[32];
    std::snprintf(law, sizeof law, "L%03zu", slot / 10);
    return std::make_pair(std::string(law), std::to_string(slot % 10 + 1));
  };
  std::vector<std::string> texts(cfg.articles);
  std::size_t next_slot = 0;

  SyntheticData data;
  for (std::size_t q = 0; q < cfg.queries; ++q) {
    const std::size_t c = query_concept[q];
    const auto [x, y] = draw_pair(&concept_ctx[c], n_context);
    concept_ctx[c].insert({x, y});
    SyntheticQueryInfo qi;
    char qid[32];
    std::snprintf(qid, sizeof qid, "Q%04zu", q + 1);
    qi.query_id = qid;
    qi.synonym = synonym[q];
    qi.concepts.push_back(concepts[c].colloquial + "/" + concepts[c].legal);

    // A plain gold states the query's concept with both context words. A
    // synonym gold states the concept in legal form and keeps one context
    // word; its distractor keeps both context words around another concept.
    const std::size_t gold_slot = slots[next_slot++];
    if (synonym[q]) {
      const auto [x2, z] = draw_pair(&concept_ctx[c], x);
      concept_ctx[c].insert(z);
      texts[gold_slot] = article_text(concepts[c].legal, pool[x2], pool[z], rng);
    } else {
      texts[gold_slot] = article_text(concepts[c].colloquial, pool[x], pool[y], rng);
    }
    auto [gl, ga] = slot_ref(gold_slot);
    qi.gold = gl + ":" + ga;
    if (synonym[q]) {
      std::size_t other = std::uniform_int_distribution<std::size_t>(0, n_concepts - 2)(rng);
      if (other >= c) ++other;
      const std::size_t d_slot = slots[next_slot++];
      texts[d_slot] = article_text(concepts[other].colloquial, pool[x], pool[y], rng);
      auto [dl, da] = slot_ref(d_slot);
      qi.distractor = dl + ":" + da;
    }

    std::vector<std::string> words;
    const std::size_t n_fill = 3 + (q % 2);
    for (std::size_t i = 0; i < n_fill; ++i) words.push_back(pick(kQueryFillers, rng));
    for (const auto& w : {concepts[c].colloquial, pool[x], pool[y]}) {
      std::uniform_int_distribution<std::size_t> at(0, words.size());
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(at(rng)), w);
    }
    std::string text = join(words) + "?";
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    nlohmann::json jq = {{"query_id", qi.query_id},
                         {"text", text},
                         {"relevant", nlohmann::json::array({nlohmann::json::array({gl, ga})})}};
    data.queries_jsonl += jq.dump() + "\n";
    data.info.push_back(std::move(qi));
  }

  // Background articles state a random concept in either form.
  while (next_slot < cfg.articles) {
    const std::size_t c = std::uniform_int_distribution<std::size_t>(0, n_concepts - 1)(rng);
    const auto [x, y] = draw_pair(nullptr, n_context);
    const bool colloquial = std::bernoulli_distribution(0.5)(rng);
    texts[slots[next_slot++]] =
        article_text(colloquial ? concepts[c].colloquial : concepts[c].legal, pool[x], pool[y], rng);
  }

  for (std::size_t slot = 0; slot < cfg.articles; ++slot) {
    auto [law, art] = slot_ref(slot);
    nlohmann::json ja = {{"law_id", law},
                         {"article_id", art},
                         {"title", "Article " + art + " of " + law},
                         {"text", texts[slot]}};
    data.corpus_jsonl += ja.dump() + "\n";
  }

  // Splits.
  std::vector<std::size_t> split_order(cfg.queries);
  std::iota(split_order.begin(), split_order.end(), 0);
  std::shuffle(split_order.begin(), split_order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(cfg.queries)));
  const auto n_valid = static_cast<std::size_t>(std::llround(cfg.valid_fraction * static_cast<double>(cfg.queries)));
  for (std::size_t i = 0; i < cfg.queries; ++i) {
    const std::size_t q = split_order[i];
    data.info[q].split = i < n_test ? "test" : (i < n_test + n_valid ? "valid" : "train");
  }
  std::size_t line_start = 0;
  for (std::size_t q = 0; q < cfg.queries; ++q) {
    const std::size_t line_end = data.queries_jsonl.find('\n', line_start) + 1;
    const std::string line = data.queries_jsonl.substr(line_start, line_end - line_start);
    line_start = line_end;
    const auto& split = data.info[q].split;
    (split == "test" ? data.test_jsonl : split == "valid" ? data.valid_jsonl : data.train_jsonl) += line;
  }
  return data;
}

}  // namespace statret
