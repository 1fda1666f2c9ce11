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

#include "doctest.h"
#include "json.hpp"
#include "statret/error.hpp"
#include "support.hpp"

using namespace statret;

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate_synthetic({}), b = generate_synthetic({});
  CHECK(a.corpus_jsonl == b.corpus_jsonl);
  CHECK(a.queries_jsonl == b.queries_jsonl);
  CHECK(a.map_json() == b.map_json());
  SyntheticConfig other;
  other.seed = 8;
  CHECK(generate_synthetic(other).corpus_jsonl != a.corpus_jsonl);
}

TEST_CASE("splits partition the queries") {
  testing::SyntheticFixture fx({});
  CHECK(fx.corpus.size() == 200);
  CHECK(fx.all.queries.size() == 100);
  CHECK(fx.test.queries.size() == 20);
  CHECK(fx.valid.queries.size() == 10);
  CHECK(fx.train.queries.size() == 70);
  std::set<std::string> ids;
  for (const auto* s : {&fx.train, &fx.valid, &fx.test})
    for (const auto& q : s->queries) CHECK(ids.insert(q.query_id).second);
}

TEST_CASE("synonym queries share no concept word with their gold article") {
  testing::SyntheticFixture fx({});
  std::size_t synonyms = 0, distractor_first = 0;
  for (const auto& info : fx.data.info) {
    const Query* q = fx.all.find(info.query_id);
    REQUIRE(q != nullptr);
    CHECK(q->relevant == std::vector<std::string>{info.gold});
    const auto top = fx.index.top_n(q->tokens, 1).candidates;
    REQUIRE_FALSE(top.empty());
    if (!info.synonym) {
      CHECK_FALSE(info.distractor.has_value());
      continue;
    }
    ++synonyms;
    REQUIRE(info.distractor.has_value());
    const std::string colloquial = info.concepts[0].substr(0, info.concepts[0].find('/'));
    const auto gold = *fx.corpus.find_ref(info.gold);
    for (const auto& s : fx.corpus.article(gold).sentences)
      for (const auto& t : s.tokens) CHECK(t != colloquial);
    distractor_first += fx.corpus.ref_string(top[0].ref) == *info.distractor;
  }
  CHECK(synonyms == 50);
  CHECK(distractor_first * 10 >= synonyms * 9);
}

TEST_CASE("synonym rate zero makes BM25 sufficient") {
  SyntheticConfig cfg;
  cfg.synonym_rate = 0.0;
  testing::SyntheticFixture fx(cfg);
  for (const auto& q : fx.all.queries)
    CHECK(fx.index.top_n(q.tokens, 1).candidates[0].ref == q.relevant_refs[0]);
}

TEST_CASE("invalid generator settings are rejected") {
  SyntheticConfig c;
  c.queries = 0;
  CHECK_THROWS_AS(generate_synthetic(c), ValidationError);
  c = {};
  c.synonym_rate = 1.5;
  CHECK_THROWS_AS(generate_synthetic(c), ValidationError);
  c = {};
  c.articles = 120;
  CHECK_THROWS_AS(generate_synthetic(c), ValidationError);
  c = {};
  c.test_fraction = 0.6;
  c.valid_fraction = 0.5;
  CHECK_THROWS_AS(generate_synthetic(c), ValidationError);
  c = {};
  c.concepts = 1;
  CHECK_THROWS_AS(generate_synthetic(c), ValidationError);
}
