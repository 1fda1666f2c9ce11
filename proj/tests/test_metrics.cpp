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

#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "statret/error.hpp"
#include "statret/metrics.hpp"
#include "support.hpp"

using namespace statret;

TEST_CASE("F2 weights recall four times as much as precision") {
  CHECK(std::abs(f2_score(0.5, 1.0) - 0.8333333333333334) <= 1e-9);
  CHECK(f2_score(0.0, 0.0) == 0.0);
  CHECK(f2_score(1.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("NDCG of a single relevant article at rank two") {
  const std::vector<std::string> run{"x", "gold", "y"}, rel{"gold"};
  CHECK(std::abs(ndcg_at_k(run, rel, 3) - 0.6309) <= 1e-4);
  CHECK(ndcg_at_k(run, rel, 1) == 0.0);
}

TEST_CASE("precision at k divides by k even for short runs") {
  const std::vector<std::string> run{"a"}, rel{"a", "b"};
  const auto p = prf2_at_k(run, rel, 2);
  CHECK(p.precision == doctest::Approx(0.5));
  CHECK(p.recall == doctest::Approx(0.5));
  CHECK_THROWS_AS(prf2_at_k(run, rel, 0), ValidationError);
}

TEST_CASE("macro F2 averages per-query scores, not pooled precision and recall") {
  // Query 1 has two relevant articles and retrieves one; query 2 is exact.
  const auto judgments = QuerySet::parse_jsonl(
      R"({"query_id":"q1","text":"a","relevant":[["L","1"],["L","2"]]})"
      "\n"
      R"({"query_id":"q2","text":"b","relevant":[["L","3"]]})"
      "\n",
      nullptr);
  const auto run = Run::parse(format_run_line("q1", "L:1", 1, 1.0, "t") + "\n" +
                              format_run_line("q2", "L:3", 1, 1.0, "t") + "\n");
  const std::size_t k[] = {1};
  const auto rep = evaluate_run(run, judgments, k)[0];
  const double macro = (5.0 * 0.5 / 4.5 + 1.0) / 2.0;
  const double pooled = f2_score(rep.macro.precision, rep.macro.recall);
  CHECK(rep.macro.f2 == doctest::Approx(macro));
  CHECK(pooled == doctest::Approx(f2_score(1.0, 0.75)));
  CHECK(std::abs(rep.macro.f2 - pooled) > 0.01);
}

TEST_CASE("evaluation agrees with a brute-force oracle on random runs") {
  Rng rng(2024);
  std::uniform_int_distribution<int> n_rel(1, 4), depth(0, 12), doc(0, 19);
  const std::size_t ks[] = {1, 3, 5, 10};
  for (int trial = 0; trial < 500; ++trial) {
    std::string judgments, run_text;
    std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> truth;
    for (int q = 0; q < 3; ++q) {
      const std::string qid = "q" + std::to_string(q);
      std::set<std::string> rel;
      for (int i = n_rel(rng); i > 0; --i) rel.insert(std::to_string(doc(rng)));
      nlohmann::json jr = nlohmann::json::array();
      for (const auto& r : rel) jr.push_back({"L", r});
      judgments += nlohmann::json{{"query_id", qid}, {"text", "x"}, {"relevant", jr}}.dump() + "\n";
      std::vector<std::string> docs;
      for (int i = 0; i < 20; ++i) docs.push_back("L:" + std::to_string(i));
      std::shuffle(docs.begin(), docs.end(), rng);
      docs.resize(static_cast<std::size_t>(depth(rng)));
      for (std::size_t i = 0; i < docs.size(); ++i)
        run_text += format_run_line(qid, docs[i], i + 1, 1.0 / static_cast<double>(i + 1), "r") + "\n";
      std::vector<std::string> rel_refs;
      for (const auto& r : rel) rel_refs.push_back("L:" + r);
      truth[qid] = {docs, rel_refs};
    }
    const auto reports = evaluate_run(Run::parse(run_text), QuerySet::parse_jsonl(judgments, nullptr), ks);
    for (const auto& rep : reports) {
      double f2 = 0.0, ndcg = 0.0;
      for (const auto& [qid, tr] : truth) {
        const auto want = testing::metric_oracle(tr.first, tr.second, rep.k);
        const auto& got = rep.per_query.at(qid);
        CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
        CHECK(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
        CHECK(got.f2 == doctest::Approx(want.f2).epsilon(1e-12));
        CHECK(got.ndcg == doctest::Approx(want.ndcg).epsilon(1e-12));
        f2 += want.f2;
        ndcg += want.ndcg;
      }
      CHECK(rep.macro.f2 == doctest::Approx(f2 / 3.0).epsilon(1e-12));
      CHECK(rep.macro.ndcg == doctest::Approx(ndcg / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("queries missing from the run score zero") {
  const auto judgments = QuerySet::parse_jsonl(
      R"({"query_id":"q1","text":"a","relevant":[["L","1"]]})"
      "\n"
      R"({"query_id":"q2","text":"b","relevant":[["L","2"]]})",
      nullptr);
  const std::size_t k[] = {1};
  const auto rep = evaluate_run(Run::parse("q1 Q0 L:1 1 0.5 t\n"), judgments, k)[0];
  CHECK(rep.missing_from_run == 1);
  CHECK(rep.macro.f2 == doctest::Approx(0.5));
}

TEST_CASE("malformed run files are rejected") {
  CHECK_THROWS_AS(Run::parse("q1 L:1 1 0.5 t\n"), ValidationError);
  CHECK_THROWS_AS(Run::parse("q1 Q0 L:1 0 0.5 t\n"), ValidationError);
  CHECK_THROWS_AS(Run::parse("q1 Q0 L:1 1 0.5 t extra\n"), ValidationError);
  CHECK_THROWS_AS(Run::parse("q1 Q0 L:1 1 0.5 t\nq1 Q0 L:1 2 0.4 t\n"), ValidationError);
  const auto judgments = QuerySet::parse_jsonl(R"({"query_id":"q1","text":"a","relevant":[["L","1"]]})", nullptr);
  const std::size_t k[] = {1};
  CHECK_THROWS_AS(evaluate_run(Run::parse("zz Q0 L:1 1 0.5 t\n"), judgments, k), ValidationError);
}

TEST_CASE("run lines are ordered by rank, not by file order") {
  const auto run = Run::parse("q1 Q0 B 2 0.1 t\nq1 Q0 A 1 0.9 t\n");
  CHECK(run.ranked_refs("q1") == std::vector<std::string>{"A", "B"});
}
