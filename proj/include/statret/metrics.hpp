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

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statret/corpus.hpp"

namespace statret {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f2 = 0.0;
};

// F-beta with beta = 2: 5PR / (4P + R), 0 when both are 0.
double f2_score(double precision, double recall);

// P = hits/k, R = hits/|relevant| over the first k retrieved refs.
Prf prf2_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
              std::size_t k);

// Binary-gain NDCG: DCG = sum_{i<=k} rel_i / log2(i + 1), normalized by the
// ideal ordering.
double ndcg_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
                 std::size_t k);

struct QueryMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f2 = 0.0;
  double ndcg = 0.0;
};

struct MacroMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f2 = 0.0;
  double ndcg = 0.0;
};

// Unweighted means of per-query values (not F2 of the mean P and R).
MacroMetrics macro_metrics(std::span<const QueryMetrics> per_query);

struct EvalReport {
  std::size_t k = 1;
  std::map<std::string, QueryMetrics> per_query;
  MacroMetrics macro;
  std::size_t query_count = 0;
  // Judged queries the run never mentions; they score 0.
  std::size_t missing_from_run = 0;
};

struct RunEntry {
  std::string query_id;
  std::string doc_ref;
  std::size_t rank = 0;
  double score = 0.0;
  std::string tag;
};

// TREC-style run: "query_id Q0 law_id:article_id rank score tag".
struct Run {
  // Entries per query, sorted by rank.
  std::map<std::string, std::vector<RunEntry>> by_query;

  static Run parse(std::string_view text);
  std::vector<std::string> ranked_refs(const std::string& query_id) const;
};

std::string format_run_line(std::string_view query_id, std::string_view doc_ref, std::size_t rank,
                            double score, std::string_view tag);

// One report per cutoff. Run queries without judgments are an error.
std::vector<EvalReport> evaluate_run(const Run& run, const QuerySet& judgments,
                                     std::span<const std::size_t> k_list);

std::string report_to_json(std::span<const EvalReport> reports);
std::string report_to_table(std::span<const EvalReport> reports);

}  // namespace statret
