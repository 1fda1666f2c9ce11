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

#include "statret/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "statret/error.hpp"

namespace statret {

double f2_score(double precision, double recall) {
  const double denom = 4.0 * precision + recall;
  return denom > 0.0 ? 5.0 * precision * recall / denom : 0.0;
}

Prf prf2_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
              std::size_t k) {
  if (k == 0) throw ValidationError("cutoff k must be >= 1");
  if (relevant.empty()) throw ValidationError("empty relevant set");
  std::unordered_set<std::string_view> rel(relevant.begin(), relevant.end());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, retrieved.size()); ++i)
    if (rel.erase(retrieved[i])) ++hits;
  Prf out;
  out.precision = static_cast<double>(hits) / static_cast<double>(k);
  out.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
  out.f2 = f2_score(out.precision, out.recall);
  return out;
}

double ndcg_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
                 std::size_t k) {
  if (k == 0) throw ValidationError("cutoff k must be >= 1");
  if (relevant.empty()) throw ValidationError("empty relevant set");
  std::unordered_set<std::string_view> rel(relevant.begin(), relevant.end());
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, retrieved.size()); ++i)
    if (rel.erase(retrieved[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  double ideal = 0.0;
  const std::size_t n_rel = std::unordered_set<std::string_view>(relevant.begin(), relevant.end()).size();
  for (std::size_t i = 0; i < std::min(k, n_rel); ++i)
    ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / ideal;
}

MacroMetrics macro_metrics(std::span<const QueryMetrics> per_query) {
  MacroMetrics m;
  if (per_query.empty()) return m;
  for (const auto& q : per_query) {
    m.precision += q.precision;
    m.recall += q.recall;
    m.f2 += q.f2;
    m.ndcg += q.ndcg;
  }
  const double n = static_cast<double>(per_query.size());
  m.precision /= n;
  m.recall /= n;
  m.f2 /= n;
  m.ndcg /= n;
  return m;
}

Run Run::parse(std::string_view text) {
  Run run;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    RunEntry e;
    std::string q0;
    std::string extra;
    if (!(ls >> e.query_id >> q0 >> e.doc_ref >> e.rank >> e.score >> e.tag) || (ls >> extra) || q0 != "Q0")
      throw ValidationError("run file line " + std::to_string(line_no) +
                            ": expected 'query_id Q0 doc rank score tag'");
    if (e.rank == 0) throw ValidationError("run file line " + std::to_string(line_no) + ": rank must be >= 1");
    run.by_query[e.query_id].push_back(std::move(e));
  }
  for (auto& [qid, entries] : run.by_query) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    std::unordered_set<std::string> seen;
    for (const auto& e : entries)
      if (!seen.insert(e.doc_ref).second)
        throw ValidationError("run file: query " + qid + " lists " + e.doc_ref + " twice");
  }
  return run;
}

std::vector<std::string> Run::ranked_refs(const std::string& query_id) const {
  std::vector<std::string> out;
  auto it = by_query.find(query_id);
  if (it == by_query.end()) return out;
  for (const auto& e : it->second) out.push_back(e.doc_ref);
  return out;
}

std::string format_run_line(std::string_view query_id, std::string_view doc_ref, std::size_t rank,
                            double score, std::string_view tag) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", score);
  std::string line;
  line.append(query_id).append(" Q0 ").append(doc_ref).append(" ");
  line.append(std::to_string(rank)).append(" ").append(buf).append(" ").append(tag);
  return line;
}

std::vector<EvalReport> evaluate_run(const Run& run, const QuerySet& judgments,
                                     std::span<const std::size_t> k_list) {
  for (const auto& [qid, entries] : run.by_query) {
    const Query* q = judgments.find(qid);
    if (!q || q->relevant.empty())
      throw ValidationError("run query '" + qid + "' has no judgments");
  }
  std::vector<EvalReport> reports;
  for (std::size_t k : k_list) {
    if (k == 0) throw ValidationError("cutoff k must be >= 1");
    EvalReport rep;
    rep.k = k;
    std::vector<QueryMetrics> values;
    for (const auto& q : judgments.queries) {
      if (q.relevant.empty()) continue;
      QueryMetrics m;
      if (run.by_query.count(q.query_id)) {
        auto refs = run.ranked_refs(q.query_id);
        Prf p = prf2_at_k(refs, q.relevant, k);
        m = {p.precision, p.recall, p.f2, ndcg_at_k(refs, q.relevant, k)};
      } else {
        ++rep.missing_from_run;
      }
      rep.per_query[q.query_id] = m;
      values.push_back(m);
    }
    rep.query_count = values.size();
    rep.macro = macro_metrics(values);
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::string report_to_json(std::span<const EvalReport> reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [qid, m] : r.per_query)
      per[qid] = {{"precision", m.precision}, {"recall", m.recall}, {"f2", m.f2}, {"ndcg", m.ndcg}};
    out.push_back({{"k", r.k},
                   {"query_count", r.query_count},
                   {"missing_from_run", r.missing_from_run},
                   {"macro_precision", r.macro.precision},
                   {"macro_recall", r.macro.recall},
                   {"macro_f2", r.macro.f2},
                   {"ndcg_mean", r.macro.ndcg},
                   {"per_query", std::move(per)}});
  }
  return out.dump(2) + "\n";
}

std::string report_to_table(std::span<const EvalReport> reports) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s %8s %8s %8s\n", "k", "queries", "missing",
                "MacroP", "MacroR", "MacroF2", "NDCG");
  os << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-6zu %8zu %8zu %8.4f %8.4f %8.4f %8.4f\n", r.k,
                  r.query_count, r.missing_from_run, r.macro.precision, r.macro.recall,
                  r.macro.f2, r.macro.ndcg);
    os << buf;
  }
  return os.str();
}

}  // namespace statret
