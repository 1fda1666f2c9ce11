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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "statret/gradcheck.hpp"
#include "statret/hash.hpp"
#include "statret/metrics.hpp"
#include "statret/pipeline.hpp"
#include "statret/tensor.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace statret;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

// Runs the CLI in `dir`; output goes to dir/commands.log.
int cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd " + quote(dir.string()) + " && " + quote(STATRET_CLI) + " " + args +
                          " >>commands.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) { return json::parse(read_file(p.string())); }

// ---- 1 ---------------------------------------------------------------------
Outcome sparsemax_oracle() {
  const auto start = Clock::now();
  Rng rng(1);
  std::uniform_int_distribution<int> dim(1, 6);
  std::normal_distribution<double> value(0.0, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> z(static_cast<std::size_t>(dim(rng)));
    for (double& v : z) v = value(rng);
    const auto got = ops::sparsemax(z);
    const auto want = testing::sparsemax_oracle(z);
    for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-9 && secs < 5.0, "max |diff| " + sci(worst) + ", " + fmt(secs, 3) + " s"};
}

// ---- 2 ---------------------------------------------------------------------
Outcome gradient_fidelity() {
  const auto vocab = testing::tiny_vocabulary(14);
  const std::vector<TokenId> query{2, 5, 7, 11};
  const std::vector<Article> group{testing::make_article({{2, 3, 4}, {5, 6}}),
                                   testing::make_article({{7, 8, 9, 2}, {3, 10}}),
                                   testing::make_article({{11, 4}, {6, 12, 13}})};
  GradCheckOptions opts;
  opts.eps = 1e-5;
  opts.tol = 1e-4;
  bool ok = true;
  std::string detail;
  for (auto kind : {ModelKind::kCnnDot, ModelKind::kGeneralAttnHead}) {
    Model m = Model::create(testing::tiny_config(kind), vocab, 1);
    const auto good = check_gradients(testing::group_loss_fn(m.config(), query, group), m.params(), opts);
    const auto flipped = check_gradients(
        testing::group_loss_fn(m.config(), query, group, param_name::kConvKernel), m.params(), opts);
    double worst = 0.0;
    for (const auto& w : good.worst_per_param) worst = std::max(worst, w.rel_error);
    ok = ok && good.passed && !flipped.passed;
    detail += to_string(kind) + ": " + std::to_string(good.checked) + " scalars, worst rel " +
              sci(worst) + ", flipped kernel " + (flipped.passed ? "missed" : "detected") + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// ---- 3 ---------------------------------------------------------------------
Outcome sparsemax_sparsity() {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0), gap(1.0, 3.0);
  bool ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> z(2 + static_cast<std::size_t>(trial % 7));
    for (double& v : z) v = u(rng);
    const std::size_t top = static_cast<std::size_t>(trial) % z.size();
    double second = -1e300;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (i != top) second = std::max(second, z[i]);
    z[top] = second + (trial % 10 == 0 ? 1.0 : gap(rng));
    const auto p = ops::sparsemax(z);
    for (std::size_t i = 0; i < z.size(); ++i) ok = ok && p[i] == (i == top ? 1.0 : 0.0);
  }
  for (std::size_t n = 1; n <= 10; ++n) {
    const auto p = ops::sparsemax(std::vector<double>(n, -2.5));
    for (double v : p) ok = ok && std::abs(v - 1.0 / static_cast<double>(n)) <= 1e-15;
  }
  return {ok, "1000 gapped vectors one-hot, uniform inputs n=1..10"};
}

// ---- 4 ---------------------------------------------------------------------
Outcome bm25_oracle() {
  Rng rng(4);
  std::size_t mismatches = 0, checked = 0;
  for (int corpus = 0; corpus < 20; ++corpus) {
    std::uniform_int_distribution<std::size_t> len(1, 12), word(0, 14), pick(0, 49);
    std::vector<IndexDocument> docs;
    for (std::size_t d = 0; d < 50; ++d) {
      IndexDocument doc{static_cast<ArticleRef>(d), {}};
      if (d > 0 && d % 7 == 0) {
        doc.tokens = docs[pick(rng) % d].tokens;  // forces ties
      } else {
        for (std::size_t i = len(rng); i > 0; --i) doc.tokens.push_back("t" + std::to_string(word(rng)));
      }
      docs.push_back(std::move(doc));
    }
    const auto index = InvertedIndex::build(docs);
    testing::Bm25Oracle oracle;
    for (const auto& d : docs) oracle.docs.push_back(d.tokens);
    for (int q = 0; q < 25; ++q) {
      std::vector<std::string> query;
      for (std::size_t i = 1 + static_cast<std::size_t>(q % 4); i > 0; --i)
        query.push_back("t" + std::to_string(word(rng) + 2));
      const auto want = oracle.rank(query);
      const auto got = index.top_n(query, 50).candidates;
      ++checked;
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i)
        same = got[i].ref == want[i].first && std::abs(got[i].lexical_score - want[i].second) <= 1e-12;
      mismatches += !same;
    }
  }
  const std::vector<IndexDocument> one{{0, {"a"}}};
  const double s = InvertedIndex::build(one).score(std::vector<std::string>{"a"}, 0);
  const double err = std::abs(s - std::log(4.0 / 3.0));
  return {mismatches == 0 && err <= 1e-10, std::to_string(checked) + " queries on 20 corpora, " +
                                               std::to_string(mismatches) + " mismatches; ln(4/3) error " + sci(err)};
}

// ---- 5 ---------------------------------------------------------------------
Outcome fusion_identities() {
  testing::SyntheticFixture fx({});
  ModelConfig cfg;
  cfg.encoder.embed_dim = 16;
  cfg.encoder.filters = 16;
  cfg.encoder.attention_dim = 8;
  const Model model = Model::create(cfg, fx.corpus.vocabulary(), 5);
  Retriever r(fx.corpus, fx.index, &model);
  PipelineConfig p;
  p.n_filter = p.top_k = 30;
  p.alpha_fuse = 0.0;
  const auto lexical = r.retrieve_all(fx.all, p);
  p.alpha_fuse = 1.0;
  const auto deep = r.retrieve_all(fx.all, p);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < fx.all.queries.size(); ++i) {
    const auto bm25 = fx.index.top_n(fx.all.queries[i].tokens, 30).candidates;
    bool same = lexical[i].ranked.size() == bm25.size();
    for (std::size_t j = 0; same && j < bm25.size(); ++j) same = lexical[i].ranked[j].ref == bm25[j].ref;
    auto by_deep = deep[i].ranked;
    std::sort(by_deep.begin(), by_deep.end(), [](const RankedArticle& a, const RankedArticle& b) {
      return a.s_deep != b.s_deep ? a.s_deep > b.s_deep : a.ref < b.ref;
    });
    for (std::size_t j = 0; same && j < by_deep.size(); ++j) same = deep[i].ranked[j].ref == by_deep[j].ref;
    bad += !same;
  }
  return {bad == 0 && fx.all.queries.size() == 100,
          std::to_string(fx.all.queries.size()) + " queries, " + std::to_string(bad) + " ordering mismatches"};
}

// ---- 6 ---------------------------------------------------------------------
Outcome metric_correctness() {
  bool ok = std::abs(f2_score(0.5, 1.0) - 0.8333333333) <= 1e-9;
  const std::vector<std::string> run{"x", "gold"}, rel{"gold"};
  const double ndcg = ndcg_at_k(run, rel, 2);
  ok = ok && std::abs(ndcg - 0.6309) <= 1e-4;

  const auto judgments = QuerySet::parse_jsonl(
      R"({"query_id":"q1","text":"a","relevant":[["L","1"],["L","2"]]})"
      "\n"
      R"({"query_id":"q2","text":"b","relevant":[["L","3"]]})",
      nullptr);
  const std::size_t k1[] = {1};
  const auto rep = evaluate_run(Run::parse("q1 Q0 L:1 1 1 t\nq2 Q0 L:3 1 1 t\n"), judgments, k1)[0];
  const double pooled = f2_score(rep.macro.precision, rep.macro.recall);
  ok = ok && std::abs(rep.macro.f2 - pooled) > 1e-3;

  Rng rng(6);
  std::uniform_int_distribution<int> n_rel(1, 4), depth(0, 12), doc(0, 19);
  const std::size_t ks[] = {1, 3, 5, 10};
  std::size_t disagreements = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::set<std::string> rel_ids;
    for (int i = n_rel(rng); i > 0; --i) rel_ids.insert(std::to_string(doc(rng)));
    json jr = json::array();
    std::vector<std::string> relevant;
    for (const auto& r : rel_ids) jr.push_back({"L", r}), relevant.push_back("L:" + r);
    const auto qs = QuerySet::parse_jsonl(json{{"query_id", "q"}, {"text", "x"}, {"relevant", jr}}.dump(), nullptr);
    std::vector<std::string> docs;
    for (int i = 0; i < 20; ++i) docs.push_back("L:" + std::to_string(i));
    std::shuffle(docs.begin(), docs.end(), rng);
    docs.resize(static_cast<std::size_t>(depth(rng)));
    std::string text;
    for (std::size_t i = 0; i < docs.size(); ++i) text += format_run_line("q", docs[i], i + 1, 1.0, "r") + "\n";
    for (const auto& r : evaluate_run(Run::parse(text), qs, ks)) {
      const auto want = testing::metric_oracle(docs, relevant, r.k);
      const auto& got = r.per_query.at("q");
      disagreements += std::abs(got.f2 - want.f2) > 1e-12 || std::abs(got.ndcg - want.ndcg) > 1e-12 ||
                       std::abs(got.precision - want.precision) > 1e-12 ||
                       std::abs(got.recall - want.recall) > 1e-12;
    }
  }
  ok = ok && disagreements == 0;
  return {ok, "F2(0.5,1)=" + fmt(f2_score(0.5, 1.0), 6) + ", NDCG@2=" + fmt(ndcg, 6) + ", macro " +
                  fmt(rep.macro.f2) + " vs pooled " + fmt(pooled) + ", " + std::to_string(disagreements) +
                  " oracle disagreements over 500 runs"};
}

// ---- 7 ---------------------------------------------------------------------
struct E2E {
  double bm25_test = 0, fused_test = 0, fused_train = 0, alpha = 0, seconds = 0;
  std::size_t epochs = 0, best_epoch = 0;
  bool ran = false;
};

double macro_f2_at_1(const fs::path& dir, const std::string& eval_file) {
  return read_json(dir / eval_file)[0].at("macro_f2").get<double>();
}

constexpr const char* kE2eNFilter = "5";

E2E run_end_to_end(const fs::path& dir) {
  E2E e;
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto start = Clock::now();
  const std::string nf = std::string(" --n-filter ") + kE2eNFilter;
  const std::vector<std::string> steps = {
      "--seed 7 gen-synthetic --output-dir syn --articles 200 --queries 100 --synonym-rate 0.5",
      "ingest --input syn/corpus.jsonl --output store.json",
      "index --corpus store.json --output index.json",
      "--seed 1 make-train --corpus store.json --index index.json --queries syn/train.jsonl --output train_set.json "
      "--n-neg 4",
      "--seed 1 train --corpus store.json --index index.json --train-set train_set.json --valid syn/valid.jsonl "
      "--output model.json --log train_log.jsonl --model-kind cnn_dot --embed-dim 64 --filters 64 "
      "--attention-dim 32" + nf,
      "sweep-alpha --corpus store.json --index index.json --model model.json --queries syn/valid.jsonl "
      "--output sweep.tsv --summary sweep.json" + nf,
      "retrieve --corpus store.json --index index.json --queries syn/test.jsonl --output bm25_test.run --top-k 1" + nf,
      "evaluate --run bm25_test.run --queries syn/test.jsonl --k 1 --output bm25_test.json"};
  for (const auto& s : steps)
    if (cli(dir, s) != 0) return e;
  e.alpha = read_json(dir / "sweep.json").at("best_alpha").get<double>();
  const std::string alpha = " --alpha " + fmt(e.alpha, 6);
  for (const std::string split : {"test", "train"}) {
    if (cli(dir, "retrieve --corpus store.json --index index.json --model model.json --queries syn/" + split +
                     ".jsonl --output fused_" + split + ".run --top-k 1" + nf + alpha) != 0 ||
        cli(dir, "evaluate --run fused_" + split + ".run --queries syn/" + split + ".jsonl --k 1 --output fused_" +
                     split + ".json") != 0)
      return e;
  }
  e.seconds = seconds_since(start);
  e.bm25_test = macro_f2_at_1(dir, "bm25_test.json");
  e.fused_test = macro_f2_at_1(dir, "fused_test.json");
  e.fused_train = macro_f2_at_1(dir, "fused_train.json");
  const auto meta = read_json(dir / "model.json").at("metadata").at("training");
  e.epochs = meta.at("history").size();
  e.best_epoch = meta.at("best_epoch").get<std::size_t>();
  e.ran = true;
  return e;
}

Outcome end_to_end(const fs::path& work) {
  const E2E e = run_end_to_end(work / "e2e");
  if (!e.ran) return {false, "pipeline command failed; see " + (work / "e2e" / "commands.log").string()};
  const double gain = e.fused_test - e.bm25_test;
  const bool ok = gain >= 0.15 && e.fused_train >= 0.90 && e.seconds < 600.0;
  return {ok, "test BM25 " + fmt(e.bm25_test) + ", fused " + fmt(e.fused_test) + " (gain " + fmt(gain) +
                  ", need >= 0.15); train fused " + fmt(e.fused_train) + " (need >= 0.90); alpha " +
                  fmt(e.alpha, 2) + ", " + std::to_string(e.epochs) + " epochs (best " +
                  std::to_string(e.best_epoch) + "), " + fmt(e.seconds, 1) + " s"};
}

// ---- 8 ---------------------------------------------------------------------
Outcome reference_profile() {
  const auto vocab = testing::tiny_vocabulary(14);
  const std::vector<TokenId> query{2, 5, 7, 11};
  const std::vector<Article> group{testing::make_article({{2, 3, 4}, {5, 6}}),
                                   testing::make_article({{7, 8, 9, 2}, {3, 10}})};
  std::vector<const Article*> ptrs{&group[0], &group[1]};
  bool ok = true;
  std::string detail;
  for (auto kind : {ModelKind::kCnnDot, ModelKind::kGeneralAttnHead}) {
    const ModelConfig cfg = reference_cnn_config(kind);
    Model m = Model::create(cfg, vocab, 8);
    Rng drop(1);
    m.params().zero_grad();
    const double loss = m.group_loss(query, ptrs, &drop, &m.params());
    LossFn fn = [&](ModelParams& params, bool with_grad) {
      Rng r(17);
      return Model::group_loss(cfg, params, query, ptrs, &r, with_grad ? &params : nullptr);
    };
    GradCheckOptions opts;
    opts.max_per_tensor = 16;
    const auto rep = check_gradients(fn, m.params(), opts);
    ok = ok && std::isfinite(loss) && rep.passed;
    detail += to_string(kind) + ": " + std::to_string(m.params().scalar_count()) + " params, loss " + fmt(loss) +
              ", gradcheck " + (rep.passed ? "pass" : "FAIL") + " (" + std::to_string(rep.checked) +
              " sampled); ";
  }
  const TransformerProfile tp;
  detail += "transformer profile " + std::to_string(tp.hidden_layers) + "x" + std::to_string(tp.hidden_size) +
            ", " + std::to_string(tp.attention_heads) + " heads, " + std::to_string(tp.max_position_embeddings) +
            " positions, dropout " + fmt(tp.dropout, 1) + " (recorded)";
  return {ok, detail};
}

// ---- 9 ---------------------------------------------------------------------
Outcome invariance_contrast() {
  const auto vocab = testing::tiny_vocabulary(14);
  const Article article = testing::make_article({{2, 3, 4}, {9, 10, 11}});
  const Model dot = Model::create(testing::tiny_config(ModelKind::kCnnDot), vocab, 9);
  const auto pre = dot.precompute(article);
  Rng rng(9);
  std::uniform_int_distribution<TokenId> word(2, 15);
  const auto ref = dot.encode_article(dot.encode_query(std::vector<TokenId>{2, 3}), pre);
  bool invariant = true;
  for (int q = 0; q < 10; ++q) {
    std::vector<TokenId> ids(2 + static_cast<std::size_t>(q % 3));
    for (auto& id : ids) id = word(rng);
    const auto enc = dot.encode_article(dot.encode_query(ids), pre);
    invariant = invariant && enc.vector == ref.vector && enc.sentence_weights == ref.sentence_weights;
  }
  const Model attn = Model::create(testing::tiny_config(ModelKind::kGeneralAttnHead), vocab, 9);
  const auto apre = attn.precompute(article);
  const auto w1 = attn.encode_article(attn.encode_query(std::vector<TokenId>{2, 3, 4}), apre).sentence_weights;
  const auto w2 = attn.encode_article(attn.encode_query(std::vector<TokenId>{9, 10, 11}), apre).sentence_weights;
  const bool varies = w1 != w2;
  return {invariant && varies, std::string("sparse_avg identical over 10 queries: ") + (invariant ? "yes" : "no") +
                                   "; general_attn weights [" + fmt(w1[0]) + ", " + fmt(w1[1]) + "] vs [" +
                                   fmt(w2[0]) + ", " + fmt(w2[1]) + "]"};
}

// ---- 10 --------------------------------------------------------------------
Outcome determinism(const fs::path& work) {
  const fs::path dir = work / "replay";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string small = " --embed-dim 8 --filters 8 --attention-dim 4 --max-epochs 3 --n-filter 10";
  const std::vector<std::string> steps = {
      "--seed 3 gen-synthetic --output-dir syn --articles 60 --queries 20",
      "ingest --input syn/corpus.jsonl --output store.json",
      "index --corpus store.json --output index.json --queries syn/test.jsonl --run bm25.run",
      "--seed 3 make-train --corpus store.json --index index.json --queries syn/train.jsonl --output ts.json",
      "--seed 3 train --corpus store.json --index index.json --train-set ts.json --valid syn/valid.jsonl "
      "--output model.json --log log.jsonl" + small,
      "--seed 3 --threads 2 train --corpus store.json --index index.json --train-set ts.json "
      "--valid syn/valid.jsonl --output model_gen.json --model-kind general_attn_head" + small,
      "sweep-alpha --corpus store.json --index index.json --model model.json --queries syn/valid.jsonl "
      "--output sweep.tsv --summary sweep.json --n-filter 10",
      "retrieve --corpus store.json --index index.json --model model_gen.json --queries syn/test.jsonl "
      "--output fused.run --report fused.json --n-filter 10 --top-k 5",
      "evaluate --run fused.run --queries syn/test.jsonl --k 1,5 --output eval.json",
      "explain --corpus store.json --index index.json --model model_gen.json --queries syn/queries.jsonl "
      "--query-id Q0001 --article L000:1 --output explain.json --html explain.html"};
  for (const auto& s : steps)
    if (cli(dir, s) != 0) return {false, "command failed: " + s};

  std::vector<fs::path> manifests;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name == "manifest.json" || name.ends_with(".manifest.json")) manifests.push_back(entry.path());
  }
  std::sort(manifests.begin(), manifests.end());
  std::size_t outputs = 0;
  std::vector<std::string> differing;
  for (const auto& mpath : manifests) {
    const json m = read_json(mpath);
    std::string cmd;
    for (const auto& a : m.at("argv")) cmd += (cmd.empty() ? "" : " ") + quote(a.get<std::string>());
    const std::string cwd = m.at("cwd").get<std::string>();
    const int status = std::system(("cd " + quote(cwd) + " && " + cmd + " >>replay.log 2>&1").c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "replay failed: " + cmd};
    for (const auto& [path, hash] : m.at("outputs").items()) {
      ++outputs;
      if (sha256_file((fs::path(cwd) / path).string()) != hash.get<std::string>()) differing.push_back(path);
    }
  }
  std::string detail = std::to_string(manifests.size()) + " manifests replayed, " + std::to_string(outputs) +
                       " outputs compared";
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty() && manifests.size() == steps.size(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  std::string work = (fs::temp_directory_path() / "statret_acceptance").string();
  app.add_option("--only", only, "Criteria to run (default all)")->check(CLI::Range(1, 10));
  app.add_option("--work", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path work_dir = fs::absolute(work);
  fs::create_directories(work_dir);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sparsemax oracle", sparsemax_oracle},
      {"gradient fidelity", gradient_fidelity},
      {"sparsemax sparsity", sparsemax_sparsity},
      {"BM25 oracle", bm25_oracle},
      {"fusion identities", fusion_identities},
      {"metric correctness", metric_correctness},
      {"end-to-end synthetic experiment", [&] { return end_to_end(work_dir); }},
      {"reference hyperparameters", reference_profile},
      {"query invariance contrast", invariance_contrast},
      {"determinism", [&] { return determinism(work_dir); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
