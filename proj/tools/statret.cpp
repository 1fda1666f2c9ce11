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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "statret/statret.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
  statret_status status;
  std::string message;
};

void check(statret_status s) {
  if (s != STATRET_OK) throw Failure{s, statret_last_error()};
}

[[noreturn]] void invalid(const std::string& message) { throw Failure{STATRET_INVALID, message}; }

class CString {
 public:
  CString() = default;
  CString(const CString&) = delete;
  CString& operator=(const CString&) = delete;
  ~CString() { statret_string_free(p_); }
  char** out() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p_) Free(p_);
  }
  T** out() { return &p_; }
  T* get() const { return p_; }

 private:
  T* p_ = nullptr;
};

using Corpus = Handle<statret_corpus, statret_corpus_free>;
using Queries = Handle<statret_queries, statret_queries_free>;
using Index = Handle<statret_index, statret_index_free>;
using ModelH = Handle<statret_model, statret_model_free>;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) invalid("cannot write " + path);
  out << text;
  if (!out.flush()) invalid("cannot write " + path);
}

std::string sha256(const std::string& path) {
  CString hex;
  check(statret_file_sha256(path.c_str(), hex.out()));
  return hex.str();
}

std::string options_json(const json& j) { return j.dump(); }

// Per-invocation bookkeeping for the run manifest.
struct Context {
  std::vector<std::string> argv;
  CLI::App* app = nullptr;
  CLI::App* command = nullptr;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string checkpoint;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void input(const std::string& path) {
    if (!path.empty()) inputs.push_back(path);
  }
  void output(const std::string& path) {
    if (!path.empty()) outputs.push_back(path);
  }

  void check_paths() const {
    for (const auto& o : outputs) {
      const auto out = fs::weakly_canonical(o);
      for (const auto& i : inputs)
        if (fs::weakly_canonical(i) == out) invalid("output " + o + " would overwrite input " + i);
    }
  }
};

json option_snapshot(const CLI::App& app) {
  json j = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      j[name] = r.size() == 1 ? json(r[0]) : json(r);
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

void write_manifest(const Context& ctx, const std::string& manifest_path) {
  json inputs = json::object(), outputs = json::object();
  for (const auto& p : ctx.inputs) inputs[p] = sha256(p);
  for (const auto& p : ctx.outputs) outputs[p] = sha256(p);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  json m = {{"tool", "statret"},
            {"version", statret_version()},
            {"command", ctx.command->get_name()},
            {"argv", ctx.argv},
            {"cwd", fs::current_path().string()},
            {"config", {{"global", option_snapshot(*ctx.app)}, {"command", option_snapshot(*ctx.command)}}},
            {"inputs", inputs},
            {"outputs", outputs},
            {"checkpoint_sha256", ctx.checkpoint.empty() ? json() : json(sha256(ctx.checkpoint))},
            {"timings", {{"wall_seconds", secs}}}};
  write_text(manifest_path, m.dump(2) + "\n");
}

std::string manifest_for(const std::string& output) { return output + ".manifest.json"; }

void load_corpus(Context& ctx, const std::string& path, Corpus& corpus) {
  ctx.input(path);
  check(statret_corpus_load(path.c_str(), corpus.out()));
}

void load_index(Context& ctx, const Corpus& corpus, const std::string& path, Index& index) {
  ctx.input(path);
  check(statret_index_load(corpus.get(), path.c_str(), index.out()));
}

void load_model(Context& ctx, const Corpus& corpus, const std::string& path, ModelH& model) {
  ctx.input(path);
  ctx.checkpoint = path;
  check(statret_model_load(corpus.get(), path.c_str(), model.out()));
}

void load_queries(Context& ctx, const Corpus* corpus, const std::string& path, Queries& queries) {
  ctx.input(path);
  check(statret_queries_load(corpus ? corpus->get() : nullptr, path.c_str(), queries.out()));
}

void print_epoch(const char* line, void*) { std::cerr << line << "\n"; }

// ---- commands -------------------------------------------------------------

struct IngestArgs {
  std::string input, output, profile = "spaced";
  int min_frequency = 2;
  std::size_t max_sentences = 256;
};

void run_ingest(Context& ctx, const IngestArgs& a) {
  ctx.input(a.input);
  ctx.output(a.output);
  ctx.check_paths();
  Corpus corpus;
  check(statret_corpus_ingest(
      a.input.c_str(),
      options_json({{"profile", a.profile}, {"min_frequency", a.min_frequency}, {"max_sentences", a.max_sentences}})
          .c_str(),
      corpus.out()));
  check(statret_corpus_save(corpus.get(), a.output.c_str()));
  CString report;
  check(statret_corpus_report(corpus.get(), report.out()));
  std::cout << report.str() << "\n";
  write_manifest(ctx, manifest_for(a.output));
}

struct IndexArgs {
  std::string corpus, output, queries, run, tag = "bm25";
  double k1 = 1.2, b = 0.75;
  std::size_t top_n = 1000;
};

void run_index(Context& ctx, const IndexArgs& a) {
  if (a.queries.empty() != a.run.empty()) invalid("--queries and --run must be given together");
  Corpus corpus;
  load_corpus(ctx, a.corpus, corpus);
  ctx.output(a.output);
  ctx.output(a.run);
  ctx.check_paths();
  Index index;
  check(statret_index_build(corpus.get(), options_json({{"k1", a.k1}, {"b", a.b}}).c_str(), index.out()));
  check(statret_index_save(index.get(), a.output.c_str()));
  if (!a.queries.empty()) {
    Queries queries;
    load_queries(ctx, &corpus, a.queries, queries);
    CString run;
    check(statret_index_run(corpus.get(), index.get(), queries.get(), a.top_n, a.tag.c_str(), run.out()));
    write_text(a.run, run.str());
  }
  write_manifest(ctx, manifest_for(a.output));
}

struct MakeTrainArgs {
  std::string corpus, index, queries, output, model_kind = "cnn_dot";
  std::size_t n_neg = 4, pool = 1000;
  double mix = -1.0;  // negative: 0.5 for cnn_dot, 1.0 for general_attn_head
};

void run_make_train(Context& ctx, const MakeTrainArgs& a) {
  Corpus corpus;
  Index index;
  Queries queries;
  load_corpus(ctx, a.corpus, corpus);
  load_index(ctx, corpus, a.index, index);
  load_queries(ctx, &corpus, a.queries, queries);
  ctx.output(a.output);
  ctx.check_paths();
  if (a.model_kind != "cnn_dot" && a.model_kind != "general_attn_head")
    invalid("--model-kind must be cnn_dot or general_attn_head");
  const double mix = a.mix >= 0.0 ? a.mix : (a.model_kind == "cnn_dot" ? 0.5 : 1.0);
  CString set;
  check(statret_training_set_build(
      corpus.get(), index.get(), queries.get(),
      options_json({{"n_neg", a.n_neg}, {"lexical_random_mix", mix}, {"lexical_pool", a.pool}, {"seed", ctx.seed}})
          .c_str(),
      set.out()));
  write_text(a.output, set.str());
  write_manifest(ctx, manifest_for(a.output));
}

struct TrainArgs {
  std::string corpus, index, train_set, valid, output, log, init;
  std::string model_kind = "cnn_dot", normalization = "minmax";
  std::size_t embed_dim = 512, filters = 512, half_window = 1, attention_dim = 200;
  double dropout = 0.2, lr = 1e-3;
  bool normalized_word_scores = false, head_uses_query = false;
  std::size_t batch_size = 16, max_epochs = 100, patience = 5, n_filter = 0;
};

void run_train(Context& ctx, const TrainArgs& a) {
  Corpus corpus;
  Index index;
  Queries valid;
  load_corpus(ctx, a.corpus, corpus);
  load_index(ctx, corpus, a.index, index);
  load_queries(ctx, &corpus, a.valid, valid);
  ctx.input(a.train_set);
  ModelH initial;
  if (!a.init.empty()) load_model(ctx, corpus, a.init, initial);
  ctx.output(a.output);
  ctx.output(a.log);
  ctx.check_paths();

  json validation = {{"normalization", a.normalization}};
  if (a.n_filter) validation["n_filter"] = a.n_filter;
  json opts = {{"model",
                {{"model_kind", a.model_kind},
                 {"embed_dim", a.embed_dim},
                 {"filters", a.filters},
                 {"half_window", a.half_window},
                 {"attention_dim", a.attention_dim},
                 {"dropout", a.dropout},
                 {"normalized_word_scores", a.normalized_word_scores},
                 {"head_uses_query", a.head_uses_query}}},
               {"optim",
                {{"learning_rate", a.lr},
                 {"batch_size", a.batch_size},
                 {"max_epochs", a.max_epochs},
                 {"patience", a.patience},
                 {"seed", ctx.seed}}},
               {"validation", validation},
               {"threads", ctx.threads}};
  const std::string training = read_text(a.train_set);
  ModelH model;
  CString log;
  check(statret_train(corpus.get(), index.get(), training.c_str(), valid.get(), options_json(opts).c_str(),
                      initial.get(), print_epoch, nullptr, model.out(), log.out()));
  check(statret_model_save(model.get(), a.output.c_str()));
  if (!a.log.empty()) write_text(a.log, log.str());
  write_manifest(ctx, manifest_for(a.output));
}

struct RetrieveArgs {
  std::string corpus, index, model, queries, output, report, normalization = "minmax", tag;
  double alpha = -1.0;
  std::size_t n_filter = 0, top_k = 20;
};

void run_retrieve(Context& ctx, const RetrieveArgs& a) {
  Corpus corpus;
  Index index;
  ModelH model;
  Queries queries;
  load_corpus(ctx, a.corpus, corpus);
  load_index(ctx, corpus, a.index, index);
  if (!a.model.empty()) load_model(ctx, corpus, a.model, model);
  load_queries(ctx, &corpus, a.queries, queries);
  ctx.output(a.output);
  ctx.output(a.report);
  ctx.check_paths();
  json opts = {{"top_k", a.top_k}, {"normalization", a.normalization}, {"threads", ctx.threads}};
  if (a.alpha >= 0.0) opts["alpha_fuse"] = a.alpha;
  if (a.n_filter) opts["n_filter"] = a.n_filter;
  if (!a.tag.empty()) opts["tag"] = a.tag;
  CString run, report;
  check(statret_retrieve(corpus.get(), index.get(), model.get(), queries.get(), options_json(opts).c_str(),
                         run.out(), report.out()));
  write_text(a.output, run.str());
  if (!a.report.empty()) write_text(a.report, report.str());
  write_manifest(ctx, manifest_for(a.output));
}

struct EvaluateArgs {
  std::string run, queries, output;
  std::vector<std::size_t> k = {1, 20};
};

void run_evaluate(Context& ctx, const EvaluateArgs& a) {
  Queries judgments;
  ctx.input(a.run);
  load_queries(ctx, nullptr, a.queries, judgments);
  ctx.output(a.output);
  ctx.check_paths();
  const std::string run = read_text(a.run);
  CString report, table;
  check(statret_evaluate(run.c_str(), judgments.get(), a.k.data(), a.k.size(), report.out(), table.out()));
  std::cout << table.str();
  if (!a.output.empty()) {
    write_text(a.output, report.str());
    write_manifest(ctx, manifest_for(a.output));
  }
}

struct SweepArgs {
  std::string corpus, index, model, queries, output, summary, normalization = "minmax";
  double grid_step = 0.1;
  std::size_t n_filter = 0;
};

void run_sweep(Context& ctx, const SweepArgs& a) {
  Corpus corpus;
  Index index;
  ModelH model;
  Queries queries;
  load_corpus(ctx, a.corpus, corpus);
  load_index(ctx, corpus, a.index, index);
  load_model(ctx, corpus, a.model, model);
  load_queries(ctx, &corpus, a.queries, queries);
  ctx.output(a.output);
  ctx.output(a.summary);
  ctx.check_paths();
  json opts = {{"grid_step", a.grid_step}, {"normalization", a.normalization}, {"threads", ctx.threads}};
  if (a.n_filter) opts["n_filter"] = a.n_filter;
  CString tsv, summary;
  check(statret_sweep_alpha(corpus.get(), index.get(), model.get(), queries.get(), options_json(opts).c_str(),
                            tsv.out(), summary.out()));
  write_text(a.output, tsv.str());
  if (!a.summary.empty()) write_text(a.summary, summary.str() + "\n");
  std::cout << summary.str() << "\n";
  write_manifest(ctx, manifest_for(a.output));
}

struct ExplainArgs {
  std::string corpus, index, model, queries, query_id, query_text, article, output, html;
};

void run_explain(Context& ctx, const ExplainArgs& a) {
  std::string text = a.query_text;
  std::string qid = a.query_id;
  if (text.empty()) {
    if (a.queries.empty() || a.query_id.empty()) invalid("give --query-text, or --queries with --query-id");
    ctx.input(a.queries);
    std::istringstream lines(read_text(a.queries));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line, nullptr, false);
      if (j.is_object() && j.value("query_id", "") == a.query_id) {
        text = j.value("text", "");
        break;
      }
    }
    if (text.empty()) invalid("query " + a.query_id + " not found in " + a.queries);
  }
  Corpus corpus;
  Index index;
  ModelH model;
  load_corpus(ctx, a.corpus, corpus);
  load_index(ctx, corpus, a.index, index);
  load_model(ctx, corpus, a.model, model);
  ctx.output(a.output);
  ctx.output(a.html);
  ctx.check_paths();
  CString expl, html;
  check(statret_explain(corpus.get(), index.get(), model.get(), qid.c_str(), text.c_str(), a.article.c_str(),
                        expl.out(), html.out()));
  write_text(a.output, expl.str());
  if (!a.html.empty()) write_text(a.html, html.str());
  write_manifest(ctx, manifest_for(a.output));
}

struct GenArgs {
  std::string output_dir;
  std::size_t articles = 200, queries = 100, concepts = 0, context_words = 0;
  double synonym_rate = 0.5, test_fraction = 0.2, valid_fraction = 0.1;
};

void run_gen(Context& ctx, const GenArgs& a) {
  json opts = {{"articles", a.articles},         {"queries", a.queries},
               {"seed", ctx.seed},               {"synonym_rate", a.synonym_rate},
               {"concepts", a.concepts},         {"context_words", a.context_words},
               {"test_fraction", a.test_fraction},
               {"valid_fraction", a.valid_fraction}};
  CString bundle;
  check(statret_gen_synthetic(options_json(opts).c_str(), bundle.out()));
  const json b = json::parse(bundle.str());
  std::error_code ec;
  fs::create_directories(a.output_dir, ec);
  if (ec) invalid("cannot create " + a.output_dir + ": " + ec.message());
  const std::pair<const char*, const char*> files[] = {{"corpus", "corpus.jsonl"}, {"queries", "queries.jsonl"},
                                                       {"train", "train.jsonl"},   {"valid", "valid.jsonl"},
                                                       {"test", "test.jsonl"},     {"map", "map.json"}};
  for (const auto& [key, name] : files) {
    const std::string path = (fs::path(a.output_dir) / name).string();
    write_text(path, b.at(key).get<std::string>());
    ctx.output(path);
  }
  write_manifest(ctx, (fs::path(a.output_dir) / "manifest.json").string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage statute retrieval: BM25 filtering and attentive neural reranking."};
  app.name("statret");
  app.set_version_flag("--version", statret_version());
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
  app.require_subcommand(1, 1);
  app.fallthrough();

  Context ctx;
  ctx.argv.assign(argv, argv + argc);
  ctx.app = &app;
  app.add_option("--seed", ctx.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", ctx.threads, "Maximum worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse corpus JSONL into a corpus store");
  c_ingest->add_option("--input", ingest.input, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--output", ingest.output, "Corpus store file")->required();
  c_ingest->add_option("--profile", ingest.profile, "Tokenizer profile: spaced or non-spaced:N")
      ->capture_default_str();
  c_ingest->add_option("--min-frequency", ingest.min_frequency, "Vocabulary frequency cutoff")
      ->capture_default_str();
  c_ingest->add_option("--max-sentences", ingest.max_sentences, "Sentences kept per article")
      ->capture_default_str();

  IndexArgs index;
  auto* c_index = app.add_subcommand("index", "Build the BM25 inverted index");
  c_index->add_option("--corpus", index.corpus, "Corpus store")->required()->check(CLI::ExistingFile);
  c_index->add_option("--output", index.output, "Index file")->required();
  c_index->add_option("--k1", index.k1, "BM25 k1")->capture_default_str();
  c_index->add_option("--b", index.b, "BM25 b")->capture_default_str();
  c_index->add_option("--queries", index.queries, "Query JSONL to rank with BM25")->check(CLI::ExistingFile);
  c_index->add_option("--run", index.run, "Run file for the BM25 ranking of --queries");
  c_index->add_option("--top-n", index.top_n, "Depth of the BM25 run")->capture_default_str();
  c_index->add_option("--tag", index.tag, "Run tag")->capture_default_str();

  MakeTrainArgs mt;
  auto* c_mt = app.add_subcommand("make-train", "Sample negatives and write a training set");
  c_mt->add_option("--corpus", mt.corpus, "Corpus store")->required()->check(CLI::ExistingFile);
  c_mt->add_option("--index", mt.index, "Index file")->required()->check(CLI::ExistingFile);
  c_mt->add_option("--queries", mt.queries, "Training query JSONL")->required()->check(CLI::ExistingFile);
  c_mt->add_option("--output", mt.output, "Training set file")->required();
  c_mt->add_option("--n-neg", mt.n_neg, "Negatives per positive")->capture_default_str();
  c_mt->add_option("--model-kind", mt.model_kind, "Model the set is for; picks the default --mix")
      ->capture_default_str();
  c_mt->add_option("--mix", mt.mix, "Share of negatives drawn from the BM25 ranking (negative = per model kind)")
      ->capture_default_str();
  c_mt->add_option("--pool", mt.pool, "BM25 depth for lexical negatives")->capture_default_str();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train the reranker");
  c_tr->add_option("--corpus", tr.corpus, "Corpus store")->required()->check(CLI::ExistingFile);
  c_tr->add_option("--index", tr.index, "Index file")->required()->check(CLI::ExistingFile);
  c_tr->add_option("--train-set", tr.train_set, "Training set from make-train")
      ->required()
      ->check(CLI::ExistingFile);
  c_tr->add_option("--valid", tr.valid, "Validation query JSONL")->required()->check(CLI::ExistingFile);
  c_tr->add_option("--output", tr.output, "Checkpoint file")->required();
  c_tr->add_option("--log", tr.log, "Training log JSONL");
  c_tr->add_option("--init", tr.init, "Checkpoint to continue from")->check(CLI::ExistingFile);
  c_tr->add_option("--model-kind", tr.model_kind, "cnn_dot or general_attn_head")->capture_default_str();
  c_tr->add_option("--embed-dim", tr.embed_dim, "Word embedding size")->capture_default_str();
  c_tr->add_option("--filters", tr.filters, "Convolution filters")->capture_default_str();
  c_tr->add_option("--half-window", tr.half_window, "Convolution half window K (width 2K+1)")
      ->capture_default_str();
  c_tr->add_option("--attention-dim", tr.attention_dim, "Attention hidden size")->capture_default_str();
  c_tr->add_option("--dropout", tr.dropout, "Embedding dropout rate")->capture_default_str();
  c_tr->add_flag("--normalized-word-scores", tr.normalized_word_scores,
                 "Average normalized word weights for sentence scores");
  c_tr->add_flag("--head-uses-query", tr.head_uses_query, "Feed the query vector to the classifier head");
  c_tr->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  c_tr->add_option("--batch-size", tr.batch_size, "Instances per update")->capture_default_str();
  c_tr->add_option("--max-epochs", tr.max_epochs, "Epoch limit")->capture_default_str();
  c_tr->add_option("--patience", tr.patience, "Epochs without improvement before stopping")
      ->capture_default_str();
  c_tr->add_option("--n-filter", tr.n_filter, "Lexical filter depth for validation (0 = per model kind)")
      ->capture_default_str();
  c_tr->add_option("--normalization", tr.normalization, "minmax, zscore or none")->capture_default_str();

  RetrieveArgs rt;
  auto* c_rt = app.add_subcommand("retrieve", "Rank articles for queries");
  c_rt->add_option("--corpus", rt.corpus, "Corpus store")->required()->check(CLI::ExistingFile);
  c_rt->add_option("--index", rt.index, "Index file")->required()->check(CLI::ExistingFile);
  c_rt->add_option("--model", rt.model, "Checkpoint (omit for BM25 only)")->check(CLI::ExistingFile);
  c_rt->add_option("--queries", rt.queries, "Query JSONL")->required()->check(CLI::ExistingFile);
  c_rt->add_option("--output", rt.output, "Run file")->required();
  c_rt->add_option("--report", rt.report, "Per-query diagnostics JSON");
  c_rt->add_option("--alpha", rt.alpha, "Fusion weight of the deep score (default 0.5, or 0 without a model)")
      ->check(CLI::Range(0.0, 1.0));
  c_rt->add_option("--n-filter", rt.n_filter, "Lexical candidates (0 = per model kind)")->capture_default_str();
  c_rt->add_option("--top-k", rt.top_k, "Articles written per query")->capture_default_str();
  c_rt->add_option("--normalization", rt.normalization, "minmax, zscore or none")->capture_default_str();
  c_rt->add_option("--tag", rt.tag, "Run tag");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score a run file against judgments");
  c_ev->add_option("--run", ev.run, "Run file")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--queries", ev.queries, "Query JSONL with judgments")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--k", ev.k, "Cutoffs")->delimiter(',')->capture_default_str();
  c_ev->add_option("--output", ev.output, "Report JSON");

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep-alpha", "Grid-search the fusion weight");
  c_sw->add_option("--corpus", sw.corpus, "Corpus store")->required()->check(CLI::ExistingFile);
  c_sw->add_option("--index", sw.index, "Index file")->required()->check(CLI::ExistingFile);
  c_sw->add_option("--model", sw.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  c_sw->add_option("--queries", sw.queries, "Query JSONL with judgments")->required()->check(CLI::ExistingFile);
  c_sw->add_option("--output", sw.output, "Sweep TSV")->required();
  c_sw->add_option("--summary", sw.summary, "Best alpha JSON");
  c_sw->add_option("--grid-step", sw.grid_step, "Alpha grid step")->capture_default_str();
  c_sw->add_option("--n-filter", sw.n_filter, "Lexical candidates (0 = per model kind)")->capture_default_str();
  c_sw->add_option("--normalization", sw.normalization, "minmax, zscore or none")->capture_default_str();

  ExplainArgs ex;
  auto* c_ex = app.add_subcommand("explain", "Export attention weights for a query and article");
  c_ex->add_option("--corpus", ex.corpus, "Corpus store")->required()->check(CLI::ExistingFile);
  c_ex->add_option("--index", ex.index, "Index file")->required()->check(CLI::ExistingFile);
  c_ex->add_option("--model", ex.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  c_ex->add_option("--queries", ex.queries, "Query JSONL to look up --query-id in")->check(CLI::ExistingFile);
  c_ex->add_option("--query-id", ex.query_id, "Query id");
  c_ex->add_option("--query-text", ex.query_text, "Query text");
  c_ex->add_option("--article", ex.article, "Article as law_id:article_id")->required();
  c_ex->add_option("--output", ex.output, "Explanation JSON")->required();
  c_ex->add_option("--html", ex.html, "Heatmap HTML");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-synthetic", "Generate a synthetic corpus with synonym-only gold articles");
  c_gen->add_option("--output-dir", gen.output_dir, "Directory for the generated files")->required();
  c_gen->add_option("--articles", gen.articles, "Articles")->capture_default_str();
  c_gen->add_option("--queries", gen.queries, "Queries")->capture_default_str();
  c_gen->add_option("--synonym-rate", gen.synonym_rate, "Share of queries answered only through synonyms")
      ->capture_default_str();
  c_gen->add_option("--concepts", gen.concepts, "Concept count (0 = derived from --queries)")
      ->capture_default_str();
  c_gen->add_option("--context-words", gen.context_words, "Context word pool size (0 = derived from --articles)")
      ->capture_default_str();
  c_gen->add_option("--test-fraction", gen.test_fraction, "Share of queries in the test split")
      ->capture_default_str();
  c_gen->add_option("--valid-fraction", gen.valid_fraction, "Share of queries in the validation split")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_ingest) ctx.command = c_ingest, run_ingest(ctx, ingest);
    else if (*c_index) ctx.command = c_index, run_index(ctx, index);
    else if (*c_mt) ctx.command = c_mt, run_make_train(ctx, mt);
    else if (*c_tr) ctx.command = c_tr, run_train(ctx, tr);
    else if (*c_rt) ctx.command = c_rt, run_retrieve(ctx, rt);
    else if (*c_ev) ctx.command = c_ev, run_evaluate(ctx, ev);
    else if (*c_sw) ctx.command = c_sw, run_sweep(ctx, sw);
    else if (*c_ex) ctx.command = c_ex, run_explain(ctx, ex);
    else if (*c_gen) ctx.command = c_gen, run_gen(ctx, gen);
  } catch (const Failure& f) {
    std::cerr << "statret: " << f.message << "\n";
    return f.status == STATRET_INVALID ? 1 : 2;
  } catch (const json::exception& e) {
    std::cerr << "statret: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "statret: internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
