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

#include "statret/statret.h"

#include <cstdlib>
#include <cstring>
#include <initializer_list>
#include <new>
#include <set>
#include <string>

#include "json.hpp"
#include "statret/bm25.hpp"
#include "statret/corpus.hpp"
#include "statret/error.hpp"
#include "statret/hash.hpp"
#include "statret/metrics.hpp"
#include "statret/model.hpp"
#include "statret/pipeline.hpp"
#include "statret/synthetic.hpp"
#include "statret/trainer.hpp"

using nlohmann::json;

struct statret_corpus {
  statret::CorpusStore store;
};
struct statret_queries {
  statret::QuerySet set;
};
struct statret_index {
  statret::InvertedIndex index;
};
struct statret_model {
  statret::Model model;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
statret_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return STATRET_OK;
  } catch (const statret::ValidationError& e) {
    g_last_error = e.what();
    return STATRET_INVALID;
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid options: ") + e.what();
    return STATRET_INVALID;
  } catch (const statret::InternalError& e) {
    g_last_error = e.what();
    return STATRET_INTERNAL;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return STATRET_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return STATRET_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return STATRET_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void set_out(char** dst, const std::string& s) {
  if (dst) *dst = dup(s);
}

template <typename T>
void require(const T* p, const char* what) {
  if (!p) throw statret::ValidationError(std::string(what) + " must not be null");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& scope) {
  if (!j.is_object()) throw statret::ValidationError(scope + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw statret::ValidationError(scope + ": unknown option '" + key + "'");
}

// Parses an options object and rejects keys outside `allowed`.
json options(const char* text, std::initializer_list<const char*> allowed) {
  json j = text && *text ? json::parse(text) : json::object();
  check_keys(j, allowed, "options");
  return j;
}

statret::PipelineConfig pipeline_config(const json& o, const statret::Model* model) {
  statret::PipelineConfig c;
  c.n_filter = o.value("n_filter", model ? statret::default_n_filter(model->config().kind) : std::size_t{1000});
  c.alpha_fuse = o.value("alpha_fuse", model ? 0.5 : 0.0);
  c.top_k = o.value("top_k", std::size_t{20});
  c.top_k = std::min(c.top_k, c.n_filter);
  if (o.contains("normalization"))
    c.normalization = statret::normalization_from_string(o.at("normalization").get<std::string>());
  return c;
}

void check_tag(const std::string& tag) {
  if (tag.empty() || tag.find_first_of(" \t\r\n") != std::string::npos)
    throw statret::ValidationError("run tag must be non-empty and free of whitespace");
}

}  // namespace

extern "C" {

const char* statret_version(void) { return "0.1.0"; }

const char* statret_last_error(void) { return g_last_error.c_str(); }

void statret_string_free(char* s) { std::free(s); }

statret_status statret_file_sha256(const char* path, char** hex) {
  return guard([&] {
    require(path, "path");
    set_out(hex, statret::sha256_file(path));
  });
}

statret_status statret_corpus_ingest(const char* jsonl_path, const char* options_json, statret_corpus** out) {
  return guard([&] {
    require(jsonl_path, "path");
    require(out, "out");
    json o = options(options_json, {"profile", "min_frequency", "max_sentences"});
    statret::IngestOptions opt;
    if (o.contains("profile")) opt.profile = statret::LanguageProfile::from_name(o.at("profile").get<std::string>());
    opt.min_frequency = o.value("min_frequency", opt.min_frequency);
    opt.max_sentences = o.value("max_sentences", opt.max_sentences);
    if (opt.min_frequency < 1) throw statret::ValidationError("min_frequency must be >= 1");
    if (opt.max_sentences < 1) throw statret::ValidationError("max_sentences must be >= 1");
    *out = new statret_corpus{statret::CorpusStore::ingest_file(jsonl_path, opt)};
  });
}

statret_status statret_corpus_load(const char* path, statret_corpus** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new statret_corpus{statret::CorpusStore::load(path)};
  });
}

statret_status statret_corpus_save(const statret_corpus* corpus, const char* path) {
  return guard([&] {
    require(corpus, "corpus");
    require(path, "path");
    corpus->store.save(path);
  });
}

statret_status statret_corpus_report(const statret_corpus* corpus, char** report_json) {
  return guard([&] {
    require(corpus, "corpus");
    const auto& r = corpus->store.report();
    json j = {{"documents", r.documents},
              {"articles", r.articles},
              {"sentences", r.sentences},
              {"duplicate_lines", r.duplicate_lines},
              {"truncated_articles", r.truncated_articles},
              {"warnings", r.warnings},
              {"vocabulary_size", corpus->store.vocabulary().size()},
              {"profile", corpus->store.profile().name()}};
    set_out(report_json, j.dump());
  });
}

void statret_corpus_free(statret_corpus* corpus) { delete corpus; }

statret_status statret_queries_load(const statret_corpus* corpus, const char* path, statret_queries** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new statret_queries{statret::QuerySet::load(path, corpus ? &corpus->store : nullptr)};
  });
}

size_t statret_queries_count(const statret_queries* queries) {
  return queries ? queries->set.queries.size() : 0;
}

void statret_queries_free(statret_queries* queries) { delete queries; }

statret_status statret_index_build(const statret_corpus* corpus, const char* options_json, statret_index** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(out, "out");
    json o = options(options_json, {"k1", "b"});
    statret::Bm25Params p;
    p.k1 = o.value("k1", p.k1);
    p.b = o.value("b", p.b);
    if (!(p.k1 >= 0.0) || !(p.b >= 0.0 && p.b <= 1.0))
      throw statret::ValidationError("k1 must be >= 0 and b in [0, 1]");
    *out = new statret_index{statret::InvertedIndex::build(corpus->store, p)};
  });
}

statret_status statret_index_load(const statret_corpus* corpus, const char* path, statret_index** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(path, "path");
    require(out, "out");
    auto index = statret::InvertedIndex::load(path);
    index.check_compatible(corpus->store);
    *out = new statret_index{std::move(index)};
  });
}

statret_status statret_index_save(const statret_index* index, const char* path) {
  return guard([&] {
    require(index, "index");
    require(path, "path");
    index->index.save(path);
  });
}

void statret_index_free(statret_index* index) { delete index; }

statret_status statret_index_run(const statret_corpus* corpus, const statret_index* index,
                                 const statret_queries* queries, size_t n, const char* tag, char** run_text) {
  return guard([&] {
    require(corpus, "corpus");
    require(index, "index");
    require(queries, "queries");
    if (n < 1) throw statret::ValidationError("n must be >= 1");
    index->index.check_compatible(corpus->store);
    const std::string t = tag && *tag ? tag : "bm25";
    check_tag(t);
    std::string run;
    for (const auto& q : queries->set.queries) {
      const auto lex = index->index.top_n(q.tokens, n);
      for (const auto& c : lex.candidates)
        run += statret::format_run_line(q.query_id, corpus->store.ref_string(c.ref), c.rank, c.lexical_score, t) + "\n";
    }
    set_out(run_text, run);
  });
}

statret_status statret_training_set_build(const statret_corpus* corpus, const statret_index* index,
                                          const statret_queries* queries, const char* options_json,
                                          char** training_json) {
  return guard([&] {
    require(corpus, "corpus");
    require(index, "index");
    require(queries, "queries");
    json o = options(options_json, {"n_neg", "lexical_random_mix", "lexical_pool", "seed"});
    statret::SamplingConfig c;
    c.n_neg = o.value("n_neg", c.n_neg);
    c.lexical_random_mix = o.value("lexical_random_mix", c.lexical_random_mix);
    c.lexical_pool = o.value("lexical_pool", c.lexical_pool);
    c.seed = o.value("seed", c.seed);
    index->index.check_compatible(corpus->store);
    const auto set = statret::build_training_set(queries->set, corpus->store, index->index, c);
    set_out(training_json, statret::training_set_to_json(set, corpus->store, c));
  });
}

statret_status statret_train(const statret_corpus* corpus, const statret_index* index, const char* training_json,
                             const statret_queries* validation, const char* options_json,
                             const statret_model* initial, statret_epoch_callback on_epoch, void* user,
                             statret_model** out, char** log_jsonl) {
  return guard([&] {
    require(corpus, "corpus");
    require(index, "index");
    require(training_json, "training set");
    require(validation, "validation queries");
    require(out, "out");
    json o = options(options_json, {"model", "optim", "validation", "threads"});
    const json jm = o.value("model", json::object());
    const json jo = o.value("optim", json::object());
    const json jv = o.value("validation", json::object());
    check_keys(jm, {"model_kind", "embed_dim", "filters", "half_window", "attention_dim", "dropout",
                    "normalized_word_scores", "head_uses_query"},
               "model");
    check_keys(jo, {"learning_rate", "batch_size", "max_epochs", "patience", "seed"}, "optim");
    check_keys(jv, {"n_filter", "normalization"}, "validation");

    statret::TrainConfig cfg;
    if (initial) {
      cfg.model = initial->model.config();
    } else {
      auto& e = cfg.model.encoder;
      if (jm.contains("model_kind")) cfg.model.kind = statret::model_kind_from_string(jm.at("model_kind").get<std::string>());
      e.embed_dim = jm.value("embed_dim", e.embed_dim);
      e.filters = jm.value("filters", e.filters);
      e.half_window = jm.value("half_window", e.half_window);
      e.attention_dim = jm.value("attention_dim", e.attention_dim);
      e.dropout = jm.value("dropout", e.dropout);
      e.normalized_word_scores = jm.value("normalized_word_scores", e.normalized_word_scores);
      e.head_uses_query = jm.value("head_uses_query", e.head_uses_query);
      if (e.embed_dim < 1 || e.filters < 1 || e.attention_dim < 1)
        throw statret::ValidationError("embed_dim, filters and attention_dim must be >= 1");
    }
    auto& op = cfg.optim;
    op.learning_rate = jo.value("learning_rate", op.learning_rate);
    op.batch_size = jo.value("batch_size", op.batch_size);
    op.max_epochs = jo.value("max_epochs", op.max_epochs);
    op.patience = jo.value("patience", op.patience);
    op.seed = jo.value("seed", op.seed);

    const json ts = json::parse(training_json);
    if (ts.contains("sampling")) {
      op.n_neg = ts["sampling"].value("n_neg", op.n_neg);
      op.lexical_random_mix = ts["sampling"].value("lexical_random_mix", op.lexical_random_mix);
    }
    cfg.validation.n_filter = jv.value("n_filter", statret::default_n_filter(cfg.model.kind));
    if (jv.contains("normalization"))
      cfg.validation.normalization = statret::normalization_from_string(jv.at("normalization").get<std::string>());
    cfg.threads = o.value("threads", std::size_t{1});
    if (cfg.threads < 1) throw statret::ValidationError("threads must be >= 1");

    index->index.check_compatible(corpus->store);
    const auto set = statret::training_set_from_json(training_json, corpus->store);
    std::string log;
    auto result = statret::train(cfg, set, validation->set, corpus->store, index->index,
                                 initial ? &initial->model : nullptr, [&](const statret::EpochLog& e) {
                                   const std::string line = statret::epoch_log_line(e);
                                   log += line + "\n";
                                   if (on_epoch) on_epoch(line.c_str(), user);
                                 });
    set_out(log_jsonl, log);
    *out = new statret_model{std::move(result.model)};
  });
}

statret_status statret_model_load(const statret_corpus* corpus, const char* path, statret_model** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(path, "path");
    require(out, "out");
    auto model = statret::Model::load(path);
    model.check_vocabulary(corpus->store.vocabulary());
    *out = new statret_model{std::move(model)};
  });
}

statret_status statret_model_save(const statret_model* model, const char* path) {
  return guard([&] {
    require(model, "model");
    require(path, "path");
    model->model.save(path);
  });
}

statret_status statret_model_info(const statret_model* model, char** info_json) {
  return guard([&] {
    require(model, "model");
    json j = {{"config", model->model.config().to_json()},
              {"metadata", model->model.metadata()},
              {"parameters", model->model.params().scalar_count()}};
    set_out(info_json, j.dump());
  });
}

void statret_model_free(statret_model* model) { delete model; }

statret_status statret_retrieve(const statret_corpus* corpus, const statret_index* index,
                                const statret_model* model, const statret_queries* queries,
                                const char* options_json, char** run_text, char** report_json) {
  return guard([&] {
    require(corpus, "corpus");
    require(index, "index");
    require(queries, "queries");
    json o = options(options_json, {"n_filter", "alpha_fuse", "top_k", "normalization", "threads", "tag"});
    const statret::Model* m = model ? &model->model : nullptr;
    const auto cfg = pipeline_config(o, m);
    const std::size_t threads = o.value("threads", std::size_t{1});
    if (threads < 1) throw statret::ValidationError("threads must be >= 1");
    const std::string tag = o.value("tag", std::string(m ? "statret" : "bm25"));
    check_tag(tag);
    statret::Retriever retriever(corpus->store, index->index, m, threads);
    const auto results = retriever.retrieve_all(queries->set, cfg);
    std::string run;
    json per_query = json::array();
    for (const auto& r : results) {
      for (const auto& a : r.ranked)
        run += statret::format_run_line(r.query_id, corpus->store.ref_string(a.ref), a.rank, a.s_final, tag) + "\n";
      per_query.push_back({{"query_id", r.query_id},
                           {"candidate_count", r.candidate_count},
                           {"no_lexical_match", r.no_lexical_match},
                           {"recall_ceiling", r.recall_ceiling ? json(*r.recall_ceiling) : json()}});
    }
    set_out(run_text, run);
    set_out(report_json, json{{"n_filter", cfg.n_filter},
                              {"alpha_fuse", cfg.alpha_fuse},
                              {"top_k", cfg.top_k},
                              {"normalization", statret::to_string(cfg.normalization)},
                              {"queries", std::move(per_query)}}
                             .dump(1) + "\n");
  });
}

statret_status statret_sweep_alpha(const statret_corpus* corpus, const statret_index* index,
                                   const statret_model* model, const statret_queries* queries,
                                   const char* options_json, char** tsv, char** summary_json) {
  return guard([&] {
    require(corpus, "corpus");
    require(index, "index");
    require(model, "model");
    require(queries, "queries");
    json o = options(options_json, {"grid_step", "n_filter", "normalization", "threads"});
    const double step = o.value("grid_step", 0.1);
    const auto cfg = pipeline_config(o, &model->model);
    const std::size_t threads = o.value("threads", std::size_t{1});
    if (threads < 1) throw statret::ValidationError("threads must be >= 1");
    statret::Retriever retriever(corpus->store, index->index, &model->model, threads);
    const auto sweep = retriever.sweep_alpha(queries->set, step, cfg);
    set_out(tsv, sweep.to_tsv());
    set_out(summary_json, json{{"grid_step", step},
                               {"n_filter", cfg.n_filter},
                               {"normalization", statret::to_string(cfg.normalization)},
                               {"best_alpha", sweep.best_alpha},
                               {"best_macro_f2_at_1", sweep.best_macro_f2_at_1}}
                              .dump());
  });
}

statret_status statret_explain(const statret_corpus* corpus, const statret_index* index,
                               const statret_model* model, const char* query_id, const char* query_text,
                               const char* article_ref, char** explanation_json, char** html) {
  return guard([&] {
    require(corpus, "corpus");
    require(index, "index");
    require(model, "model");
    require(query_text, "query text");
    require(article_ref, "article ref");
    const auto ref = corpus->store.find_ref(article_ref);
    if (!ref) throw statret::ValidationError(std::string("unknown article ") + article_ref);
    const auto query = statret::make_query(query_id && *query_id ? query_id : "query", query_text, corpus->store);
    statret::Retriever retriever(corpus->store, index->index, &model->model, 1);
    const auto e = retriever.explain(query, *ref);
    set_out(explanation_json, e.to_json());
    set_out(html, e.to_html());
  });
}

statret_status statret_evaluate(const char* run_text, const statret_queries* judgments, const size_t* k_list,
                                size_t k_count, char** report_json, char** table) {
  return guard([&] {
    require(run_text, "run text");
    require(judgments, "judgments");
    std::vector<std::size_t> ks = {1, 20};
    if (k_count) {
      require(k_list, "k list");
      ks.assign(k_list, k_list + k_count);
    }
    const auto run = statret::Run::parse(run_text);
    const auto reports = statret::evaluate_run(run, judgments->set, ks);
    set_out(report_json, statret::report_to_json(reports));
    set_out(table, statret::report_to_table(reports));
  });
}

statret_status statret_gen_synthetic(const char* options_json, char** bundle_json) {
  return guard([&] {
    json o = options(options_json, {"articles", "queries", "seed", "synonym_rate", "concepts", "context_words",
                                    "test_fraction", "valid_fraction"});
    statret::SyntheticConfig c;
    c.articles = o.value("articles", c.articles);
    c.queries = o.value("queries", c.queries);
    c.seed = o.value("seed", c.seed);
    c.synonym_rate = o.value("synonym_rate", c.synonym_rate);
    c.concepts = o.value("concepts", c.concepts);
    c.context_words = o.value("context_words", c.context_words);
    c.test_fraction = o.value("test_fraction", c.test_fraction);
    c.valid_fraction = o.value("valid_fraction", c.valid_fraction);
    const auto data = statret::generate_synthetic(c);
    json j = {{"corpus", data.corpus_jsonl}, {"queries", data.queries_jsonl}, {"train", data.train_jsonl},
              {"valid", data.valid_jsonl},   {"test", data.test_jsonl},       {"map", data.map_json()}};
    set_out(bundle_json, j.dump());
  });
}

}  // extern "C"
