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

/* statret: two-stage statute retrieval (BM25 filter + attentive reranker).
 *
 * Plain C interface. Every object is an opaque handle released with its
 * matching *_free function. Functions return a statret_status; on failure
 * statret_last_error() describes the problem. Strings returned through
 * char** out-parameters are heap allocated and must be released with
 * statret_string_free. Option arguments are JSON objects (NULL or "" means
 * all defaults); unknown keys are rejected. */
#ifndef STATRET_STATRET_H_
#define STATRET_STATRET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(STATRET_BUILDING_LIBRARY)
#define STATRET_API __attribute__((visibility("default")))
#else
#define STATRET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum statret_status {
  STATRET_OK = 0,
  STATRET_INVALID = 1, /* bad input, malformed file, contract violation */
  STATRET_INTERNAL = 2 /* divergence, unexpected failure */
} statret_status;

typedef struct statret_corpus statret_corpus;
typedef struct statret_queries statret_queries;
typedef struct statret_index statret_index;
typedef struct statret_model statret_model;

STATRET_API const char* statret_version(void);
/* Message for the last failed call on this thread ("" if none). */
STATRET_API const char* statret_last_error(void);
STATRET_API void statret_string_free(char* s);

/* SHA-256 of a file, lowercase hex. */
STATRET_API statret_status statret_file_sha256(const char* path, char** hex);

/* ---- corpus ---------------------------------------------------------- */

/* options: {"profile": "spaced" | "non-spaced:N", "min_frequency": int,
 *           "max_sentences": int} */
STATRET_API statret_status statret_corpus_ingest(const char* jsonl_path, const char* options_json,
                                                 statret_corpus** out);
STATRET_API statret_status statret_corpus_load(const char* path, statret_corpus** out);
STATRET_API statret_status statret_corpus_save(const statret_corpus* corpus, const char* path);
/* {"documents", "articles", "sentences", "vocabulary_size", "profile", ...} */
STATRET_API statret_status statret_corpus_report(const statret_corpus* corpus, char** report_json);
STATRET_API void statret_corpus_free(statret_corpus* corpus);

/* ---- queries --------------------------------------------------------- */

/* With a corpus, queries are tokenized against it and every judgment must
 * resolve. Without one, only judgments are read (for evaluation). */
STATRET_API statret_status statret_queries_load(const statret_corpus* corpus, const char* path,
                                                statret_queries** out);
STATRET_API size_t statret_queries_count(const statret_queries* queries);
STATRET_API void statret_queries_free(statret_queries* queries);

/* ---- lexical index --------------------------------------------------- */

/* options: {"k1": 1.2, "b": 0.75} */
STATRET_API statret_status statret_index_build(const statret_corpus* corpus, const char* options_json,
                                               statret_index** out);
/* Fails unless the index was built from `corpus`. */
STATRET_API statret_status statret_index_load(const statret_corpus* corpus, const char* path,
                                              statret_index** out);
STATRET_API statret_status statret_index_save(const statret_index* index, const char* path);
STATRET_API void statret_index_free(statret_index* index);
/* BM25 top-n for every query as run-file lines. */
STATRET_API statret_status statret_index_run(const statret_corpus* corpus, const statret_index* index,
                                             const statret_queries* queries, size_t n, const char* tag,
                                             char** run_text);

/* ---- training -------------------------------------------------------- */

/* options: {"n_neg": 4, "lexical_random_mix": 0.5, "lexical_pool": 1000,
 *           "seed": 0}. Produces the training-set JSON document. */
STATRET_API statret_status statret_training_set_build(const statret_corpus* corpus,
                                                      const statret_index* index,
                                                      const statret_queries* queries,
                                                      const char* options_json, char** training_json);

typedef void (*statret_epoch_callback)(const char* log_line_json, void* user);

/* options: {"model": {"model_kind", "embed_dim", "filters", "half_window",
 *             "attention_dim", "dropout", "normalized_word_scores",
 *             "head_uses_query"},
 *           "optim": {"learning_rate", "batch_size", "max_epochs",
 *             "patience", "seed"},
 *           "validation": {"n_filter", "normalization"},
 *           "threads": int}
 * `initial` (nullable) continues from an existing model. `log_jsonl`
 * (nullable) receives one {epoch, loss, val_macro_f2_at_1} line per epoch. */
STATRET_API statret_status statret_train(const statret_corpus* corpus, const statret_index* index,
                                         const char* training_json, const statret_queries* validation,
                                         const char* options_json, const statret_model* initial,
                                         statret_epoch_callback on_epoch, void* user,
                                         statret_model** out, char** log_jsonl);

/* ---- model ----------------------------------------------------------- */

/* Fails when the checkpoint's vocabulary differs from the corpus's. */
STATRET_API statret_status statret_model_load(const statret_corpus* corpus, const char* path,
                                              statret_model** out);
STATRET_API statret_status statret_model_save(const statret_model* model, const char* path);
/* {"config": {...}, "metadata": {...}, "parameters": int} */
STATRET_API statret_status statret_model_info(const statret_model* model, char** info_json);
STATRET_API void statret_model_free(statret_model* model);

/* ---- retrieval ------------------------------------------------------- */

/* options: {"n_filter", "alpha_fuse", "top_k", "normalization": "minmax" |
 *           "zscore" | "none", "threads", "tag"}. n_filter defaults per
 * model kind. `model` may be NULL only with alpha_fuse = 0. `report_json`
 * (nullable) lists per-query candidate counts, no-lexical-match flags and
 * recall ceilings. */
STATRET_API statret_status statret_retrieve(const statret_corpus* corpus, const statret_index* index,
                                            const statret_model* model, const statret_queries* queries,
                                            const char* options_json, char** run_text,
                                            char** report_json);

/* options: {"grid_step": 0.1, "n_filter", "normalization", "threads"} */
STATRET_API statret_status statret_sweep_alpha(const statret_corpus* corpus, const statret_index* index,
                                               const statret_model* model,
                                               const statret_queries* queries,
                                               const char* options_json, char** tsv,
                                               char** summary_json);

/* Attention weights of `article_ref` ("law_id:article_id") for a query. */
STATRET_API statret_status statret_explain(const statret_corpus* corpus, const statret_index* index,
                                           const statret_model* model, const char* query_id, const char* query_text,
                                           const char* article_ref, char** explanation_json,
                                           char** html);

/* ---- evaluation ------------------------------------------------------ */

STATRET_API statret_status statret_evaluate(const char* run_text, const statret_queries* judgments,
                                            const size_t* k_list, size_t k_count, char** report_json,
                                            char** table);

/* ---- synthetic data -------------------------------------------------- */

/* options: {"articles": 200, "queries": 100, "seed": 7, "synonym_rate": 0.5,
 *           "concepts": 0, "context_words": 0, "test_fraction": 0.2, "valid_fraction": 0.1}
 * Bundle: {"corpus", "queries", "train", "valid", "test"} as JSONL strings
 * plus "map" (gold/distractor per query). */
STATRET_API statret_status statret_gen_synthetic(const char* options_json, char** bundle_json);

#ifdef __cplusplus
}
#endif

#endif /* STATRET_STATRET_H_ */
