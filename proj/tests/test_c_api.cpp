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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "statret/statret.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("statret_capi_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  statret_string_free(s);
  return out;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("the C interface runs the whole pipeline") {
  TempDir dir;
  char* bundle_text = nullptr;
  REQUIRE(statret_gen_synthetic(R"({"articles": 60, "queries": 20})", &bundle_text) == STATRET_OK);
  const json bundle = json::parse(take(bundle_text));
  for (const char* key : {"corpus", "train", "valid", "test"})
    write(dir / (std::string(key) + ".jsonl"), bundle.at(key).get<std::string>());

  statret_corpus* corpus = nullptr;
  REQUIRE(statret_corpus_ingest((dir / "corpus.jsonl").c_str(), nullptr, &corpus) == STATRET_OK);
  char* report = nullptr;
  REQUIRE(statret_corpus_report(corpus, &report) == STATRET_OK);
  CHECK(json::parse(take(report)).at("articles") == 60);
  REQUIRE(statret_corpus_save(corpus, (dir / "store.json").c_str()) == STATRET_OK);

  statret_index* index = nullptr;
  REQUIRE(statret_index_build(corpus, R"({"k1": 1.2})", &index) == STATRET_OK);
  REQUIRE(statret_index_save(index, (dir / "index.json").c_str()) == STATRET_OK);

  statret_queries *train = nullptr, *valid = nullptr, *test = nullptr;
  REQUIRE(statret_queries_load(corpus, (dir / "train.jsonl").c_str(), &train) == STATRET_OK);
  REQUIRE(statret_queries_load(corpus, (dir / "valid.jsonl").c_str(), &valid) == STATRET_OK);
  REQUIRE(statret_queries_load(corpus, (dir / "test.jsonl").c_str(), &test) == STATRET_OK);
  CHECK(statret_queries_count(test) == 4);

  char* bm25_run = nullptr;
  REQUIRE(statret_index_run(corpus, index, test, 5, "bm25", &bm25_run) == STATRET_OK);
  CHECK(take(bm25_run).find(" Q0 ") != std::string::npos);

  char* training = nullptr;
  REQUIRE(statret_training_set_build(corpus, index, train, R"({"n_neg": 2, "seed": 1})", &training) ==
          STATRET_OK);
  const std::string training_json = take(training);

  int epochs_seen = 0;
  auto on_epoch = [](const char* line, void* user) {
    CHECK(json::parse(line).contains("val_macro_f2_at_1"));
    ++*static_cast<int*>(user);
  };
  statret_model* model = nullptr;
  char* log = nullptr;
  const char* opts =
      R"({"model": {"embed_dim": 8, "filters": 8, "attention_dim": 4},
          "optim": {"max_epochs": 2, "learning_rate": 0.01, "seed": 1},
          "validation": {"n_filter": 10}})";
  REQUIRE(statret_train(corpus, index, training_json.c_str(), valid, opts, nullptr, on_epoch, &epochs_seen,
                        &model, &log) == STATRET_OK);
  CHECK(epochs_seen == 2);
  take(log);
  REQUIRE(statret_model_save(model, (dir / "model.json").c_str()) == STATRET_OK);

  statret_model* loaded = nullptr;
  REQUIRE(statret_model_load(corpus, (dir / "model.json").c_str(), &loaded) == STATRET_OK);
  char* info = nullptr;
  REQUIRE(statret_model_info(loaded, &info) == STATRET_OK);
  CHECK(json::parse(take(info)).at("config").at("model_kind") == "cnn_dot");

  char *run = nullptr, *rep = nullptr;
  REQUIRE(statret_retrieve(corpus, index, loaded, test, R"({"n_filter": 10, "top_k": 3, "alpha_fuse": 0.5})", &run,
                           &rep) == STATRET_OK);
  const std::string run_text = take(run);
  CHECK_FALSE(json::parse(take(rep)).empty());

  const size_t ks[] = {1, 3};
  char *eval = nullptr, *table = nullptr;
  REQUIRE(statret_evaluate(run_text.c_str(), test, ks, 2, &eval, &table) == STATRET_OK);
  CHECK(json::parse(take(eval)).size() == 2);
  CHECK_FALSE(take(table).empty());

  char *tsv = nullptr, *summary = nullptr;
  REQUIRE(statret_sweep_alpha(corpus, index, loaded, valid, R"({"grid_step": 0.5, "n_filter": 10})", &tsv,
                              &summary) == STATRET_OK);
  take(tsv);
  CHECK(json::parse(take(summary)).contains("best_alpha"));

  char *expl = nullptr, *html = nullptr;
  REQUIRE(statret_explain(corpus, index, loaded, nullptr, "what is the law?", "L000:1", &expl, &html) ==
          STATRET_OK);
  CHECK(json::parse(take(expl)).at("query_independent") == true);
  take(html);

  char* hex = nullptr;
  REQUIRE(statret_file_sha256((dir / "model.json").c_str(), &hex) == STATRET_OK);
  CHECK(take(hex).size() == 64);

  statret_model_free(loaded);
  statret_model_free(model);
  statret_queries_free(train);
  statret_queries_free(valid);
  statret_queries_free(test);
  statret_index_free(index);
  statret_corpus_free(corpus);
}

TEST_CASE("errors come back as status codes with a message") {
  statret_corpus* corpus = nullptr;
  CHECK(statret_corpus_load("/nonexistent/store.json", &corpus) == STATRET_INVALID);
  CHECK(corpus == nullptr);
  CHECK(std::string(statret_last_error()).size() > 0);

  char* bundle = nullptr;
  CHECK(statret_gen_synthetic(R"({"articles": 10})", &bundle) == STATRET_INVALID);
  CHECK(statret_gen_synthetic(R"({"unknown_key": 1})", &bundle) == STATRET_INVALID);
  CHECK(std::string(statret_last_error()).find("unknown_key") != std::string::npos);
  CHECK(statret_gen_synthetic("{not json", &bundle) == STATRET_INVALID);
  CHECK(statret_evaluate(nullptr, nullptr, nullptr, 0, nullptr, nullptr) == STATRET_INVALID);
  CHECK(std::string(statret_version()).size() > 0);
}

TEST_CASE("freeing null handles is a no-op") {
  statret_corpus_free(nullptr);
  statret_index_free(nullptr);
  statret_model_free(nullptr);
  statret_queries_free(nullptr);
  statret_string_free(nullptr);
}
