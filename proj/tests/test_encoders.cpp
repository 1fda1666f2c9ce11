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
#include "statret/encoders.hpp"
#include "statret/error.hpp"
#include "statret/gradcheck.hpp"
#include "statret/model.hpp"
#include "statret/trainer.hpp"
#include "support.hpp"

using namespace statret;
using testing::make_article;

namespace {

std::vector<Article> two_sentence_group() {
  return {make_article({{2, 3, 4}, {5, 6}}),     //
          make_article({{7, 8, 9, 2}, {3, 10}}),  //
          make_article({{11, 4}, {6, 12, 13}})};
}

const std::vector<TokenId> kQuery{2, 5, 7, 11};

GradCheckReport run_check(const ModelConfig& cfg, std::uint64_t seed, const std::string& flip = "") {
  const auto vocab = testing::tiny_vocabulary(14);
  Model m = Model::create(cfg, vocab, seed);
  return check_gradients(testing::group_loss_fn(m.config(), kQuery, two_sentence_group(), flip),
                         m.params());
}

}  // namespace

TEST_CASE("cnn_dot gradients match finite differences") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto rep = run_check(testing::tiny_config(ModelKind::kCnnDot), seed);
    INFO(rep.summary());
    CHECK(rep.passed);
    CHECK(rep.checked > 100);
  }
}

TEST_CASE("general_attn_head gradients match finite differences") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto rep = run_check(testing::tiny_config(ModelKind::kGeneralAttnHead), seed);
    INFO(rep.summary());
    CHECK(rep.passed);
  }
}

TEST_CASE("optional encoder variants have correct gradients") {
  SUBCASE("normalized word scores") {
    auto cfg = testing::tiny_config(ModelKind::kCnnDot);
    cfg.encoder.normalized_word_scores = true;
    const auto rep = run_check(cfg, 4);
    INFO(rep.summary());
    CHECK(rep.passed);
  }
  SUBCASE("classifier head sees the query") {
    auto cfg = testing::tiny_config(ModelKind::kGeneralAttnHead);
    cfg.encoder.head_uses_query = true;
    const auto rep = run_check(cfg, 4);
    INFO(rep.summary());
    CHECK(rep.passed);
  }
}

TEST_CASE("a sign-flipped backward pass is detected") {
  for (auto kind : {ModelKind::kCnnDot, ModelKind::kGeneralAttnHead}) {
    const auto rep = run_check(testing::tiny_config(kind), 1, param_name::kConvKernel);
    CHECK_FALSE(rep.passed);
    REQUIRE_FALSE(rep.failures.empty());
    CHECK(rep.failures[0].param == param_name::kConvKernel);
  }
  const auto rep = run_check(testing::tiny_config(ModelKind::kGeneralAttnHead), 1, param_name::kParaAttnWeight);
  CHECK_FALSE(rep.passed);
}

TEST_CASE("sentence encoding weights form a distribution") {
  const auto vocab = testing::tiny_vocabulary(14);
  const Model m = Model::create(testing::tiny_config(ModelKind::kCnnDot), vocab, 9);
  const auto& cfg = m.config().encoder;
  const std::vector<TokenId> ids{2, 3, 4, 5};
  const auto enc = encode_sentence_cnn(ids, m.params(), CnnEncoderParams::resolve(m.params()), cfg);
  CHECK(enc.vector.size() == cfg.filters);
  CHECK(enc.word_weights.size() == ids.size());
  double total = 0.0;
  for (double w : enc.word_weights) total += w;
  CHECK(total == doctest::Approx(1.0));
  CHECK_THROWS_AS(m.encode_query(std::vector<TokenId>{}), ValidationError);
}

TEST_CASE("sparse-average article encodings do not depend on the query") {
  const auto vocab = testing::tiny_vocabulary(14);
  const Model m = Model::create(testing::tiny_config(ModelKind::kCnnDot), vocab, 11);
  const auto pre = m.precompute(two_sentence_group()[0]);
  Rng rng(0);
  std::uniform_int_distribution<TokenId> word(2, 15);
  const auto first = m.encode_article(m.encode_query(kQuery), pre);
  for (int q = 0; q < 10; ++q) {
    std::vector<TokenId> ids(3 + static_cast<std::size_t>(q % 4));
    for (auto& id : ids) id = word(rng);
    const auto enc = m.encode_article(m.encode_query(ids), pre);
    CHECK(enc.vector == first.vector);
    CHECK(enc.sentence_weights == first.sentence_weights);
  }
}

TEST_CASE("general attention sentence weights follow the query") {
  const auto vocab = testing::tiny_vocabulary(14);
  const Model m = Model::create(testing::tiny_config(ModelKind::kGeneralAttnHead), vocab, 11);
  const Article a = make_article({{2, 3, 4}, {9, 10, 11}});
  const auto pre = m.precompute(a);
  const auto w1 = m.encode_article(m.encode_query(std::vector<TokenId>{2, 3, 4}), pre).sentence_weights;
  const auto w2 = m.encode_article(m.encode_query(std::vector<TokenId>{9, 10, 11}), pre).sentence_weights;
  REQUIRE(w1.size() == 2);
  CHECK(w1[0] + w1[1] == doctest::Approx(1.0));
  CHECK(w1 != w2);
}

TEST_CASE("published hyperparameters construct and train one step") {
  const auto vocab = testing::tiny_vocabulary(14);
  for (auto kind : {ModelKind::kCnnDot, ModelKind::kGeneralAttnHead}) {
    const ModelConfig cfg = reference_cnn_config(kind);
    Model m = Model::create(cfg, vocab, 5);
    CHECK(m.params().get(param_name::kEmbedding).tensor.cols() == 512);
    CHECK(m.params().get(param_name::kConvKernel).tensor.rows() == 512);
    CHECK(m.params().get(param_name::kWordAttnWeight).tensor.rows() == 200);

    const auto group = two_sentence_group();
    std::vector<const Article*> ptrs;
    for (const auto& g : group) ptrs.push_back(&g);
    Rng drop(1);
    m.params().zero_grad();
    const double before = m.group_loss(kQuery, ptrs, &drop, &m.params());
    CHECK(std::isfinite(before));
    AdamOptimizer adam(m.params(), 1e-3);
    adam.step(m.params(), m.params(), 1.0);
    CHECK(std::isfinite(m.group_loss(kQuery, ptrs, nullptr, nullptr)));

    // Dropout masks are redrawn from the same seed on every call so the loss
    // is a fixed function of the parameters.
    LossFn fn = [&](ModelParams& params, bool with_grad) {
      Rng r(17);
      return Model::group_loss(cfg, params, kQuery, ptrs, &r, with_grad ? &params : nullptr);
    };
    GradCheckOptions opts;
    opts.max_per_tensor = 12;
    const auto rep = check_gradients(fn, m.params(), opts);
    INFO(rep.summary());
    CHECK(rep.passed);
  }
  const TransformerProfile tp;
  CHECK(tp.hidden_size == 768);
  CHECK(tp.max_position_embeddings == 514);
}

TEST_CASE("checkpoints round-trip and guard their vocabulary") {
  const auto vocab = testing::tiny_vocabulary(14);
  const Model m = Model::create(testing::tiny_config(ModelKind::kGeneralAttnHead), vocab, 3);
  const Model back = Model::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK_NOTHROW(back.check_vocabulary(vocab));
  CHECK_THROWS_AS(back.check_vocabulary(testing::tiny_vocabulary(15)), ValidationError);
  CHECK_THROWS_AS(Model::from_json("{}"), ValidationError);
  CHECK_THROWS_AS(Model::from_json("not json"), ValidationError);
  CHECK_THROWS_AS(model_kind_from_string("bert"), ValidationError);
}

TEST_CASE("dropout outside [0, 1) is rejected") {
  auto cfg = testing::tiny_config(ModelKind::kCnnDot);
  cfg.encoder.dropout = 1.0;
  CHECK_THROWS_AS(Model::create(cfg, testing::tiny_vocabulary(4), 1), ValidationError);
}
