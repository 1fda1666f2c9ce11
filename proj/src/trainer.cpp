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

#include "statret/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "statret/error.hpp"
#include "statret/parallel.hpp"

namespace statret {

using nlohmann::json;

namespace {
constexpr std::string_view kTrainingSetFormat = "statret-training-set";

std::string to_string(NegativeSource s) { return s == NegativeSource::kLexical ? "lexical" : "random"; }

NegativeSource source_from_string(std::string_view s) {
  if (s == "lexical") return NegativeSource::kLexical;
  if (s == "random") return NegativeSource::kRandom;
  throw ValidationError("unknown negative source: " + std::string(s));
}

void check_instance(const TrainingInstance& inst) {
  std::unordered_set<ArticleRef> seen;
  for (ArticleRef r : inst.negatives) {
    if (r == inst.positive)
      throw InternalError("training instance for " + inst.query_id + " lists its positive as a negative");
    if (!seen.insert(r).second)
      throw InternalError("training instance for " + inst.query_id + " repeats a negative");
  }
}

// Per-instance dropout stream; independent of thread layout.
Rng instance_rng(std::uint64_t seed, std::size_t epoch, std::size_t position) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (epoch * 1000003ULL + position + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return Rng(x ^ (x >> 31));
}
}  // namespace

std::vector<TrainingInstance> build_training_set(const QuerySet& queries, const CorpusStore& corpus,
                                                 const InvertedIndex& index,
                                                 const SamplingConfig& config) {
  if (!(config.lexical_random_mix >= 0.0 && config.lexical_random_mix <= 1.0))
    throw ValidationError("lexical_random_mix must be in [0, 1]");
  if (config.n_neg == 0) throw ValidationError("n_neg must be >= 1");
  if (corpus.size() < config.n_neg + 1)
    throw ValidationError("corpus has " + std::to_string(corpus.size()) +
                          " articles; need at least n_neg + 1 = " + std::to_string(config.n_neg + 1));
  index.check_compatible(corpus);
  const auto n_lexical = static_cast<std::size_t>(
      std::lround(config.lexical_random_mix * static_cast<double>(config.n_neg)));
  Rng rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);

  std::vector<TrainingInstance> out;
  for (const auto& q : queries.queries) {
    if (q.relevant_refs.empty())
      throw ValidationError("query " + q.query_id + " has no resolvable positive article");
    const std::set<ArticleRef> positives(q.relevant_refs.begin(), q.relevant_refs.end());
    if (corpus.size() < config.n_neg + positives.size())
      throw ValidationError("corpus too small to sample " + std::to_string(config.n_neg) +
                            " negatives for query " + q.query_id);
    std::vector<ArticleRef> lexical;
    if (n_lexical > 0) {
      for (const auto& c : index.top_n(q.tokens, std::max(config.lexical_pool, std::size_t{1})).candidates) {
        if (lexical.size() == n_lexical) break;
        if (!positives.count(c.ref)) lexical.push_back(c.ref);
      }
    }
    for (ArticleRef pos : q.relevant_refs) {
      TrainingInstance inst;
      inst.query_id = q.query_id;
      inst.query_text = q.text;
      inst.query_token_ids = q.token_ids;
      inst.positive = pos;
      std::set<ArticleRef> taken(positives);
      for (ArticleRef r : lexical) {
        inst.negatives.push_back(r);
        inst.provenance.push_back(NegativeSource::kLexical);
        taken.insert(r);
      }
      while (inst.negatives.size() < config.n_neg) {
        const auto r = static_cast<ArticleRef>(pick(rng));
        if (!taken.insert(r).second) continue;
        inst.negatives.push_back(r);
        inst.provenance.push_back(NegativeSource::kRandom);
      }
      check_instance(inst);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::string training_set_to_json(std::span<const TrainingInstance> instances,
                                 const CorpusStore& corpus, const SamplingConfig& config) {
  json j;
  j["format"] = kTrainingSetFormat;
  j["version"] = 1;
  j["corpus_fingerprint"] = corpus_fingerprint(corpus);
  j["sampling"] = {{"n_neg", config.n_neg},
                   {"lexical_random_mix", config.lexical_random_mix},
                   {"lexical_pool", config.lexical_pool},
                   {"seed", config.seed}};
  json arr = json::array();
  for (const auto& inst : instances) {
    json negs = json::array();
    for (std::size_t i = 0; i < inst.negatives.size(); ++i)
      negs.push_back({{"ref", corpus.ref_string(inst.negatives[i])},
                      {"source", to_string(inst.provenance[i])}});
    arr.push_back({{"query_id", inst.query_id},
                   {"query_text", inst.query_text},
                   {"positive", corpus.ref_string(inst.positive)},
                   {"negatives", std::move(negs)}});
  }
  j["instances"] = std::move(arr);
  return j.dump(1) + "\n";
}

std::vector<TrainingInstance> training_set_from_json(std::string_view text,
                                                     const CorpusStore& corpus) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("training set: malformed JSON: ") + e.what());
  }
  if (j.value("format", "") != kTrainingSetFormat) throw ValidationError("not a training set file");
  if (j.value("corpus_fingerprint", "") != corpus_fingerprint(corpus))
    throw ValidationError("training set was built from a different corpus store");
  auto resolve = [&](const std::string& ref) {
    auto r = corpus.find_ref(ref);
    if (!r) throw ValidationError("training set: unknown article " + ref);
    return *r;
  };
  std::vector<TrainingInstance> out;
  try {
    for (const auto& ji : j.at("instances")) {
      Query q = make_query(ji.at("query_id").get<std::string>(),
                           ji.at("query_text").get<std::string>(), corpus);
      TrainingInstance inst;
      inst.query_id = q.query_id;
      inst.query_text = q.text;
      inst.query_token_ids = q.token_ids;
      inst.positive = resolve(ji.at("positive").get<std::string>());
      for (const auto& jn : ji.at("negatives")) {
        inst.negatives.push_back(resolve(jn.at("ref").get<std::string>()));
        inst.provenance.push_back(source_from_string(jn.at("source").get<std::string>()));
      }
      try {
        check_instance(inst);
      } catch (const InternalError& e) {
        throw ValidationError(e.what());
      }
      out.push_back(std::move(inst));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("training set: ") + e.what());
  }
  return out;
}

SoftmaxLoss loss_similarity_softmax(double positive, std::span<const double> negatives) {
  if (negatives.empty()) throw ValidationError("loss_similarity_softmax: need >= 1 negative");
  std::vector<double> logits{positive};
  logits.insert(logits.end(), negatives.begin(), negatives.end());
  auto lg = ops::cross_entropy(logits, 0);
  SoftmaxLoss out;
  out.loss = lg.loss;
  out.d_positive = lg.d_logits[0];
  out.d_negatives.assign(lg.d_logits.begin() + 1, lg.d_logits.end());
  return out;
}

double loss_binary_head(double logit, int label) { return ops::binary_cross_entropy(logit, label).loss; }

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (patience < 1) throw ValidationError("patience must be >= 1");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(lexical_random_mix >= 0.0 && lexical_random_mix <= 1.0))
    throw ValidationError("lexical_random_mix must be in [0, 1]");
}

AdamOptimizer::AdamOptimizer(const ModelParams& params, double learning_rate) : lr_(learning_rate) {
  for (const auto& p : params) {
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

void AdamOptimizer::step(ModelParams& params, const ModelParams& grads, double grad_scale) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    if (!params[pi].trainable) continue;
    auto& values = params[pi].tensor.values;
    const auto& g = grads[pi].tensor.grad;
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double gi = g[i] * grad_scale;
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * gi;
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gi * gi;
      values[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  }
}

std::string epoch_log_line(const EpochLog& log) {
  json j = {{"epoch", log.epoch}, {"loss", log.loss}, {"val_macro_f2_at_1", log.val_macro_f2_at_1}};
  return j.dump();
}

TrainResult train(const TrainConfig& config, std::span<const TrainingInstance> training_set,
                  const QuerySet& validation, const CorpusStore& corpus,
                  const InvertedIndex& index, const Model* initial,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.optim.validate();
  if (training_set.empty()) throw ValidationError("training set is empty");
  std::size_t judged = 0;
  for (const auto& q : validation.queries) judged += q.relevant.empty() ? 0 : 1;
  if (judged == 0) throw ValidationError("validation set has no judged queries");
  std::set<std::string> train_ids;
  for (const auto& inst : training_set) train_ids.insert(inst.query_id);
  for (const auto& q : validation.queries)
    if (train_ids.count(q.query_id))
      throw ValidationError("validation query " + q.query_id + " also appears in the training set");

  Model model = initial ? *initial : Model::create(config.model, corpus.vocabulary(), config.optim.seed);
  model.check_vocabulary(corpus.vocabulary());
  AdamOptimizer adam(model.params(), config.optim.learning_rate);

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.threads, config.optim.batch_size));
  std::vector<ModelParams> buffers(workers > 1 ? workers : 0, model.params());

  std::vector<std::size_t> order(training_set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(config.optim.seed);

  PipelineConfig val_cfg = config.validation;
  val_cfg.alpha_fuse = 1.0;
  val_cfg.top_k = 1;

  auto instance_loss = [&](std::size_t pos, std::size_t epoch, ModelParams& sink) {
    const auto& inst = training_set[order[pos]];
    std::vector<const Article*> arts{&corpus.article(inst.positive)};
    for (ArticleRef r : inst.negatives) arts.push_back(&corpus.article(r));
    Rng rng = instance_rng(config.optim.seed, epoch, pos);
    return Model::group_loss(model.config(), model.params(), inst.query_token_ids, arts, &rng, &sink);
  };

  TrainResult result;
  double best = -1.0;
  std::vector<std::vector<double>> best_values;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.optim.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.optim.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.optim.batch_size);
      const std::size_t n = end - start;
      double batch_loss = 0.0;
      model.params().zero_grad();
      if (buffers.empty()) {
        for (std::size_t pos = start; pos < end; ++pos)
          batch_loss += instance_loss(pos, epoch, model.params());
      } else {
        std::vector<double> losses(workers, 0.0);
        const std::size_t block = (n + workers - 1) / workers;
        parallel_for(workers, workers, [&](std::size_t w) {
          buffers[w].zero_grad();
          for (std::size_t pos = start + w * block; pos < std::min(end, start + (w + 1) * block); ++pos)
            losses[w] += instance_loss(pos, epoch, buffers[w]);
        });
        for (std::size_t w = 0; w < workers; ++w) {
          batch_loss += losses[w];
          for (std::size_t pi = 0; pi < model.params().size(); ++pi) {
            auto& dst = model.params()[pi].tensor.grad;
            const auto& src = buffers[w][pi].tensor.grad;
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
          }
        }
      }
      if (!std::isfinite(batch_loss))
        throw InternalError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch starting at instance " + std::to_string(start) +
                            "; lower the learning rate");
      epoch_loss += batch_loss;
      adam.step(model.params(), model.params(), 1.0 / static_cast<double>(n));
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss = epoch_loss / static_cast<double>(order.size());
    {
      Retriever retriever(corpus, index, &model, config.threads);
      log.val_macro_f2_at_1 = retriever.macro_f2_at_1(validation, val_cfg);
    }
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);

    if (log.val_macro_f2_at_1 > best) {
      best = log.val_macro_f2_at_1;
      result.best_epoch = epoch;
      best_values.clear();
      for (const auto& p : model.params()) best_values.push_back(p.tensor.values);
      since_best = 0;
    } else if (++since_best >= config.optim.patience) {
      result.early_stopped = true;
      break;
    }
  }

  for (std::size_t pi = 0; pi < model.params().size(); ++pi)
    model.params()[pi].tensor.values = best_values[pi];
  json history = json::array();
  for (const auto& h : result.history) history.push_back(json::parse(epoch_log_line(h)));
  model.metadata()["training"] = {
      {"history", std::move(history)},
      {"best_epoch", result.best_epoch},
      {"best_val_macro_f2_at_1", best},
      {"early_stopped", result.early_stopped},
      {"optim",
       {{"optimizer", "adam"},
        {"learning_rate", config.optim.learning_rate},
        {"batch_size", config.optim.batch_size},
        {"max_epochs", config.optim.max_epochs},
        {"patience", config.optim.patience},
        {"seed", config.optim.seed},
        {"n_neg", config.optim.n_neg},
        {"lexical_random_mix", config.optim.lexical_random_mix}}},
      {"validation", {{"n_filter", val_cfg.n_filter}, {"normalization", to_string(val_cfg.normalization)}}},
      {"training_instances", training_set.size()}};
  result.model = std::move(model);
  return result;
}

}  // namespace statret
