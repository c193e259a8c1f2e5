/* Copyright 2026 The clauseprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <filesystem>
#include <vector>

#include "clauseprobe/errors.hpp"
#include "clauseprobe/probe.hpp"
#include "clauseprobe/synthlang.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

namespace cp = clauseprobe;
using cp::ClauseLabel;

namespace {

cp::TrainConfig blob_config() {
  cp::TrainConfig c;
  c.epochs = 200;
  c.learning_rate = 0.05;
  c.batch_size = 16;
  c.select_best_on_validation = false;
  c.rng_seed = 3;
  return c;
}

double accuracy(const cp::ProbeParams& p, const std::vector<cp::LabeledVector>& data) {
  int hit = 0;
  for (const auto& d : data) hit += cp::predict_label(d.x, p) == d.label;
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

cp::Treebank synth(cp::WordOrder order, int n, std::uint64_t seed, std::uint64_t vocab) {
  cp::SynthGrammarConfig g;
  g.order = order;
  g.comp_position = cp::default_comp_position(order);
  g.n_sentences = n;
  g.rng_seed = seed;
  g.vocab_seed = vocab;
  return cp::generate_corpus(g);
}

cp::ToyEncoderConfig small_encoder(std::uint64_t seed) {
  cp::ToyEncoderConfig c;
  c.vocab_hash_buckets = 512;
  c.dim = 16;
  c.n_layers = 1;
  c.n_heads = 2;
  c.rng_seed = seed;
  return c;
}

}  // namespace

TEST_CASE("probe gradients match central differences") {
  cp::Rng rng(1234);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, cp::testing::probe_gradient_error(rng));
  CHECK(worst <= 1e-4);
}

TEST_CASE("probe forward on hand-set weights") {
  cp::ProbeParams p = cp::zero_probe(2, 1);
  p.w1 << 1.0, -1.0;
  p.w2 << 2.0, -2.0;
  Eigen::VectorXd x(2);
  x << 0.5, 0.0;
  const auto out = cp::probe_forward(x, p);
  const double h = std::tanh(0.5);
  CHECK(out.logits(0) == doctest::Approx(2 * h));
  CHECK(out.logits(1) == doctest::Approx(-2 * h));
  CHECK(out.probs.sum() == doctest::Approx(1.0));
  CHECK(out.probs(0) == doctest::Approx(1.0 / (1.0 + std::exp(-4 * h))));
  CHECK(cp::predict_label(x, p) == ClauseLabel::kMain);
  x << -0.5, 0.0;
  CHECK(cp::predict_label(x, p) == ClauseLabel::kSub);
}

TEST_CASE("tied logits predict SUB") {
  const auto p = cp::zero_probe(3, 0);
  CHECK(p.hidden_dim() == 3);
  CHECK(cp::predict_label(Eigen::VectorXd::Ones(3), p) == ClauseLabel::kSub);
}

TEST_CASE("loss of a uniform probe is log 2") {
  const auto p = cp::zero_probe(2, 2);
  std::vector<cp::LabeledVector> batch = {{Eigen::VectorXd::Ones(2), ClauseLabel::kMain},
                                          {Eigen::VectorXd::Zero(2), ClauseLabel::kSub}};
  cp::ProbeParams g;
  CHECK(cp::loss_and_grad(batch, p, &g) == doctest::Approx(std::log(2.0)));
  CHECK(g.b2(0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cp::loss_and_grad({}, p, &g), cp::Error);
}

TEST_CASE("dimension mismatches are reported") {
  const auto p = cp::zero_probe(3, 2);
  try {
    cp::probe_forward(Eigen::VectorXd::Zero(4), p);
    FAIL("expected an error");
  } catch (const cp::Error& e) {
    CHECK(e.code() == cp::ErrorCode::kDimension);
  }
}

TEST_CASE("initialization is uniform within 1/sqrt(dim) and seeded") {
  const auto a = cp::init_probe(16, 0, 5);
  const auto b = cp::init_probe(16, 0, 5);
  CHECK(a == b);
  CHECK_FALSE(a == cp::init_probe(16, 0, 6));
  for (const auto* m : a.tensors()) CHECK(m->cwiseAbs().maxCoeff() <= 0.25);
  CHECK(a.w1.rows() == 16);
  CHECK(cp::init_probe(16, 4, 5).w2.cols() == 4);
}

TEST_CASE("separable blobs are learned") {
  cp::Rng rng(99);
  const auto data = cp::testing::make_blobs(rng, 8, 200, 3.0, 1.1);
  REQUIRE(cp::testing::linearly_separable(data));
  const auto r = cp::train(data, {}, blob_config());
  CHECK(accuracy(r.model.probe, data) >= 0.99);
  CHECK(r.history.size() == 200);
  CHECK(r.history.back().train_loss < r.history.front().train_loss);
  CHECK(r.selected_epoch == 200);
}

TEST_CASE("training is bit-identical for a fixed seed") {
  cp::Rng rng(8);
  const auto data = cp::testing::make_blobs(rng, 4, 60, 2.0, 0.5);
  auto cfg = blob_config();
  cfg.epochs = 10;
  for (auto kind : {cp::OptimizerKind::kSgd, cp::OptimizerKind::kAdam}) {
    cfg.optimizer = kind;
    const auto a = cp::train(data, {}, cfg);
    const auto b = cp::train(data, {}, cfg);
    CHECK(cp::encode_checkpoint(a.model) == cp::encode_checkpoint(b.model));
    CHECK(a.history == b.history);
  }
  cfg.rng_seed = 4;
  CHECK_FALSE(cp::train(data, {}, cfg).model.probe == cp::train(data, {}, blob_config()).model.probe);
}

TEST_CASE("zero learning rate leaves parameters at their initial values") {
  cp::Rng rng(2);
  const auto data = cp::testing::make_blobs(rng, 4, 20, 2.0, 0.5);
  cp::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  cfg.select_best_on_validation = false;
  const auto r = cp::train(data, {}, cfg);
  CHECK(r.model.probe == cp::initial_probe(cfg, 4));
  cfg.epochs = 3;
  cfg.optimizer = cp::OptimizerKind::kAdam;
  const auto flat = cp::train(data, {}, cfg);
  CHECK(flat.history[0].train_loss == doctest::Approx(flat.history[2].train_loss).epsilon(1e-12));
}

TEST_CASE("validation selection keeps the best epoch, earliest on ties") {
  cp::Rng rng(17);
  const auto train_set = cp::testing::make_blobs(rng, 4, 80, 1.0, 0.0);
  const auto dev_set = cp::testing::make_blobs(rng, 4, 40, 1.0, 0.0);
  cp::TrainConfig cfg;
  cfg.epochs = 8;
  cfg.learning_rate = 0.05;
  const auto r = cp::train(train_set, dev_set, cfg);
  REQUIRE(r.history.size() == 8);
  double best = -1;
  int best_epoch = 0;
  for (const auto& h : r.history) {
    REQUIRE(h.dev_accuracy.has_value());
    if (*h.dev_accuracy > best) {
      best = *h.dev_accuracy;
      best_epoch = h.epoch;
    }
  }
  CHECK(r.selected_epoch == best_epoch);
  CHECK(accuracy(r.model.probe, dev_set) == doctest::Approx(best));
  CHECK_THROWS_AS(cp::train(train_set, {}, cfg), cp::Error);
}

TEST_CASE("train config presets and JSON") {
  const auto single = cp::TrainConfig::single_language();
  CHECK(single.epochs == 5);
  CHECK(single.learning_rate == 1e-3);
  CHECK(single.batch_size == 32);
  CHECK(single.select_best_on_validation);
  const auto zs = cp::TrainConfig::zero_shot();
  CHECK(zs.epochs == 2);
  CHECK_FALSE(zs.select_best_on_validation);

  cp::TrainConfig c;
  c.epochs = 7;
  c.optimizer = cp::OptimizerKind::kAdam;
  c.rng_seed = 1ULL << 60;
  CHECK(cp::train_config_from_json(nlohmann::json::parse(cp::to_json(c).dump()), {}) == c);
  CHECK_THROWS_AS(cp::train_config_from_json({{"epoch", 3}}, {}), cp::Error);
  CHECK_THROWS_AS(cp::train_config_from_json({{"epochs", 0}}, {}), cp::Error);
  CHECK_THROWS_AS(cp::train_config_from_json({{"epochs", "five"}}, {}), cp::Error);
  CHECK_THROWS_AS(cp::train_config_from_json({{"optimizer", "rmsprop"}}, {}), cp::Error);
  CHECK(cp::train_config_from_json({{"batch_size", 4}}, zs).epochs == 2);
}

TEST_CASE("checkpoint round trip") {
  const auto tb = synth(cp::WordOrder::kSVO, 20, 1, 1);
  const auto corpus = cp::make_probe_corpus(tb, nullptr);
  auto cfg = cp::TrainConfig::zero_shot();
  cfg.epochs = 1;
  cfg.train_encoder = true;
  const auto r = cp::train(corpus, {}, cfg, cp::init_toy_encoder(small_encoder(1)));
  const std::string bytes = cp::encode_checkpoint(r.model);
  CHECK(bytes.substr(0, 8) == "CLPCKPT1");
  const auto back = cp::decode_checkpoint(bytes);
  CHECK(back.backend() == "toy");
  CHECK(back.config == r.model.config);
  CHECK(back.encoder->config == r.model.encoder->config);
  CHECK(cp::encode_checkpoint(back) == bytes);
  // Weights are stored as float32.
  CHECK(back.probe.w1(0, 0) == static_cast<double>(static_cast<float>(r.model.probe.w1(0, 0))));
  CHECK(back.encoder->layers[0].ff_out(3, 2) ==
        static_cast<double>(static_cast<float>(r.model.encoder->layers[0].ff_out(3, 2))));

  CHECK_THROWS_AS(cp::decode_checkpoint(bytes.substr(0, bytes.size() - 3)), cp::FormatError);
  CHECK_THROWS_AS(cp::decode_checkpoint(bytes + "x"), cp::FormatError);
  CHECK_THROWS_AS(cp::decode_checkpoint("not a checkpoint"), cp::FormatError);

  const auto path = std::filesystem::temp_directory_path() / "clauseprobe_probe_test.ckpt";
  cp::save_checkpoint(r.model, path);
  CHECK(cp::encode_checkpoint(cp::load_checkpoint(path)) == bytes);
}

TEST_CASE("file backend checkpoint carries no encoder") {
  cp::ProbeModel m;
  m.probe = cp::init_probe(5, 3, 0);
  const auto back = cp::decode_checkpoint(cp::encode_checkpoint(m));
  CHECK(back.backend() == "file");
  CHECK_FALSE(back.encoder.has_value());
  CHECK(back.probe.dim() == 5);
  CHECK(back.probe.hidden_dim() == 3);
}

TEST_CASE("probe corpus from treebank and table") {
  const auto tb = cp::testing::load_fixture("01_simple_en.conllu");
  const auto corpus = cp::make_probe_corpus(tb, nullptr);
  CHECK(corpus.n_examples() == 5);
  CHECK(corpus.gold() == std::vector<ClauseLabel>{ClauseLabel::kMain, ClauseLabel::kSub,
                                                  ClauseLabel::kMain, ClauseLabel::kSub,
                                                  ClauseLabel::kSub});
  const auto enc = cp::init_toy_encoder(small_encoder(2));
  auto table = cp::toy_encode_treebank(tb, enc, false);
  const auto with_table = cp::make_probe_corpus(tb, &table);
  CHECK(with_table.sentences[1].record == table.find("en-2"));

  cp::EmbeddingTable partial(16, 1, 2, false);
  partial.add(table.records()[0]);
  try {
    cp::make_probe_corpus(tb, &partial);
    FAIL("expected missing vectors");
  } catch (const cp::Error& e) {
    CHECK(e.code() == cp::ErrorCode::kNotFound);
    CHECK(std::string(e.what()).find("en-2") != std::string::npos);
  }
}

TEST_CASE("file-backed features equal stored vectors") {
  const auto tb = cp::testing::load_fixture("05_zh.conllu");
  const auto enc = cp::init_toy_encoder(small_encoder(3));
  const auto table = cp::toy_encode_treebank(tb, enc, false);
  const auto corpus = cp::make_probe_corpus(tb, &table);
  cp::ProbeModel m;
  m.probe = cp::init_probe(16, 0, 1);
  const auto xs = cp::features(m, corpus.sentences[0]);
  REQUIRE(xs.size() == 2);
  const auto* rec = table.find("zh-1");
  CHECK(xs[1](4) == static_cast<double>(table.vector(*rec, 4)[4]));
  m.probe = cp::init_probe(8, 0, 1);
  CHECK_THROWS_AS(cp::features(m, corpus.sentences[0]), cp::Error);
}

TEST_CASE("joint training on a synthetic language reaches high dev accuracy") {
  const auto train_tb = synth(cp::WordOrder::kSVO, 400, 11, 5);
  const auto dev_tb = synth(cp::WordOrder::kSVO, 100, 12, 5);
  const auto train_set = cp::make_probe_corpus(train_tb, nullptr);
  const auto dev_set = cp::make_probe_corpus(dev_tb, nullptr);
  auto cfg = cp::TrainConfig::single_language();
  cfg.train_encoder = true;
  cfg.optimizer = cp::OptimizerKind::kAdam;
  cfg.learning_rate = 3e-3;
  const auto r = cp::train(train_set, dev_set, cfg, cp::init_toy_encoder(small_encoder(4)));
  REQUIRE(r.history.size() == 5);
  CHECK(*r.history[r.selected_epoch - 1].dev_accuracy >= 0.95);
  const auto pred = cp::predict(r.model, dev_set);
  const auto gold = dev_set.gold();
  int hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hit += pred[i] == gold[i];
  CHECK(static_cast<double>(hit) / static_cast<double>(gold.size()) ==
        doctest::Approx(*r.history[r.selected_epoch - 1].dev_accuracy));
}

TEST_CASE("frozen toy features leave the encoder untouched") {
  const auto tb = synth(cp::WordOrder::kSOV, 50, 1, 2);
  const auto corpus = cp::make_probe_corpus(tb, nullptr);
  auto cfg = cp::TrainConfig::zero_shot();
  const auto enc = cp::init_toy_encoder(small_encoder(5));
  const auto r = cp::train(corpus, {}, cfg, enc);
  CHECK(r.model.encoder->embedding == enc.embedding);
  CHECK(r.model.encoder->layers[0].wq == enc.layers[0].wq);
  cfg.train_encoder = true;
  const auto joint = cp::train(corpus, {}, cfg, enc);
  CHECK(joint.model.encoder->layers[0].wq != enc.layers[0].wq);
  CHECK_THROWS_AS(cp::train(corpus, {}, cfg, std::nullopt), cp::Error);
}

TEST_CASE("non-finite loss raises a numeric error") {
  std::vector<cp::LabeledVector> data = {
      {Eigen::VectorXd::Constant(2, std::nan("")), ClauseLabel::kMain},
      {Eigen::VectorXd::Constant(2, 1.0), ClauseLabel::kSub}};
  cp::TrainConfig cfg;
  cfg.select_best_on_validation = false;
  try {
    cp::train(data, {}, cfg);
    FAIL("expected a numeric error");
  } catch (const cp::Error& e) {
    CHECK(e.code() == cp::ErrorCode::kNumeric);
  }
}
