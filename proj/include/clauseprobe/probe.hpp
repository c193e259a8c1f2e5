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

// Two-layer tanh MLP classifier over predicate vectors, its cross-entropy
// gradients, the training loop and the checkpoint format.

#ifndef CLAUSEPROBE_PROBE_HPP_
#define CLAUSEPROBE_PROBE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clauseprobe/conllu.hpp"
#include "clauseprobe/encoder.hpp"
#include "clauseprobe/optimizer.hpp"
#include "clauseprobe/taskdata.hpp"
#include "json.hpp"

namespace clauseprobe {

// Output index 0 is MAIN, 1 is SUB.
struct ProbeParams {
  Eigen::MatrixXd w1;  // hidden x dim
  Eigen::MatrixXd b1;  // hidden x 1
  Eigen::MatrixXd w2;  // 2 x hidden
  Eigen::MatrixXd b2;  // 2 x 1

  Eigen::Index dim() const { return w1.cols(); }
  Eigen::Index hidden_dim() const { return w1.rows(); }
  std::vector<Eigen::MatrixXd*> tensors() { return {&w1, &b1, &w2, &b2}; }
  std::vector<const Eigen::MatrixXd*> tensors() const { return {&w1, &b1, &w2, &b2}; }

  bool operator==(const ProbeParams& o) const {
    return w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2;
  }
};

// Uniform in [-1/sqrt(dim), 1/sqrt(dim)]; hidden_dim 0 means hidden = dim.
ProbeParams init_probe(Eigen::Index dim, Eigen::Index hidden_dim, std::uint64_t seed);
ProbeParams zero_probe(Eigen::Index dim, Eigen::Index hidden_dim);

struct ProbeOutput {
  Eigen::Vector2d logits;
  Eigen::Vector2d probs;
};

// Throws Error(kDimension) when x does not match the probe input size.
ProbeOutput probe_forward(const Eigen::VectorXd& x, const ProbeParams& p);

// Exactly equal logits resolve to SUB.
ClauseLabel predict_label(const Eigen::VectorXd& x, const ProbeParams& p);
std::vector<ClauseLabel> predict(std::span<const Eigen::VectorXd> xs, const ProbeParams& p);

struct LabeledVector {
  Eigen::VectorXd x;
  ClauseLabel label = ClauseLabel::kMain;
};

// Mean negative log-likelihood over a non-empty batch. Writes exact gradients
// into `grads` (shapes are reset) and, when requested, d(loss)/d(x) per example.
double loss_and_grad(std::span<const LabeledVector> batch, const ProbeParams& p,
                     ProbeParams* grads,
                     std::vector<Eigen::VectorXd>* input_grads = nullptr);

struct TrainConfig {
  int epochs = 5;
  double learning_rate = 1e-3;
  int batch_size = 32;
  std::uint64_t rng_seed = 0;
  bool select_best_on_validation = true;
  bool train_encoder = false;
  int hidden_dim = 0;  // 0: same as input dim
  OptimizerKind optimizer = OptimizerKind::kSgd;

  static TrainConfig single_language();  // 5 epochs, best-on-dev
  static TrainConfig zero_shot();        // 2 epochs, last epoch

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& cfg);
nlohmann::ordered_json to_json(const TrainConfig& cfg);
// Keys absent from `j` keep the value from `base`; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base);
nlohmann::ordered_json to_json(const ToyEncoderConfig& cfg);
ToyEncoderConfig toy_config_from_json(const nlohmann::json& j, ToyEncoderConfig base);

// One sentence's prediction targets. Pointers refer into the treebank and
// embedding table the corpus was built from, which must outlive it.
struct ProbeSentence {
  const Sentence* sentence = nullptr;
  const EmbeddingRecord* record = nullptr;
  std::vector<int> predicate_indices;
  std::vector<ClauseLabel> labels;
};

struct ProbeCorpus {
  std::string name;
  std::vector<ProbeSentence> sentences;
  std::size_t n_examples() const;
  std::vector<ClauseLabel> gold() const;
};

// Sentences without qualifying predicates are dropped. With a table, every
// kept sentence must have a record of matching token count.
ProbeCorpus make_probe_corpus(const Treebank& tb, const EmbeddingTable* table);

struct ProbeModel {
  ProbeParams probe;
  std::optional<ToyEncoderParams> encoder;  // present for the toy backend
  TrainConfig config;

  std::string backend() const { return encoder ? "toy" : "file"; }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> dev_accuracy;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  ProbeModel model;
  std::vector<EpochRecord> history;
  int selected_epoch = 0;
};

nlohmann::ordered_json to_json(const std::vector<EpochRecord>& history, int selected_epoch);

// The probe parameters training starts from.
ProbeParams initial_probe(const TrainConfig& cfg, Eigen::Index dim);

// Trains on pre-computed vectors.
TrainResult train(std::span<const LabeledVector> train_set,
                  std::span<const LabeledVector> dev_set, const TrainConfig& cfg);

// Trains on a corpus. With `encoder`, vectors come from the toy encoder
// (updated jointly when cfg.train_encoder); otherwise from embedding records.
TrainResult train(const ProbeCorpus& train_set, const ProbeCorpus& dev_set,
                  const TrainConfig& cfg, std::optional<ToyEncoderParams> encoder);

// Predicate vectors of one sentence in target order.
std::vector<Eigen::VectorXd> features(const ProbeModel& model, const ProbeSentence& s);
std::vector<ClauseLabel> predict(const ProbeModel& model, const ProbeCorpus& corpus);

std::string encode_checkpoint(const ProbeModel& model);
ProbeModel decode_checkpoint(std::string_view bytes);
void save_checkpoint(const ProbeModel& model, const std::filesystem::path& path);
ProbeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_PROBE_HPP_
