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

#include "clauseprobe/pipeline.hpp"

#include "clauseprobe/errors.hpp"
#include "clauseprobe/taskdata.hpp"

namespace clauseprobe {
namespace {

const EmbeddingTable* table_for(const ProbeModel& model, const LabeledTreebank& test) {
  if (model.encoder) return nullptr;
  if (!test.table) {
    throw Error(ErrorCode::kNotFound, test.treebank.name + ": no vectors for a file-backed model");
  }
  return &*test.table;
}

}  // namespace

TrainResult train_on_treebanks(const LabeledTreebank& train_set, const LabeledTreebank* dev_set,
                               const TrainConfig& cfg, const std::optional<ToyEncoderConfig>& toy) {
  std::optional<ToyEncoderParams> encoder;
  if (toy) encoder = init_toy_encoder(*toy);
  auto source = [&](const LabeledTreebank& lt) -> const EmbeddingTable* {
    if (toy) return nullptr;
    if (!lt.table) throw Error(ErrorCode::kNotFound, lt.treebank.name + ": no vectors");
    return &*lt.table;
  };
  const ProbeCorpus train_corpus = make_probe_corpus(train_set.treebank, source(train_set));
  ProbeCorpus dev_corpus;
  if (dev_set != nullptr) dev_corpus = make_probe_corpus(dev_set->treebank, source(*dev_set));
  return train(train_corpus, dev_corpus, cfg, std::move(encoder));
}

std::vector<ClauseLabel> predict_treebank(const ProbeModel& model, const LabeledTreebank& test) {
  return predict(model, make_probe_corpus(test.treebank, table_for(model, test)));
}

EvalReport evaluate_model(const ProbeModel& model, const LabeledTreebank& test) {
  const ProbeCorpus corpus = make_probe_corpus(test.treebank, table_for(model, test));
  const auto gold = corpus.gold();
  return evaluate(test.treebank.name, gold, predict(model, corpus));
}

PositionalErrorReport positional_report(const ProbeModel& model, const LabeledTreebank& test,
                                        const PositionalOptions& options) {
  const auto examples = extract_examples(test.treebank);
  const auto gold = labels_of(examples);
  const auto pred = predict_treebank(model, test);
  return positional_errors(examples, gold, pred, test.treebank, options);
}

TransferMatrix transfer_matrix(std::span<const ProbeModel> models,
                               std::vector<std::string> model_names,
                               std::span<const LabeledTreebank> tests) {
  if (model_names.size() != models.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one name per model required");
  }
  std::vector<std::string> targets;
  std::vector<std::vector<ClauseLabel>> gold;
  for (const auto& t : tests) {
    targets.push_back(t.treebank.name);
    gold.push_back(labels_of(extract_examples(t.treebank)));
  }
  return build_transfer_matrix(std::move(model_names), std::move(targets), gold,
                               [&](std::size_t s, std::size_t t) {
                                 return predict_treebank(models[s], tests[t]);
                               });
}

}  // namespace clauseprobe
