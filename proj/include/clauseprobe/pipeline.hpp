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

// Glue between treebanks, vector sources and probes: training on treebanks,
// scoring models on test sets and building transfer matrices.

#ifndef CLAUSEPROBE_PIPELINE_HPP_
#define CLAUSEPROBE_PIPELINE_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clauseprobe/conllu.hpp"
#include "clauseprobe/encoder.hpp"
#include "clauseprobe/eval.hpp"
#include "clauseprobe/probe.hpp"
#include "clauseprobe/typology.hpp"

namespace clauseprobe {

// A treebank with its optional pre-computed vectors.
struct LabeledTreebank {
  Treebank treebank;
  std::optional<EmbeddingTable> table;

  const EmbeddingTable* table_ptr() const { return table ? &*table : nullptr; }
};

// Trains with the toy backend when `toy` is given, else on the tables.
TrainResult train_on_treebanks(const LabeledTreebank& train_set, const LabeledTreebank* dev_set,
                               const TrainConfig& cfg, const std::optional<ToyEncoderConfig>& toy);

// Labels in example order. File-backed models need the test set's table.
std::vector<ClauseLabel> predict_treebank(const ProbeModel& model, const LabeledTreebank& test);

EvalReport evaluate_model(const ProbeModel& model, const LabeledTreebank& test);

PositionalErrorReport positional_report(const ProbeModel& model, const LabeledTreebank& test,
                                        const PositionalOptions& options = {});

// Rows are models, columns test sets. Cells whose prediction throws (for
// instance a vector dimension mismatch) are marked failed.
TransferMatrix transfer_matrix(std::span<const ProbeModel> models,
                               std::vector<std::string> model_names,
                               std::span<const LabeledTreebank> tests);

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_PIPELINE_HPP_
