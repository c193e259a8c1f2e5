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

// Confusion matrices, majority-class baselines and source x target transfer
// grids.

#ifndef CLAUSEPROBE_EVAL_HPP_
#define CLAUSEPROBE_EVAL_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clauseprobe/taskdata.hpp"
#include "json.hpp"

namespace clauseprobe {

// Cells are gold-then-predicted.
struct ConfusionMatrix {
  std::size_t main_main = 0;
  std::size_t main_sub = 0;
  std::size_t sub_main = 0;
  std::size_t sub_sub = 0;

  std::size_t total() const { return main_main + main_sub + sub_main + sub_sub; }
  std::size_t correct() const { return main_main + sub_sub; }
  // Throws when total() == 0.
  double accuracy() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const ClauseLabel> gold,
                          std::span<const ClauseLabel> predicted);

// Fraction of gold labels equal to SUB. Throws on empty input.
double majority_baseline(std::span<const ClauseLabel> gold);

struct EvalReport {
  std::string treebank_name;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double baseline_accuracy = 0.0;
  bool beats_baseline = false;  // accuracy > baseline, strictly
};

EvalReport evaluate(std::string treebank_name, std::span<const ClauseLabel> gold,
                    std::span<const ClauseLabel> predicted);

struct TransferCell {
  EvalReport report;
  bool failed = false;
  std::string error;
};

struct TransferMatrix {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  std::vector<std::vector<TransferCell>> cells;  // [source][target]
  std::vector<double> source_means;              // over non-failed cells

  const TransferCell& at(std::size_t source, std::size_t target) const {
    return cells[source][target];
  }
};

// `predict(s, t)` returns predicted labels for target t under source s, in the
// order of `gold[t]`. Exceptions thrown by it mark that cell failed.
using CellPredictor = std::function<std::vector<ClauseLabel>(std::size_t, std::size_t)>;

TransferMatrix build_transfer_matrix(std::vector<std::string> sources,
                                     std::vector<std::string> targets,
                                     const std::vector<std::vector<ClauseLabel>>& gold,
                                     const CellPredictor& predict);

// Percent with one decimal, rounding half away from zero.
std::string format_percent(double fraction);
// Same rounding computed exactly from an integer ratio.
std::string format_percent(std::size_t numerator, std::size_t denominator);

nlohmann::ordered_json to_json(const ConfusionMatrix& cm);
nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const TransferMatrix& matrix);
// Aligned table: rows are sources, columns targets, last column the row mean.
// Cells that do not beat the baseline carry a trailing '_'.
std::string to_text(const TransferMatrix& matrix);

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_EVAL_HPP_
