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

#include "clauseprobe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "clauseprobe/errors.hpp"

namespace clauseprobe {

double ConfusionMatrix::accuracy() const {
  if (total() == 0) throw Error(ErrorCode::kInvalidArgument, "accuracy of an empty confusion matrix");
  return static_cast<double>(correct()) / static_cast<double>(total());
}

ConfusionMatrix confusion(std::span<const ClauseLabel> gold,
                          std::span<const ClauseLabel> predicted) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "label length mismatch: " + std::to_string(gold.size()) + " gold vs " +
                    std::to_string(predicted.size()) + " predicted");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool gm = gold[i] == ClauseLabel::kMain;
    const bool pm = predicted[i] == ClauseLabel::kMain;
    if (gm && pm) ++cm.main_main;
    else if (gm) ++cm.main_sub;
    else if (pm) ++cm.sub_main;
    else ++cm.sub_sub;
  }
  return cm;
}

double majority_baseline(std::span<const ClauseLabel> gold) {
  if (gold.empty()) throw Error(ErrorCode::kInvalidArgument, "majority baseline of empty label set");
  const auto n_sub = std::count(gold.begin(), gold.end(), ClauseLabel::kSub);
  return static_cast<double>(n_sub) / static_cast<double>(gold.size());
}

EvalReport evaluate(std::string treebank_name, std::span<const ClauseLabel> gold,
                    std::span<const ClauseLabel> predicted) {
  if (gold.empty()) throw Error(ErrorCode::kInvalidArgument, treebank_name + ": no examples");
  EvalReport r;
  r.treebank_name = std::move(treebank_name);
  r.confusion = confusion(gold, predicted);
  r.accuracy = r.confusion.accuracy();
  r.baseline_accuracy = majority_baseline(gold);
  // Compare exact rationals: correct/total > n_sub/total.
  const auto n_sub = r.confusion.sub_main + r.confusion.sub_sub;
  r.beats_baseline = r.confusion.correct() > n_sub;
  return r;
}

TransferMatrix build_transfer_matrix(std::vector<std::string> sources,
                                     std::vector<std::string> targets,
                                     const std::vector<std::vector<ClauseLabel>>& gold,
                                     const CellPredictor& predict) {
  if (gold.size() != targets.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one gold label set per target is required");
  }
  TransferMatrix m;
  m.sources = std::move(sources);
  m.targets = std::move(targets);
  m.cells.resize(m.sources.size());
  for (std::size_t s = 0; s < m.sources.size(); ++s) {
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < m.targets.size(); ++t) {
      TransferCell cell;
      cell.report.treebank_name = m.targets[t];
      try {
        const auto pred = predict(s, t);
        cell.report = evaluate(m.targets[t], gold[t], pred);
        sum += cell.report.accuracy;
        ++ok;
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      m.cells[s].push_back(std::move(cell));
    }
    m.source_means.push_back(ok == 0 ? std::nan("") : sum / static_cast<double>(ok));
  }
  return m;
}

std::string format_percent(double fraction) {
  if (std::isnan(fraction)) return "n/a";
  const double tenths = std::round(fraction * 1000.0);  // half away from zero
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", tenths / 10.0);
  return buf;
}

std::string format_percent(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) return "n/a";
  // Exact: tenths = round(1000 * n / d) with halves rounded up.
  const std::size_t tenths = (2000 * numerator + denominator) / (2 * denominator);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

nlohmann::ordered_json to_json(const ConfusionMatrix& cm) {
  return {{"main_main", cm.main_main},
          {"main_sub", cm.main_sub},
          {"sub_main", cm.sub_main},
          {"sub_sub", cm.sub_sub}};
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["treebank"] = r.treebank_name;
  j["confusion"] = to_json(r.confusion);
  j["accuracy"] = r.accuracy;
  j["baseline_accuracy"] = r.baseline_accuracy;
  j["beats_baseline"] = r.beats_baseline;
  return j;
}

nlohmann::ordered_json to_json(const TransferMatrix& m) {
  nlohmann::ordered_json j;
  j["sources"] = m.sources;
  j["targets"] = m.targets;
  auto& rows = j["cells"] = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < m.sources.size(); ++s) {
    auto row = nlohmann::ordered_json::array();
    for (const auto& cell : m.cells[s]) {
      nlohmann::ordered_json c;
      c["source"] = m.sources[s];
      if (cell.failed) {
        c["target"] = cell.report.treebank_name;
        c["failed"] = true;
        c["error"] = cell.error;
      } else {
        c.update(to_json(cell.report));
        c["failed"] = false;
      }
      row.push_back(std::move(c));
    }
    rows.push_back(std::move(row));
  }
  auto& means = j["source_means"] = nlohmann::ordered_json::array();
  for (double v : m.source_means) {
    means.push_back(std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v));
  }
  return j;
}

std::string to_text(const TransferMatrix& m) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {""};
  header.insert(header.end(), m.targets.begin(), m.targets.end());
  header.push_back("mean");
  grid.push_back(header);
  for (std::size_t s = 0; s < m.sources.size(); ++s) {
    std::vector<std::string> row = {m.sources[s]};
    for (const auto& cell : m.cells[s]) {
      if (cell.failed) {
        row.push_back("ERR");
      } else {
        const auto& cm = cell.report.confusion;
        row.push_back(format_percent(cm.correct(), cm.total()) +
                      (cell.report.beats_baseline ? " " : "_"));
      }
    }
    row.push_back(format_percent(m.source_means[s]) + " ");
    grid.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        out += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  out += "(_ = does not beat the majority-class baseline)\n";
  return out;
}

}  // namespace clauseprobe
