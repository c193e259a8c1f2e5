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

// Word-order statistics over treebanks and predictions: head direction,
// clause spans, positional error buckets, complementizer position and
// attention mass on complementizers.

#ifndef CLAUSEPROBE_TYPOLOGY_HPP_
#define CLAUSEPROBE_TYPOLOGY_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "clauseprobe/conllu.hpp"
#include "clauseprobe/encoder.hpp"
#include "clauseprobe/taskdata.hpp"
#include "json.hpp"

namespace clauseprobe {

struct HeadDirectionCounts {
  std::size_t n_total = 0;
  std::size_t n_parent_right = 0;
  // Absent when n_total == 0.
  std::optional<double> fraction_parent_right() const;

  bool operator==(const HeadDirectionCounts&) const = default;
};

using HeadDirectionProfile = std::map<std::string, HeadDirectionCounts>;

// advcl, acl, dep, ccomp, xcomp, csubj
const std::set<std::string>& default_head_direction_relations();

// Counts tokens whose base deprel is in `deprels`; "parent right" means
// head id > token id. Every requested relation appears in the result.
HeadDirectionProfile head_direction(const Treebank& tb, const std::set<std::string>& deprels);

struct TokenRange {
  int first = 0;
  int last = 0;

  bool operator==(const TokenRange&) const = default;
};

// Minimal and maximal token id in the predicate's dependency subtree.
TokenRange clause_span(const Sentence& sentence, int predicate_index);

// Like clause_span, but does not descend into dependents whose relation is
// itself clausal (acl, ccomp, advcl, csubj, xcomp): the extent of the clause's
// own material.
TokenRange clause_local_span(const Sentence& sentence, int predicate_index);

enum class SpanMode { kLocal, kProjection };

struct PositionalErrorReport {
  std::size_t initial_sub_as_main = 0;
  std::size_t initial_main_as_sub = 0;
  std::size_t final_main_as_sub = 0;
  std::size_t final_sub_as_main = 0;
  // Gold populations the counts are drawn from.
  std::size_t initial_sub = 0;
  std::size_t initial_main = 0;
  std::size_t final_main = 0;
  std::size_t final_sub = 0;

  bool operator==(const PositionalErrorReport&) const = default;
};

struct PositionalOptions {
  bool final_punct_exempt = true;
  SpanMode span_mode = SpanMode::kLocal;
};

// A clause is sentence-initial when its span starts at token 1 and
// sentence-final when it ends at the last token (trailing punct skipped when
// exempt). `gold` and `predicted` align with `examples`.
PositionalErrorReport positional_errors(std::span<const ClauseExample> examples,
                                        std::span<const ClauseLabel> gold,
                                        std::span<const ClauseLabel> predicted,
                                        const Treebank& sentences,
                                        const PositionalOptions& options = {});

struct CompPositionProfile {
  std::size_t n_sub_clauses_with_mark = 0;
  std::size_t n_mark_before_head = 0;
  std::optional<double> fraction_pre() const;

  bool operator==(const CompPositionProfile&) const = default;
};

// Over SUB predicates with at least one `mark` dependent: does the first mark
// precede the predicate?
CompPositionProfile comp_position(const Treebank& tb);

enum class HeadAggregation { kMean, kMax };

struct AttentionLayerStat {
  double mean_mass = 0.0;
  std::size_t n_examples = 0;
};

struct AttentionProfile {
  std::vector<AttentionLayerStat> layers;
};

// For each SUB example with mark dependents: attention from the predicate's
// first subword to the marks' first subwords, summed over marks and aggregated
// over heads; averaged per layer across examples.
AttentionProfile attention_profile(const EmbeddingTable& table,
                                   std::span<const ClauseExample> examples,
                                   const Treebank& sentences,
                                   HeadAggregation aggregation = HeadAggregation::kMean);

nlohmann::ordered_json to_json(const HeadDirectionProfile& profile);
nlohmann::ordered_json to_json(const PositionalErrorReport& report);
nlohmann::ordered_json to_json(const CompPositionProfile& profile);
nlohmann::ordered_json to_json(const AttentionProfile& profile);
std::string to_text(const HeadDirectionProfile& profile);

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_TYPOLOGY_HPP_
