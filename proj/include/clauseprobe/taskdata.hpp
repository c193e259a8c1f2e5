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

// Main-vs-subordinate predicate extraction and subword alignment.

#ifndef CLAUSEPROBE_TASKDATA_HPP_
#define CLAUSEPROBE_TASKDATA_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clauseprobe/conllu.hpp"

namespace clauseprobe {

enum class ClauseLabel : std::uint8_t { kMain = 0, kSub = 1 };

std::string_view to_string(ClauseLabel label);
// Accepts "MAIN" / "SUB".
std::optional<ClauseLabel> parse_label(std::string_view text);

// Part of a deprel before the first ':' (the whole string if there is none).
std::string_view base_deprel(std::string_view deprel);

// root -> MAIN; acl, ccomp, advcl, csubj, xcomp -> SUB; anything else none.
std::optional<ClauseLabel> label_for_deprel(std::string_view deprel);

struct ClauseExample {
  std::string treebank_name;
  std::string sent_id;
  int predicate_index = 0;  // 1-based token id
  ClauseLabel label = ClauseLabel::kMain;
  std::string source_deprel;

  bool operator==(const ClauseExample&) const = default;
};

// One example per qualifying token, in corpus order.
std::vector<ClauseExample> extract_examples(const Treebank& tb);
std::vector<ClauseExample> extract_examples(const Sentence& sentence,
                                            const std::string& treebank_name);

struct GoldCounts {
  std::size_t n_main = 0;
  std::size_t n_sub = 0;

  bool operator==(const GoldCounts&) const = default;
};

GoldCounts gold_counts(std::span<const ClauseExample> examples);
std::vector<ClauseLabel> labels_of(std::span<const ClauseExample> examples);

// Half-open [begin, end) range in Unicode code points.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

struct SubwordAlignment {
  std::string sent_id;
  std::vector<std::uint32_t> token_to_first_subword;
  std::uint32_t n_subwords = 0;

  bool operator==(const SubwordAlignment&) const = default;
};

// Character span of every token inside Sentence::text, found by a left-to-right
// scan. Words inside a multiword range share the range's span. Tokens whose
// form cannot be located are std::nullopt.
std::vector<std::optional<CharSpan>> token_char_spans(const Sentence& sentence);

// Maps each token to the first subword starting inside its span (falling back
// to the first subword overlapping it). Throws on unsorted/overlapping spans,
// tokens without offsets, or tokens no subword touches.
SubwordAlignment align_subwords(const Sentence& sentence,
                                std::span<const CharSpan> subword_spans);

// One subword per token.
SubwordAlignment identity_alignment(const Sentence& sentence);

// {treebank, sent_id, predicate_index, label, source_deprel} per line.
std::string to_jsonl(std::span<const ClauseExample> examples);

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_TASKDATA_HPP_
