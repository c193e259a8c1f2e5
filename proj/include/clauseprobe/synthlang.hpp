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

// Synthetic UD corpora with a controlled basic word order and complementizer
// position.

#ifndef CLAUSEPROBE_SYNTHLANG_HPP_
#define CLAUSEPROBE_SYNTHLANG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "clauseprobe/conllu.hpp"
#include "json.hpp"

namespace clauseprobe {

enum class WordOrder { kSVO, kSOV, kVSO };
enum class CompPosition { kPre, kPost };

std::string_view to_string(WordOrder order);
std::string_view to_string(CompPosition position);
WordOrder parse_word_order(std::string_view text);
CompPosition parse_comp_position(std::string_view text);
// POST for SOV, PRE otherwise.
CompPosition default_comp_position(WordOrder order);

struct SynthVocabSizes {
  int nouns = 40;
  int verbs = 30;
  int complementizers = 3;
  int adverbial_markers = 3;
};

struct SynthGrammarConfig {
  WordOrder order = WordOrder::kSVO;
  CompPosition comp_position = CompPosition::kPre;
  int n_sentences = 1000;
  // Probability of embedding a clause at each level; 0 gives single-clause
  // sentences.
  double p_subordinate = 0.5;
  int max_depth = 2;
  SynthVocabSizes vocab;
  std::uint64_t rng_seed = 0;
  // Seed for the lexicon; defaults to rng_seed. Corpora sharing a vocab seed
  // share words, corpora with different vocab seeds share none.
  std::optional<std::uint64_t> vocab_seed;
  bool final_punct = true;
  std::string name;  // defaults to "synth-<ORDER>-<COMP>-<seed>"
};

void validate(const SynthGrammarConfig& cfg);
SynthGrammarConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SynthGrammarConfig& cfg);

// Expected number of subordinate predicates per sentence: sum of p^k, k=1..depth.
double expected_sub_per_sentence(const SynthGrammarConfig& cfg);

// Each sentence is a main clause optionally embedding a ccomp (introduced by
// a complementizer) or advcl (introduced by an adverbial marker), recursively
// up to max_depth. SOV places embedded clauses before the matrix clause,
// SVO/VSO after it.
Treebank generate_corpus(const SynthGrammarConfig& cfg);

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_SYNTHLANG_HPP_
