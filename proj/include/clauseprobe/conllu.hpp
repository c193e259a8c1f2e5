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

// CoNLL-U reader, writer and tree validator.

#ifndef CLAUSEPROBE_CONLLU_HPP_
#define CLAUSEPROBE_CONLLU_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clauseprobe {

struct Token {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::vector<std::pair<std::string, std::string>> feats;
  int head = 0;
  std::string deprel;
  std::string deps;
  std::string misc;

  bool operator==(const Token&) const = default;
};

// Multiword-token range line ("3-4") or empty-node line ("5.1"), kept
// verbatim. `position` is the number of regular tokens preceding the line.
struct OpaqueLine {
  std::size_t position = 0;
  std::string text;

  bool operator==(const OpaqueLine&) const = default;
};

struct Sentence {
  std::string sent_id;
  std::string text;
  std::vector<Token> tokens;
  // Raw comment lines including the leading '#', in file order.
  std::vector<std::string> comments;
  std::vector<OpaqueLine> opaque;

  std::size_t size() const { return tokens.size(); }
  // 1-based access.
  const Token& token(int id) const { return tokens.at(static_cast<std::size_t>(id - 1)); }

  bool operator==(const Sentence&) const = default;
};

struct Treebank {
  std::string name;
  std::string language_code;
  std::vector<Sentence> sentences;

  bool operator==(const Treebank&) const = default;
};

// One violated rule. token_id is 0 when the rule concerns the whole sentence.
struct Diagnostic {
  std::string sent_id;
  int token_id = 0;
  std::string rule;
  std::string message;
};

// Parses a whole file. Throws ParseError naming the sentence and line on the
// first malformed line or tree violation. When `skipped` is non-null, sentences
// that fail validation are dropped and reported there instead.
Treebank parse_conllu(std::string_view text, std::string name,
                      std::string language_code,
                      std::vector<Diagnostic>* skipped = nullptr);

Treebank load_conllu(const std::filesystem::path& path, std::string name,
                     std::string language_code,
                     std::vector<Diagnostic>* skipped = nullptr);

// LF-terminated CoNLL-U block for one sentence, including the blank
// separator line.
std::string serialize(const Sentence& sentence);
std::string serialize(const Treebank& treebank);

std::vector<Diagnostic> validate_sentence(const Sentence& sentence);
std::vector<Diagnostic> validate_treebank(const Treebank& treebank);

// Text reconstructed from surface forms (multiword ranges and SpaceAfter=No
// honored). Used when a sentence carries no "# text" comment.
std::string reconstruct_text(const Sentence& sentence);

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_CONLLU_HPP_
