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

#include "clauseprobe/taskdata.hpp"

#include <algorithm>
#include <array>

#include "clauseprobe/errors.hpp"
#include "json.hpp"

namespace clauseprobe {
namespace {

constexpr std::array<std::string_view, 5> kSubordinateRelations = {
    "acl", "ccomp", "advcl", "csubj", "xcomp"};

// Code point index of every byte offset that starts a code point, plus the end.
std::vector<std::size_t> codepoint_index(std::string_view text) {
  std::vector<std::size_t> index(text.size() + 1, 0);
  std::size_t cp = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto byte = static_cast<unsigned char>(text[i]);
    if ((byte & 0xC0) == 0x80) {
      index[i] = cp - 1;  // continuation byte
    } else {
      index[i] = cp++;
    }
  }
  index[text.size()] = cp;
  return index;
}

}  // namespace

std::string_view to_string(ClauseLabel label) {
  return label == ClauseLabel::kMain ? "MAIN" : "SUB";
}

std::optional<ClauseLabel> parse_label(std::string_view text) {
  if (text == "MAIN") return ClauseLabel::kMain;
  if (text == "SUB") return ClauseLabel::kSub;
  return std::nullopt;
}

std::string_view base_deprel(std::string_view deprel) {
  return deprel.substr(0, deprel.find(':'));
}

std::optional<ClauseLabel> label_for_deprel(std::string_view deprel) {
  const auto base = base_deprel(deprel);
  if (base == "root") return ClauseLabel::kMain;
  if (std::find(kSubordinateRelations.begin(), kSubordinateRelations.end(), base) !=
      kSubordinateRelations.end()) {
    return ClauseLabel::kSub;
  }
  return std::nullopt;
}

std::vector<ClauseExample> extract_examples(const Sentence& sentence,
                                            const std::string& treebank_name) {
  std::vector<ClauseExample> out;
  for (const auto& tok : sentence.tokens) {
    if (auto label = label_for_deprel(tok.deprel)) {
      out.push_back({treebank_name, sentence.sent_id, tok.id, *label, tok.deprel});
    }
  }
  return out;
}

std::vector<ClauseExample> extract_examples(const Treebank& tb) {
  std::vector<ClauseExample> out;
  for (const auto& s : tb.sentences) {
    auto part = extract_examples(s, tb.name);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

GoldCounts gold_counts(std::span<const ClauseExample> examples) {
  GoldCounts c;
  for (const auto& e : examples) {
    (e.label == ClauseLabel::kMain ? c.n_main : c.n_sub) += 1;
  }
  return c;
}

std::vector<ClauseLabel> labels_of(std::span<const ClauseExample> examples) {
  std::vector<ClauseLabel> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

std::vector<std::optional<CharSpan>> token_char_spans(const Sentence& sentence) {
  const std::string& text = sentence.text;
  const auto cps = codepoint_index(text);
  const std::size_t n = sentence.tokens.size();
  std::vector<std::optional<CharSpan>> spans(n);

  // Surface form covering each token: itself, or the multiword range it is in.
  std::vector<int> range_end(n + 1, 0);
  std::vector<std::string> range_form(n + 1);
  for (const auto& o : sentence.opaque) {
    const auto tab = o.text.find('\t');
    const std::string id = o.text.substr(0, tab);
    const auto dash = id.find('-');
    if (dash == std::string::npos) continue;
    const int a = std::stoi(id.substr(0, dash));
    const int b = std::stoi(id.substr(dash + 1));
    if (a < 1 || static_cast<std::size_t>(a) > n) continue;
    const auto tab2 = o.text.find('\t', tab + 1);
    range_end[static_cast<std::size_t>(a)] = b;
    range_form[static_cast<std::size_t>(a)] = o.text.substr(tab + 1, tab2 - tab - 1);
  }

  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n;) {
    std::string form = sentence.tokens[i].form;
    std::size_t last = i;
    if (range_end[i + 1] > 0) {
      form = range_form[i + 1];
      last = std::min(n, static_cast<std::size_t>(range_end[i + 1])) - 1;
      last = std::max(last, i);
    }
    const auto pos = text.find(form, cursor);
    if (pos != std::string::npos) {
      const CharSpan span{cps[pos], cps[pos + form.size()]};
      for (std::size_t j = i; j <= last; ++j) spans[j] = span;
      cursor = pos + form.size();
    }
    i = last + 1;
  }
  return spans;
}

SubwordAlignment align_subwords(const Sentence& sentence,
                                std::span<const CharSpan> subword_spans) {
  if (subword_spans.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sentence " + sentence.sent_id + ": no subword spans");
  }
  for (std::size_t j = 0; j < subword_spans.size(); ++j) {
    if (subword_spans[j].begin >= subword_spans[j].end ||
        (j > 0 && subword_spans[j].begin < subword_spans[j - 1].end)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sentence " + sentence.sent_id + ": subword span " + std::to_string(j) +
                      " is empty, unsorted or overlapping");
    }
  }
  const auto token_spans = token_char_spans(sentence);
  SubwordAlignment out;
  out.sent_id = sentence.sent_id;
  out.n_subwords = static_cast<std::uint32_t>(subword_spans.size());
  out.token_to_first_subword.reserve(token_spans.size());

  // Subword starts are sorted, so a moving lower bound suffices.
  std::size_t lo = 0;
  for (std::size_t i = 0; i < token_spans.size(); ++i) {
    const auto& tok = sentence.tokens[i];
    if (!token_spans[i]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sentence " + sentence.sent_id + ": token " + std::to_string(tok.id) +
                      " ('" + tok.form + "') has no recoverable character offsets");
    }
    const CharSpan t = *token_spans[i];
    while (lo < subword_spans.size() && subword_spans[lo].end <= t.begin) ++lo;
    std::optional<std::size_t> hit;
    for (std::size_t j = lo; j < subword_spans.size() && subword_spans[j].begin < t.end; ++j) {
      if (subword_spans[j].begin >= t.begin) {
        hit = j;
        break;
      }
    }
    if (!hit && lo < subword_spans.size() && subword_spans[lo].begin < t.end &&
        subword_spans[lo].end > t.begin) {
      hit = lo;
    }
    if (!hit) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sentence " + sentence.sent_id + ": token " + std::to_string(tok.id) +
                      " ('" + tok.form + "') intersects no subword");
    }
    out.token_to_first_subword.push_back(static_cast<std::uint32_t>(*hit));
  }
  return out;
}

SubwordAlignment identity_alignment(const Sentence& sentence) {
  SubwordAlignment out;
  out.sent_id = sentence.sent_id;
  out.n_subwords = static_cast<std::uint32_t>(sentence.tokens.size());
  for (std::uint32_t i = 0; i < out.n_subwords; ++i) out.token_to_first_subword.push_back(i);
  return out;
}

std::string to_jsonl(std::span<const ClauseExample> examples) {
  std::string out;
  for (const auto& e : examples) {
    nlohmann::ordered_json j;
    j["treebank"] = e.treebank_name;
    j["sent_id"] = e.sent_id;
    j["predicate_index"] = e.predicate_index;
    j["label"] = to_string(e.label);
    j["source_deprel"] = e.source_deprel;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace clauseprobe
