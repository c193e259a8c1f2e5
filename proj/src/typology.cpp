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

#include "clauseprobe/typology.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "clauseprobe/errors.hpp"

namespace clauseprobe {
namespace {

std::vector<std::vector<int>> children_of(const Sentence& s) {
  std::vector<std::vector<int>> kids(s.tokens.size() + 1);
  for (const auto& t : s.tokens) {
    if (t.head >= 0 && static_cast<std::size_t>(t.head) <= s.tokens.size()) {
      kids[static_cast<std::size_t>(t.head)].push_back(t.id);
    }
  }
  return kids;
}

TokenRange subtree_range(const Sentence& s, int predicate_index, bool stop_at_clauses) {
  if (predicate_index < 1 || static_cast<std::size_t>(predicate_index) > s.tokens.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sentence " + s.sent_id + ": predicate index " +
                    std::to_string(predicate_index) + " out of range");
  }
  const auto kids = children_of(s);
  TokenRange r{predicate_index, predicate_index};
  std::vector<int> stack = {predicate_index};
  std::vector<char> seen(s.tokens.size() + 1, 0);
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(cur)]) continue;
    seen[static_cast<std::size_t>(cur)] = 1;
    r.first = std::min(r.first, cur);
    r.last = std::max(r.last, cur);
    for (int child : kids[static_cast<std::size_t>(cur)]) {
      if (stop_at_clauses &&
          label_for_deprel(s.token(child).deprel) == ClauseLabel::kSub) {
        continue;
      }
      stack.push_back(child);
    }
  }
  return r;
}

std::unordered_map<std::string, const Sentence*> index_sentences(const Treebank& tb) {
  std::unordered_map<std::string, const Sentence*> idx;
  for (const auto& s : tb.sentences) idx.emplace(s.sent_id, &s);
  return idx;
}

const Sentence& lookup(const std::unordered_map<std::string, const Sentence*>& idx,
                       const std::string& sent_id) {
  auto it = idx.find(sent_id);
  if (it == idx.end()) throw Error(ErrorCode::kNotFound, "unknown sentence " + sent_id);
  return *it->second;
}

std::vector<int> mark_dependents(const Sentence& s, int head) {
  std::vector<int> marks;
  for (const auto& t : s.tokens) {
    if (t.head == head && base_deprel(t.deprel) == "mark") marks.push_back(t.id);
  }
  return marks;
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
}

}  // namespace

std::optional<double> HeadDirectionCounts::fraction_parent_right() const {
  if (n_total == 0) return std::nullopt;
  return static_cast<double>(n_parent_right) / static_cast<double>(n_total);
}

const std::set<std::string>& default_head_direction_relations() {
  static const std::set<std::string> kRelations = {"advcl", "acl",   "dep",
                                                   "ccomp", "xcomp", "csubj"};
  return kRelations;
}

HeadDirectionProfile head_direction(const Treebank& tb, const std::set<std::string>& deprels) {
  HeadDirectionProfile profile;
  for (const auto& d : deprels) profile[d];
  for (const auto& s : tb.sentences) {
    for (const auto& t : s.tokens) {
      auto it = profile.find(std::string(base_deprel(t.deprel)));
      if (it == profile.end()) continue;
      ++it->second.n_total;
      if (t.head > t.id) ++it->second.n_parent_right;
    }
  }
  return profile;
}

TokenRange clause_span(const Sentence& sentence, int predicate_index) {
  return subtree_range(sentence, predicate_index, false);
}

TokenRange clause_local_span(const Sentence& sentence, int predicate_index) {
  return subtree_range(sentence, predicate_index, true);
}

PositionalErrorReport positional_errors(std::span<const ClauseExample> examples,
                                        std::span<const ClauseLabel> gold,
                                        std::span<const ClauseLabel> predicted,
                                        const Treebank& sentences,
                                        const PositionalOptions& options) {
  if (examples.size() != gold.size() || examples.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument, "positional_errors: sequences differ in length");
  }
  const auto idx = index_sentences(sentences);
  PositionalErrorReport r;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Sentence& s = lookup(idx, examples[i].sent_id);
    const TokenRange span = options.span_mode == SpanMode::kLocal
                                ? clause_local_span(s, examples[i].predicate_index)
                                : clause_span(s, examples[i].predicate_index);
    int last = static_cast<int>(s.tokens.size());
    if (options.final_punct_exempt) {
      while (last > 1 && base_deprel(s.token(last).deprel) == "punct") --last;
    }
    const bool initial = span.first == 1;
    const bool final = span.last >= last;
    const bool gold_main = gold[i] == ClauseLabel::kMain;
    const bool wrong = gold[i] != predicted[i];
    if (initial) {
      if (gold_main) {
        ++r.initial_main;
        r.initial_main_as_sub += wrong;
      } else {
        ++r.initial_sub;
        r.initial_sub_as_main += wrong;
      }
    }
    if (final) {
      if (gold_main) {
        ++r.final_main;
        r.final_main_as_sub += wrong;
      } else {
        ++r.final_sub;
        r.final_sub_as_main += wrong;
      }
    }
  }
  return r;
}

std::optional<double> CompPositionProfile::fraction_pre() const {
  if (n_sub_clauses_with_mark == 0) return std::nullopt;
  return static_cast<double>(n_mark_before_head) / static_cast<double>(n_sub_clauses_with_mark);
}

CompPositionProfile comp_position(const Treebank& tb) {
  CompPositionProfile p;
  for (const auto& s : tb.sentences) {
    for (const auto& t : s.tokens) {
      if (label_for_deprel(t.deprel) != ClauseLabel::kSub) continue;
      const auto marks = mark_dependents(s, t.id);
      if (marks.empty()) continue;
      ++p.n_sub_clauses_with_mark;
      if (marks.front() < t.id) ++p.n_mark_before_head;
    }
  }
  return p;
}

AttentionProfile attention_profile(const EmbeddingTable& table,
                                   std::span<const ClauseExample> examples,
                                   const Treebank& sentences, HeadAggregation aggregation) {
  const auto idx = index_sentences(sentences);
  const std::size_t n_layers = table.n_layers();
  const std::size_t n_heads = table.n_heads();
  std::vector<double> sums(n_layers, 0.0);
  std::size_t count = 0;
  for (const auto& ex : examples) {
    if (ex.label != ClauseLabel::kSub) continue;
    const Sentence& s = lookup(idx, ex.sent_id);
    const auto marks = mark_dependents(s, ex.predicate_index);
    if (marks.empty()) continue;
    const EmbeddingRecord* rec = table.find(ex.sent_id);
    if (rec == nullptr || !table.has_attention()) {
      throw Error(ErrorCode::kNotFound, "no attention tensors for sentence " + ex.sent_id);
    }
    if (rec->n_tokens != s.tokens.size()) {
      throw Error(ErrorCode::kDimension, "sentence " + ex.sent_id +
                                             ": embedding record token count differs");
    }
    const std::size_t row = rec->first_subword[static_cast<std::size_t>(ex.predicate_index - 1)];
    std::vector<std::size_t> cols;
    for (int m : marks) cols.push_back(rec->first_subword[static_cast<std::size_t>(m - 1)]);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (std::size_t l = 0; l < n_layers; ++l) {
      double agg = aggregation == HeadAggregation::kMean ? 0.0 : -1.0;
      for (std::size_t h = 0; h < n_heads; ++h) {
        double mass = 0.0;
        for (std::size_t c : cols) mass += table.attention(*rec, l, h, row, c);
        if (aggregation == HeadAggregation::kMean) {
          agg += mass / static_cast<double>(n_heads);
        } else {
          agg = std::max(agg, mass);
        }
      }
      sums[l] += std::max(agg, 0.0);
    }
    ++count;
  }
  AttentionProfile p;
  for (std::size_t l = 0; l < n_layers; ++l) {
    p.layers.push_back({count == 0 ? 0.0 : sums[l] / static_cast<double>(count), count});
  }
  return p;
}

nlohmann::ordered_json to_json(const HeadDirectionProfile& profile) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [rel, c] : profile) {
    j[rel] = {{"n_total", c.n_total},
              {"n_parent_right", c.n_parent_right},
              {"fraction_parent_right", optional_number(c.fraction_parent_right())}};
  }
  return j;
}

nlohmann::ordered_json to_json(const PositionalErrorReport& r) {
  nlohmann::ordered_json j;
  j["initial_sub_as_main"] = r.initial_sub_as_main;
  j["initial_main_as_sub"] = r.initial_main_as_sub;
  j["final_main_as_sub"] = r.final_main_as_sub;
  j["final_sub_as_main"] = r.final_sub_as_main;
  j["gold"] = {{"initial_sub", r.initial_sub},
               {"initial_main", r.initial_main},
               {"final_main", r.final_main},
               {"final_sub", r.final_sub}};
  return j;
}

nlohmann::ordered_json to_json(const CompPositionProfile& p) {
  return {{"n_sub_clauses_with_mark", p.n_sub_clauses_with_mark},
          {"n_mark_before_head", p.n_mark_before_head},
          {"fraction_pre", optional_number(p.fraction_pre())}};
}

nlohmann::ordered_json to_json(const AttentionProfile& p) {
  auto j = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    j.push_back({{"layer", l},
                 {"mean_mark_mass", p.layers[l].mean_mass},
                 {"n_examples", p.layers[l].n_examples}});
  }
  return j;
}

std::string to_text(const HeadDirectionProfile& profile) {
  std::string out = "deprel      total  parent-right  fraction\n";
  char buf[128];
  for (const auto& [rel, c] : profile) {
    const auto f = c.fraction_parent_right();
    std::snprintf(buf, sizeof(buf), "%-10s %6zu  %12zu  %8s\n", rel.c_str(), c.n_total,
                  c.n_parent_right, f ? (std::to_string(*f).substr(0, 6)).c_str() : "n/a");
    out += buf;
  }
  return out;
}

}  // namespace clauseprobe
