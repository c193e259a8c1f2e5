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

#include "clauseprobe/synthlang.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <unordered_set>
#include <vector>

#include "clauseprobe/errors.hpp"
#include "clauseprobe/rng.hpp"

namespace clauseprobe {
namespace {

constexpr std::string_view kConsonants = "ptkbdgmnslrvz";
constexpr std::string_view kVowels = "aeiou";

std::string syllable(std::size_t i) {
  return {kConsonants[i / kVowels.size()], kVowels[i % kVowels.size()]};
}

constexpr std::size_t kSyllables = kConsonants.size() * kVowels.size();

// Injective spelling of the vocabulary seed; every word of a lexicon starts
// with it, so lexicons built from different seeds are disjoint.
std::string seed_code(std::uint64_t seed) {
  std::string code;
  do {
    code += syllable(seed % kSyllables);
    seed /= kSyllables;
  } while (seed > 0);
  return code;
}

struct Lexicon {
  std::vector<std::string> nouns, verbs, complementizers, adverbial_markers;
};

Lexicon build_lexicon(const SynthGrammarConfig& cfg) {
  const std::uint64_t seed = cfg.vocab_seed.value_or(cfg.rng_seed);
  Rng rng(derive_seed(seed, "lexicon"));
  const std::string prefix = seed_code(seed) + "'";
  std::unordered_set<std::string> used;
  auto fresh = [&](int min_syl, int max_syl) {
    while (true) {
      const int n = min_syl + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_syl - min_syl + 1)));
      std::string w = prefix;
      for (int i = 0; i < n; ++i) w += syllable(rng.below(kSyllables));
      if (used.insert(w).second) return w;
    }
  };
  Lexicon lex;
  for (int i = 0; i < cfg.vocab.nouns; ++i) lex.nouns.push_back(fresh(2, 3));
  for (int i = 0; i < cfg.vocab.verbs; ++i) lex.verbs.push_back(fresh(2, 3));
  for (int i = 0; i < cfg.vocab.complementizers; ++i) lex.complementizers.push_back(fresh(1, 2));
  for (int i = 0; i < cfg.vocab.adverbial_markers; ++i) lex.adverbial_markers.push_back(fresh(1, 2));
  return lex;
}

struct Node {
  std::string form;
  std::string upos;
  std::string deprel;
  int head = -1;  // node index, -1 for the root
};

class SentenceBuilder {
 public:
  SentenceBuilder(const SynthGrammarConfig& cfg, const Lexicon& lex, Rng& rng)
      : cfg_(cfg), lex_(lex), rng_(rng) {}

  Sentence build(const std::string& sent_id) {
    nodes_.clear();
    std::vector<int> order = clause(0, -1, "root");
    if (cfg_.final_punct) {
      nodes_.push_back({".", "PUNCT", "punct", root_});
      order.push_back(static_cast<int>(nodes_.size()) - 1);
    }
    std::vector<int> position(nodes_.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) position[static_cast<std::size_t>(order[i])] = static_cast<int>(i) + 1;

    Sentence s;
    s.sent_id = sent_id;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Node& n = nodes_[static_cast<std::size_t>(order[i])];
      Token t;
      t.id = static_cast<int>(i) + 1;
      t.form = n.form;
      t.lemma = n.form;
      t.upos = n.upos;
      t.xpos = "_";
      t.head = n.head < 0 ? 0 : position[static_cast<std::size_t>(n.head)];
      t.deprel = n.deprel;
      t.deps = "_";
      t.misc = "_";
      if (!s.text.empty()) s.text += ' ';
      s.text += t.form;
      s.tokens.push_back(std::move(t));
    }
    s.comments = {"# sent_id = " + s.sent_id, "# text = " + s.text};
    return s;
  }

 private:
  const std::string& pick(const std::vector<std::string>& words) {
    return words[rng_.below(words.size())];
  }

  int add(const std::string& form, const char* upos, const std::string& deprel, int head) {
    nodes_.push_back({form, upos, deprel, head});
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Linear order of the clause headed by a new verb attached to `head`.
  std::vector<int> clause(int depth, int head, const std::string& deprel) {
    const int verb = add(pick(lex_.verbs), "VERB", deprel, head);
    if (head < 0) root_ = verb;
    const int subj = add(pick(lex_.nouns), "NOUN", "nsubj", verb);
    const int obj = add(pick(lex_.nouns), "NOUN", "obj", verb);
    std::vector<int> core;
    switch (cfg_.order) {
      case WordOrder::kSVO: core = {subj, verb, obj}; break;
      case WordOrder::kSOV: core = {subj, obj, verb}; break;
      case WordOrder::kVSO: core = {verb, subj, obj}; break;
    }
    if (depth > 0) {
      const bool complement = deprel == "ccomp";
      const int mark = add(pick(complement ? lex_.complementizers : lex_.adverbial_markers),
                           "SCONJ", "mark", verb);
      if (cfg_.comp_position == CompPosition::kPre) {
        core.insert(core.begin(), mark);
      } else {
        core.push_back(mark);
      }
    }
    if (depth < cfg_.max_depth && rng_.bernoulli(cfg_.p_subordinate)) {
      const bool complement = rng_.bernoulli(0.5) || lex_.adverbial_markers.empty();
      auto embedded = clause(depth + 1, verb, complement ? "ccomp" : "advcl");
      if (cfg_.order == WordOrder::kSOV) {
        embedded.insert(embedded.end(), core.begin(), core.end());
        return embedded;
      }
      core.insert(core.end(), embedded.begin(), embedded.end());
    }
    return core;
  }

  const SynthGrammarConfig& cfg_;
  const Lexicon& lex_;
  Rng& rng_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace

std::string_view to_string(WordOrder order) {
  switch (order) {
    case WordOrder::kSVO: return "SVO";
    case WordOrder::kSOV: return "SOV";
    case WordOrder::kVSO: return "VSO";
  }
  return "?";
}

std::string_view to_string(CompPosition position) {
  return position == CompPosition::kPre ? "PRE" : "POST";
}

WordOrder parse_word_order(std::string_view text) {
  if (text == "SVO") return WordOrder::kSVO;
  if (text == "SOV") return WordOrder::kSOV;
  if (text == "VSO") return WordOrder::kVSO;
  throw Error(ErrorCode::kInvalidArgument, "unknown word order '" + std::string(text) + "'");
}

CompPosition parse_comp_position(std::string_view text) {
  if (text == "PRE") return CompPosition::kPre;
  if (text == "POST") return CompPosition::kPost;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown complementizer position '" + std::string(text) + "'");
}

CompPosition default_comp_position(WordOrder order) {
  return order == WordOrder::kSOV ? CompPosition::kPost : CompPosition::kPre;
}

void validate(const SynthGrammarConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, "synth config: " + m); };
  if (cfg.n_sentences < 1) fail("n_sentences must be positive");
  if (!(cfg.p_subordinate >= 0.0 && cfg.p_subordinate < 1.0)) fail("p_subordinate must be in [0, 1)");
  if (cfg.max_depth < 1) fail("max_depth must be positive");
  if (cfg.vocab.nouns < 1 || cfg.vocab.verbs < 1 || cfg.vocab.complementizers < 1 ||
      cfg.vocab.adverbial_markers < 1) {
    fail("vocabulary sizes must be >= 1");
  }
}

SynthGrammarConfig synth_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "synth config must be an object");
  SynthGrammarConfig c;
  bool comp_given = false;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "order") c.order = parse_word_order(v.get<std::string>());
      else if (key == "comp_position") {
        c.comp_position = parse_comp_position(v.get<std::string>());
        comp_given = true;
      } else if (key == "n_sentences") c.n_sentences = v.get<int>();
      else if (key == "p_subordinate") c.p_subordinate = v.get<double>();
      else if (key == "max_depth") c.max_depth = v.get<int>();
      else if (key == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
      else if (key == "vocab_seed") c.vocab_seed = v.get<std::uint64_t>();
      else if (key == "final_punct") c.final_punct = v.get<bool>();
      else if (key == "name") c.name = v.get<std::string>();
      else if (key == "vocab") {
        for (const auto& [vk, vv] : v.items()) {
          if (vk == "nouns") c.vocab.nouns = vv.get<int>();
          else if (vk == "verbs") c.vocab.verbs = vv.get<int>();
          else if (vk == "complementizers") c.vocab.complementizers = vv.get<int>();
          else if (vk == "adverbial_markers") c.vocab.adverbial_markers = vv.get<int>();
          else throw Error(ErrorCode::kInvalidArgument, "unknown vocab key '" + vk + "'");
        }
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown synth config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("synth config: ") + e.what());
  }
  if (!comp_given) c.comp_position = default_comp_position(c.order);
  validate(c);
  return c;
}

nlohmann::ordered_json to_json(const SynthGrammarConfig& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["order"] = std::string(to_string(c.order));
  j["comp_position"] = std::string(to_string(c.comp_position));
  j["n_sentences"] = c.n_sentences;
  j["p_subordinate"] = c.p_subordinate;
  j["max_depth"] = c.max_depth;
  j["vocab"] = {{"nouns", c.vocab.nouns},
                {"verbs", c.vocab.verbs},
                {"complementizers", c.vocab.complementizers},
                {"adverbial_markers", c.vocab.adverbial_markers}};
  j["rng_seed"] = c.rng_seed;
  j["vocab_seed"] = c.vocab_seed.value_or(c.rng_seed);
  j["final_punct"] = c.final_punct;
  return j;
}

double expected_sub_per_sentence(const SynthGrammarConfig& cfg) {
  double sum = 0.0;
  for (int k = 1; k <= cfg.max_depth; ++k) sum += std::pow(cfg.p_subordinate, k);
  return sum;
}

Treebank generate_corpus(const SynthGrammarConfig& cfg) {
  validate(cfg);
  const Lexicon lex = build_lexicon(cfg);
  Rng rng(derive_seed(cfg.rng_seed, "sentences"));
  Treebank tb;
  tb.name = cfg.name.empty() ? "synth-" + std::string(to_string(cfg.order)) + "-" +
                                   std::string(to_string(cfg.comp_position)) + "-" +
                                   std::to_string(cfg.rng_seed)
                             : cfg.name;
  tb.language_code = "x-" + std::string(to_string(cfg.order));
  SentenceBuilder builder(cfg, lex, rng);
  char id[32];
  for (int i = 0; i < cfg.n_sentences; ++i) {
    std::snprintf(id, sizeof(id), "%05d", i + 1);
    tb.sentences.push_back(builder.build(tb.name + "-" + id));
  }
  return tb;
}

}  // namespace clauseprobe
