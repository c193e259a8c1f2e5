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

// Shared helpers for the unit tests.

#ifndef CLAUSEPROBE_TESTS_TEST_UTIL_HPP_
#define CLAUSEPROBE_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "clauseprobe/conllu.hpp"
#include "clauseprobe/rng.hpp"

namespace clauseprobe::testing {

inline std::filesystem::path data_dir() { return CLAUSEPROBE_TEST_DATA; }

inline std::vector<std::filesystem::path> fixture_files() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(data_dir() / "conllu")) {
    if (e.path().extension() == ".conllu") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Treebank load_fixture(const std::string& file) {
  return load_conllu(data_dir() / "conllu" / file, file, "xx");
}

inline const std::vector<std::string>& random_deprels() {
  static const std::vector<std::string> kRels = {
      "nsubj", "obj", "advcl", "acl", "acl:relcl", "ccomp", "xcomp", "csubj",
      "mark",  "det", "dep",   "punct", "advcl:cond", "obl"};
  return kRels;
}

// Uniformly attached random tree: token i (in a random order) picks a head
// among the tokens already attached, so the result is acyclic and rooted.
inline Sentence random_tree(Rng& rng, int n, const std::string& sent_id) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i + 1;
  rng.shuffle(order);
  std::vector<int> head(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t k = 1; k < order.size(); ++k) {
    head[static_cast<std::size_t>(order[k])] = order[rng.below(k)];
  }
  Sentence s;
  s.sent_id = sent_id;
  for (int i = 1; i <= n; ++i) {
    Token t;
    t.id = i;
    t.form = "w" + std::to_string(rng.below(50));
    t.lemma = t.form;
    t.upos = "X";
    t.xpos = "_";
    t.head = head[static_cast<std::size_t>(i)];
    const auto& rels = random_deprels();
    t.deprel = t.head == 0 ? "root" : rels[rng.below(rels.size())];
    t.deps = "_";
    t.misc = "_";
    if (!s.text.empty()) s.text += ' ';
    s.text += t.form;
    s.tokens.push_back(std::move(t));
  }
  s.comments = {"# sent_id = " + s.sent_id, "# text = " + s.text};
  return s;
}

}  // namespace clauseprobe::testing

#endif  // CLAUSEPROBE_TESTS_TEST_UTIL_HPP_
