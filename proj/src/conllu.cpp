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

#include "clauseprobe/conllu.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "clauseprobe/errors.hpp"

namespace clauseprobe {
namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_uint(std::string_view s, int* out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  const auto res = std::from_chars(s.data(), s.data() + s.size(), *out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool is_range_id(std::string_view id) {
  const auto dash = id.find('-');
  int a = 0, b = 0;
  return dash != std::string_view::npos && parse_uint(id.substr(0, dash), &a) &&
         parse_uint(id.substr(dash + 1), &b);
}

bool is_empty_node_id(std::string_view id) {
  const auto dot = id.find('.');
  int a = 0, b = 0;
  return dot != std::string_view::npos && parse_uint(id.substr(0, dot), &a) &&
         parse_uint(id.substr(dot + 1), &b);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Value of a "# key = value" comment, if the line is one.
bool comment_value(std::string_view line, std::string_view key, std::string* out) {
  std::string_view body = line.substr(1);
  body = trim(body);
  if (body.substr(0, key.size()) != key) return false;
  body.remove_prefix(key.size());
  body = trim(body);
  if (body.empty() || body.front() != '=') return false;
  body.remove_prefix(1);
  // Only the single space after '=' is part of the syntax.
  if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
  *out = std::string(body);
  return true;
}

std::string_view base_label(std::string_view deprel) {
  return deprel.substr(0, deprel.find(':'));
}

bool has_space_after_no(std::string_view misc) {
  for (auto item : split(misc, '|')) {
    if (item == "SpaceAfter=No") return true;
  }
  return false;
}

std::string format_feats(const Token& token) {
  if (token.feats.empty()) return "_";
  std::string out;
  for (std::size_t i = 0; i < token.feats.size(); ++i) {
    if (i) out += '|';
    out += token.feats[i].first;
    out += '=';
    out += token.feats[i].second;
  }
  return out;
}

struct PendingSentence {
  Sentence sentence;
  std::vector<std::size_t> token_lines;  // source line per token
  std::size_t first_line = 0;
  bool has_sent_id = false;
  bool has_text = false;
};

class Parser {
 public:
  Parser(std::string name, std::string language_code,
         std::vector<Diagnostic>* skipped)
      : skipped_(skipped) {
    tb_.name = std::move(name);
    tb_.language_code = std::move(language_code);
  }

  Treebank run(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++line_no;
      consume(line, line_no);
      start = end + 1;
    }
    flush();
    return std::move(tb_);
  }

 private:
  std::string label() const {
    if (pending_.has_sent_id) return pending_.sentence.sent_id;
    return "#" + std::to_string(ordinal_ + 1);
  }

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ParseError(label(), line, msg);
  }

  void consume(std::string_view line, std::size_t line_no) {
    if (line.empty()) {
      flush();
      return;
    }
    if (!open_) {
      open_ = true;
      pending_ = PendingSentence{};
      pending_.first_line = line_no;
    }
    Sentence& s = pending_.sentence;
    if (line.front() == '#') {
      if (!s.tokens.empty() || !s.opaque.empty()) {
        fail(line_no, "comment line after token lines");
      }
      std::string value;
      if (comment_value(line, "sent_id", &value)) {
        s.sent_id = value;
        pending_.has_sent_id = true;
      } else if (comment_value(line, "text", &value)) {
        s.text = value;
        pending_.has_text = true;
      }
      s.comments.emplace_back(line);
      return;
    }
    const auto cols = split(line, '\t');
    if (cols.size() != 10) {
      fail(line_no, "malformed column count (got " + std::to_string(cols.size()) +
                        ", expected 10)");
    }
    const std::string_view id = cols[0];
    if (is_range_id(id) || is_empty_node_id(id)) {
      s.opaque.push_back({s.tokens.size(), std::string(line)});
      return;
    }
    Token tok;
    if (!parse_uint(id, &tok.id) || tok.id < 1) {
      fail(line_no, "non-numeric id '" + std::string(id) + "'");
    }
    const int expected = static_cast<int>(s.tokens.size()) + 1;
    if (tok.id < expected) fail(line_no, "duplicate id " + std::string(id));
    if (tok.id != expected) {
      fail(line_no, "non-sequential id " + std::string(id) + " (expected " +
                        std::to_string(expected) + ")");
    }
    tok.form = cols[1];
    if (tok.form.empty()) fail(line_no, "empty form");
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.xpos = cols[4];
    if (cols[5] != "_") {
      for (auto item : split(cols[5], '|')) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
          fail(line_no, "malformed FEATS item '" + std::string(item) + "'");
        }
        tok.feats.emplace_back(std::string(item.substr(0, eq)),
                               std::string(item.substr(eq + 1)));
      }
    }
    if (!parse_uint(cols[6], &tok.head)) {
      fail(line_no, "non-numeric head '" + std::string(cols[6]) + "'");
    }
    tok.deprel = cols[7];
    tok.deps = cols[8];
    tok.misc = cols[9];
    s.tokens.push_back(std::move(tok));
    pending_.token_lines.push_back(line_no);
  }

  void flush() {
    if (!open_) return;
    open_ = false;
    Sentence& s = pending_.sentence;
    if (s.tokens.empty()) {
      if (!s.opaque.empty()) fail(pending_.first_line, "sentence has no tokens");
      return;  // stray comment block
    }
    if (!pending_.has_sent_id) {
      s.sent_id = tb_.name + "-" + std::to_string(ordinal_ + 1);
    }
    if (!pending_.has_text) s.text = reconstruct_text(s);

    auto diags = validate_sentence(s);
    if (!seen_ids_.insert(s.sent_id).second) {
      diags.push_back({s.sent_id, 0, "duplicate sent_id",
                       "sent_id '" + s.sent_id + "' already used in treebank"});
    }
    ++ordinal_;
    if (!diags.empty()) {
      if (skipped_ != nullptr) {
        skipped_->insert(skipped_->end(), diags.begin(), diags.end());
        return;
      }
      const Diagnostic& d = diags.front();
      const std::size_t line =
          d.token_id > 0 ? pending_.token_lines[static_cast<std::size_t>(d.token_id - 1)]
                         : pending_.first_line;
      throw ParseError(s.sent_id, line, d.rule + ": " + d.message);
    }
    tb_.sentences.push_back(std::move(s));
  }

  Treebank tb_;
  std::vector<Diagnostic>* skipped_;
  PendingSentence pending_;
  bool open_ = false;
  std::size_t ordinal_ = 0;
  std::unordered_set<std::string> seen_ids_;
};

}  // namespace

Treebank parse_conllu(std::string_view text, std::string name,
                      std::string language_code,
                      std::vector<Diagnostic>* skipped) {
  return Parser(std::move(name), std::move(language_code), skipped).run(text);
}

Treebank load_conllu(const std::filesystem::path& path, std::string name,
                     std::string language_code,
                     std::vector<Diagnostic>* skipped) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_conllu(buf.str(), std::move(name), std::move(language_code), skipped);
}

std::string serialize(const Sentence& sentence) {
  std::string out;
  for (const auto& c : sentence.comments) {
    out += c;
    out += '\n';
  }
  std::size_t next_opaque = 0;
  auto emit_opaque = [&](std::size_t position) {
    while (next_opaque < sentence.opaque.size() &&
           sentence.opaque[next_opaque].position <= position) {
      out += sentence.opaque[next_opaque].text;
      out += '\n';
      ++next_opaque;
    }
  };
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    emit_opaque(i);
    const Token& t = sentence.tokens[i];
    out += std::to_string(t.id);
    out += '\t';
    out += t.form;
    out += '\t';
    out += t.lemma;
    out += '\t';
    out += t.upos;
    out += '\t';
    out += t.xpos;
    out += '\t';
    out += format_feats(t);
    out += '\t';
    out += std::to_string(t.head);
    out += '\t';
    out += t.deprel;
    out += '\t';
    out += t.deps;
    out += '\t';
    out += t.misc;
    out += '\n';
  }
  emit_opaque(sentence.tokens.size());
  out += '\n';
  return out;
}

std::string serialize(const Treebank& treebank) {
  std::string out;
  for (const auto& s : treebank.sentences) out += serialize(s);
  return out;
}

std::vector<Diagnostic> validate_sentence(const Sentence& s) {
  std::vector<Diagnostic> diags;
  auto add = [&](int token_id, std::string rule, std::string msg) {
    diags.push_back({s.sent_id, token_id, std::move(rule), std::move(msg)});
  };
  const int n = static_cast<int>(s.tokens.size());
  if (n == 0) {
    add(0, "empty sentence", "sentence has no tokens");
    return diags;
  }
  bool heads_ok = true;
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[static_cast<std::size_t>(i)];
    const std::string tid = std::to_string(t.id);
    if (t.id != i + 1) {
      add(t.id, "id sequence", "token " + tid + " at position " + std::to_string(i + 1));
    }
    if (t.form.empty()) add(t.id, "empty form", "token " + tid + " has an empty form");
    if (t.head < 0 || t.head > n) {
      add(t.id, "head out of range", "token " + tid + " has head " +
                                          std::to_string(t.head) + " (sentence length " +
                                          std::to_string(n) + ")");
      heads_ok = false;
    } else if (t.head == t.id) {
      add(t.id, "self-loop", "token " + tid + " is its own head");
      heads_ok = false;
    }
    if (t.head == 0) {
      roots.push_back(t.id);
      if (base_label(t.deprel) != "root") {
        add(t.id, "root deprel", "token " + tid + " attached to root with deprel '" +
                                     t.deprel + "'");
      }
    } else if (base_label(t.deprel) == "root") {
      add(t.id, "root deprel", "token " + tid + " labeled root but has head " +
                                   std::to_string(t.head));
    }
  }
  if (roots.empty()) add(0, "no root", "no token has head 0");
  if (roots.size() > 1) {
    std::string ids;
    for (int r : roots) ids += (ids.empty() ? "" : ",") + std::to_string(r);
    add(roots[1], "multiple roots", "tokens " + ids + " all have head 0");
  }
  if (heads_ok) {
    for (int i = 0; i < n; ++i) {
      int cur = i + 1;
      int steps = 0;
      while (cur != 0 && steps <= n) {
        cur = s.tokens[static_cast<std::size_t>(cur - 1)].head;
        ++steps;
      }
      if (cur != 0) {
        add(i + 1, "cycle", "head chain from token " + std::to_string(i + 1) +
                                " never reaches the root");
        break;
      }
    }
  }
  return diags;
}

std::vector<Diagnostic> validate_treebank(const Treebank& tb) {
  std::vector<Diagnostic> diags;
  if (tb.name.empty() || tb.language_code.empty()) {
    diags.push_back({"", 0, "treebank metadata", "treebank name and language code are required"});
  }
  std::unordered_set<std::string> seen;
  for (const auto& s : tb.sentences) {
    auto d = validate_sentence(s);
    diags.insert(diags.end(), d.begin(), d.end());
    if (!seen.insert(s.sent_id).second) {
      diags.push_back({s.sent_id, 0, "duplicate sent_id",
                       "sent_id '" + s.sent_id + "' already used in treebank"});
    }
  }
  return diags;
}

std::string reconstruct_text(const Sentence& s) {
  // Range lines give the surface form of their span.
  std::unordered_map<std::size_t, std::pair<int, std::vector<std::string_view>>> ranges;
  for (const auto& o : s.opaque) {
    const auto cols = split(o.text, '\t');
    const auto dash = cols[0].find('-');
    if (dash == std::string_view::npos || cols.size() < 10) continue;
    int a = 0, b = 0;
    parse_uint(cols[0].substr(0, dash), &a);
    parse_uint(cols[0].substr(dash + 1), &b);
    ranges[static_cast<std::size_t>(a)] = {b, cols};
  }
  std::string out;
  const std::size_t n = s.tokens.size();
  for (std::size_t i = 0; i < n;) {
    std::string_view form = s.tokens[i].form;
    std::string_view misc = s.tokens[i].misc;
    std::size_t next = i + 1;
    if (auto it = ranges.find(i + 1); it != ranges.end()) {
      form = it->second.second[1];
      misc = it->second.second[9];
      next = std::max(i + 1, static_cast<std::size_t>(it->second.first));
    }
    out += form;
    if (next < n && !has_space_after_no(misc)) out += ' ';
    i = next;
  }
  return out;
}

}  // namespace clauseprobe
