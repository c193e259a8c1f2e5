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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& sub) {
  const fs::path dir = fs::path(CLAUSEPROBE_SCRATCH) / sub;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

RunResult run(const fs::path& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + CLAUSEPROBE_CLI + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string fixture(const std::string& name) {
  return (fs::path(CLAUSEPROBE_TEST_DATA) / "conllu" / name).string();
}

json corpus(const std::string& name, const std::string& lang, const std::string& role,
            const std::string& path) {
  return {{"name", name}, {"language_code", lang}, {"role", role}, {"path", path}};
}

// Two small generated languages plus held-out samples of each.
fs::path synth_manifest(const fs::path& dir) {
  const char* specs[][4] = {{"svo-train", "SVO", "1", "train"},
                            {"svo-test", "SVO", "3", "test"},
                            {"sov-test", "SOV", "4", "test"}};
  json m = {{"corpora", json::array()}};
  for (const auto& s : specs) {
    const json cfg = {{"order", s[1]}, {"n_sentences", 40}, {"rng_seed", std::stoi(s[2])}};
    spit(dir / (std::string(s[0]) + ".json"), cfg.dump());
    const auto r = run(dir, std::string("synth --config \"") + (dir / (std::string(s[0]) + ".json")).string() +
                                "\" --out \"" + (dir / (std::string(s[0]) + ".conllu")).string() + "\"");
    REQUIRE(r.exit_code == 0);
    m["corpora"].push_back(corpus(s[0], std::string("x-") + s[1], s[3], std::string(s[0]) + ".conllu"));
  }
  spit(dir / "manifest.json", m.dump(2));
  spit(dir / "model.json",
       R"({"train":{"optimizer":"adam","learning_rate":0.003,"train_encoder":true},)"
       R"("encoder":{"dim":8,"n_layers":1,"n_heads":2,"vocab_hash_buckets":64}})");
  return dir / "manifest.json";
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("synth output is reproducible") {
  const auto dir = scratch("synth");
  spit(dir / "cfg.json", R"({"order":"VSO","n_sentences":25,"rng_seed":9})");
  const auto a = run(dir, "synth --config " + q(dir / "cfg.json") + " --out " + q(dir / "a.conllu"));
  const auto b = run(dir, "synth --config " + q(dir / "cfg.json") + " --out " + q(dir / "b.conllu"));
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(dir / "a.conllu") == slurp(dir / "b.conllu"));
  CHECK(json::parse(a.out)["sentences"] == 25);
  const auto c = run(dir, "synth --config " + q(dir / "cfg.json") + " --seed 10 --out " + q(dir / "c.conllu"));
  REQUIRE(c.exit_code == 0);
  CHECK(slurp(dir / "a.conllu") != slurp(dir / "c.conllu"));
}

TEST_CASE("baseline counts on fixture corpora") {
  const auto dir = scratch("baseline");
  json m = {{"corpora",
             {corpus("en", "en", "test", fixture("01_simple_en.conllu")),
              corpus("zh", "zh", "test", fixture("05_zh.conllu"))}}};
  spit(dir / "m.json", m.dump());
  const auto r = run(dir, "baseline --manifest " + q(dir / "m.json") + " --out " + q(dir / "b.json"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "en: 2 MAIN, 3 SUB, baseline 0.6\nzh: 3 MAIN, 3 SUB, baseline 0.5\n");
  const auto j = json::parse(slurp(dir / "b.json"));
  CHECK(j[1]["examples"] == 6);

  spit(dir / "empty.json", R"({"corpora":[]})");
  const auto e = run(dir, "baseline --manifest " + q(dir / "empty.json") + " --out " + q(dir / "e.json"));
  REQUIRE(e.exit_code == 0);
  CHECK(e.out.empty());
  CHECK(json::parse(slurp(dir / "e.json")) == json::array());
}

TEST_CASE("manifest errors name the offending entry") {
  const auto dir = scratch("errors");
  spit(dir / "missing.json",
       json({{"corpora", {corpus("ghost", "xx", "test", "nowhere.conllu")}}}).dump());
  auto r = run(dir, "baseline --manifest " + q(dir / "missing.json"));
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("ghost") != std::string::npos);

  spit(dir / "dup.json", json({{"corpora",
                                {corpus("a", "en", "test", fixture("01_simple_en.conllu")),
                                 corpus("a", "zh", "test", fixture("05_zh.conllu"))}}})
                             .dump());
  r = run(dir, "baseline --manifest " + q(dir / "dup.json"));
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("duplicate corpus name 'a'") != std::string::npos);

  spit(dir / "role.json",
       json({{"corpora", {corpus("r", "en", "holdout", fixture("01_simple_en.conllu"))}}}).dump());
  r = run(dir, "baseline --manifest " + q(dir / "role.json"));
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("corpus r: unknown role 'holdout'") != std::string::npos);

  spit(dir / "broken.json", "{\"corpora\": [");
  CHECK(run(dir, "baseline --manifest " + q(dir / "broken.json")).exit_code == 1);
  CHECK(run(dir, "baseline --manifest " + q(dir / "absent.json")).exit_code == 1);
  CHECK(run(dir, "frobnicate").exit_code != 0);
}

TEST_CASE("build-dataset exports examples and embeddings") {
  const auto dir = scratch("dataset");
  json m = {{"corpora", {corpus("en", "en", "test", fixture("01_simple_en.conllu"))}}};
  spit(dir / "m.json", m.dump());
  const auto r = run(dir, "build-dataset --encode --manifest " + q(dir / "m.json") + " --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  const std::string jsonl = slurp(dir / "out" / "en.jsonl");
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 5);
  const auto summary = json::parse(slurp(dir / "out" / "dataset.json"));
  CHECK(summary["corpora"][0]["sub"] == 3);
  CHECK(summary["corpora"][0]["embeddings"] == "en.emb");
  CHECK(fs::file_size(dir / "out" / "en.emb") > 0);
}

TEST_CASE("training is byte-for-byte reproducible") {
  const auto dir = scratch("train");
  const auto manifest = synth_manifest(dir);
  const std::string args = "train --mode zeroshot --seed 5 --manifest " + q(manifest) +
                           " --config " + q(dir / "model.json") + " --out ";
  const auto a = run(dir, args + q(dir / "a"));
  const auto b = run(dir, args + q(dir / "b"));
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(slurp(dir / "a" / "model.ckpt") == slurp(dir / "b" / "model.ckpt"));
  CHECK(slurp(dir / "a" / "train.json") == slurp(dir / "b" / "train.json"));
  const auto report = json::parse(slurp(dir / "a" / "train.json"));
  CHECK(report["training"]["epochs"].size() == 2);
  CHECK(report["evaluations"].size() == 2);
  CHECK(a.out.find("svo-test: accuracy ") == 0);

  const auto c = run(dir, "train --mode zeroshot --seed 6 --manifest " + q(manifest) + " --config " +
                              q(dir / "model.json") + " --out " + q(dir / "c"));
  REQUIRE(c.exit_code == 0);
  CHECK(slurp(dir / "a" / "model.ckpt") != slurp(dir / "c" / "model.ckpt"));
}

TEST_CASE("zero learning rate keeps the dev history flat") {
  const auto dir = scratch("flat");
  const auto manifest = synth_manifest(dir);
  json m = json::parse(slurp(manifest));
  m["corpora"][1]["role"] = "dev";
  spit(manifest, m.dump());
  spit(dir / "lr0.json", R"({"train":{"learning_rate":0.0},"encoder":{"dim":8,"n_layers":1}})");
  const auto r = run(dir, "train --epochs 3 --manifest " + q(manifest) + " --config " + q(dir / "lr0.json") +
                              " --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  const auto report = json::parse(slurp(dir / "out" / "train.json"));
  const auto& epochs = report["training"]["epochs"];
  REQUIRE(epochs.size() == 3);
  CHECK(epochs[0]["dev_accuracy"] == epochs[1]["dev_accuracy"]);
  CHECK(epochs[1]["dev_accuracy"] == epochs[2]["dev_accuracy"]);
  CHECK(report["training"]["selected_epoch"] == 1);
  CHECK(report["dev_corpus"] == "svo-test");
}

TEST_CASE("single-language training falls back to a same-language test corpus") {
  const auto dir = scratch("fallback");
  const auto manifest = synth_manifest(dir);
  const auto r = run(dir, "train --epochs 1 --manifest " + q(manifest) + " --config " + q(dir / "model.json") +
                              " --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.find("selecting epochs on test corpus svo-test") != std::string::npos);
  CHECK(json::parse(slurp(dir / "out" / "train.json"))["dev_corpus"] == "svo-test");
}

TEST_CASE("zeroshot matrices are reproducible and checkpoints can be reused") {
  const auto dir = scratch("zeroshot");
  const auto manifest = synth_manifest(dir);
  json m = json::parse(slurp(manifest));
  m["corpora"].push_back(corpus("sov-train", "x-SOV", "train", "sov-test.conllu"));
  spit(manifest, m.dump());
  const std::string args = "zeroshot --seed 2 --manifest " + q(manifest) + " --config " +
                           q(dir / "model.json") + " --out ";
  const auto a = run(dir, args + q(dir / "a"));
  const auto b = run(dir, args + q(dir / "b"));
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(dir / "a" / "matrix.txt") == slurp(dir / "b" / "matrix.txt"));
  CHECK(slurp(dir / "a" / "matrix.json") == slurp(dir / "b" / "matrix.json"));
  CHECK(a.out == slurp(dir / "a" / "matrix.txt"));
  const auto matrix = json::parse(slurp(dir / "a" / "matrix.json"))["matrix"];
  CHECK(matrix["sources"] == json({"svo-train", "sov-train"}));
  CHECK(matrix["targets"] == json({"svo-test", "sov-test"}));

  const auto c = run(dir, "zeroshot --manifest " + q(manifest) + " --model " +
                              q(dir / "a" / "models" / "svo-train.ckpt") + " --model " +
                              q(dir / "a" / "models" / "sov-train.ckpt") + " --out " + q(dir / "c"));
  REQUIRE(c.exit_code == 0);
  CHECK(c.out == a.out);
  const auto reused = json::parse(slurp(dir / "c" / "matrix.json"));
  CHECK(reused["matrix"] == matrix);
  CHECK(reused["models"] == json({"svo-train", "sov-train"}));
}

TEST_CASE("file backend reads exported embeddings") {
  const auto dir = scratch("filebackend");
  const auto manifest = synth_manifest(dir);
  REQUIRE(run(dir, "build-dataset --encode --manifest " + q(manifest) + " --config " + q(dir / "model.json") +
                       " --out " + q(dir / "data"))
              .exit_code == 0);
  const auto r = run(dir, "zeroshot --backend file:" + q(dir / "data") + " --epochs 3 --manifest " + q(manifest) +
                              " --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  const auto j = json::parse(slurp(dir / "out" / "matrix.json"));
  CHECK(j["config"]["encoder"].is_null());
  CHECK(j["matrix"]["cells"][0][0]["failed"] == false);

  const auto missing = run(dir, "zeroshot --backend file --manifest " + q(manifest) + " --out " + q(dir / "x"));
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.find("svo-train: no embeddings given for the file backend") != std::string::npos);
}

TEST_CASE("typology and attention reports") {
  const auto dir = scratch("reports");
  const auto manifest = synth_manifest(dir);
  auto r = run(dir, "typology --manifest " + q(manifest) + " --out " + q(dir / "t.json"));
  REQUIRE(r.exit_code == 0);
  const auto t = json::parse(slurp(dir / "t.json"));
  CHECK(t[2]["comp_position"]["fraction_pre"] == 0.0);
  CHECK(r.out.find("sov-test  acl=n/a") != std::string::npos);

  REQUIRE(run(dir, "train --mode zeroshot --manifest " + q(manifest) + " --config " + q(dir / "model.json") +
                       " --out " + q(dir / "m"))
              .exit_code == 0);
  r = run(dir, "attn-report --aggregation max --manifest " + q(manifest) + " --model " + q(dir / "m" / "model.ckpt"));
  REQUIRE(r.exit_code == 0);
  const auto a = json::parse(r.out);
  CHECK(a["aggregation"] == "max");
  CHECK(a["corpora"].size() == 2);
  CHECK(a["corpora"][0]["trained"].size() == 1);
  CHECK(a["corpora"][0]["untrained"][0]["n_examples"] == a["corpora"][0]["trained"][0]["n_examples"]);
}
