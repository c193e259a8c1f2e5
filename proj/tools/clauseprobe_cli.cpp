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

// Command-line front end. Talks to the library only through the C API.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "clauseprobe/clauseprobe.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(cp_status status, const std::string& context) {
  if (status != CP_OK) {
    throw CliError(context + ": " + cp_status_name(status) + ": " + cp_last_error_message());
  }
}

struct TreebankDeleter {
  void operator()(cp_treebank* p) const { cp_treebank_free(p); }
};
struct EmbeddingsDeleter {
  void operator()(cp_embeddings* p) const { cp_embeddings_free(p); }
};
struct ModelDeleter {
  void operator()(cp_model* p) const { cp_model_free(p); }
};
using TreebankPtr = std::unique_ptr<cp_treebank, TreebankDeleter>;
using EmbeddingsPtr = std::unique_ptr<cp_embeddings, EmbeddingsDeleter>;
using ModelPtr = std::unique_ptr<cp_model, ModelDeleter>;

std::string take(char* s) {
  std::string out = s == nullptr ? std::string() : std::string(s);
  cp_string_free(s);
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw CliError("cannot write " + path.string());
  spdlog::info("wrote {}", path.string());
}

// ---- Manifest ----

struct CorpusEntry {
  std::string name;
  std::string language_code;
  std::string role;
  fs::path path;
  std::optional<fs::path> embeddings;
};

std::vector<CorpusEntry> read_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw CliError("manifest " + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  if (!j.is_object() || !j.contains("corpora") || !j["corpora"].is_array()) {
    throw CliError("manifest " + path.string() + ": expected an object with a 'corpora' array");
  }
  std::vector<CorpusEntry> out;
  std::set<std::string> seen;
  for (const auto& c : j["corpora"]) {
    try {
      CorpusEntry e;
      e.name = c.at("name").get<std::string>();
      e.language_code = c.value("language_code", std::string());
      e.role = c.value("role", std::string("test"));
      if (e.role != "train" && e.role != "dev" && e.role != "test") {
        throw CliError("corpus " + e.name + ": unknown role '" + e.role + "'");
      }
      if (!seen.insert(e.name).second) throw CliError("duplicate corpus name '" + e.name + "'");
      e.path = resolve(c.at("path").get<std::string>());
      if (c.contains("embeddings") && !c["embeddings"].is_null()) {
        e.embeddings = resolve(c["embeddings"].get<std::string>());
      }
      out.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw CliError("manifest " + path.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<const CorpusEntry*> with_role(const std::vector<CorpusEntry>& corpora,
                                          const std::string& role) {
  std::vector<const CorpusEntry*> out;
  for (const auto& c : corpora) {
    if (c.role == role) out.push_back(&c);
  }
  return out;
}

TreebankPtr load_treebank(const CorpusEntry& e) {
  cp_treebank* tb = nullptr;
  check(cp_treebank_load(e.path.string().c_str(), e.name.c_str(), e.language_code.c_str(), &tb),
        e.name);
  TreebankPtr out(tb);
  spdlog::debug("{}: {} sentences", e.name, cp_treebank_sentence_count(tb));
  return out;
}

// ---- Backend and model configuration ----

struct Backend {
  bool toy = true;
  std::optional<fs::path> embedding_dir;
};

Backend parse_backend(const std::string& text) {
  Backend b;
  if (text == "toy") return b;
  b.toy = false;
  if (text == "file") return b;
  if (text.rfind("file:", 0) == 0) {
    b.embedding_dir = fs::path(text.substr(5));
    return b;
  }
  throw CliError("unknown backend '" + text + "' (expected toy, file or file:DIR)");
}

EmbeddingsPtr load_embeddings(const CorpusEntry& e, const Backend& backend,
                              const cp_treebank* tb) {
  if (backend.toy) return nullptr;
  fs::path path;
  if (e.embeddings) {
    path = *e.embeddings;
  } else if (backend.embedding_dir) {
    path = *backend.embedding_dir / (e.name + ".emb");
  } else {
    throw CliError(e.name + ": no embeddings given for the file backend");
  }
  cp_embeddings* emb = nullptr;
  check(cp_embeddings_read(path.string().c_str(), &emb), path.string());
  EmbeddingsPtr out(emb);
  check(cp_embeddings_check(emb, tb), e.name);
  return out;
}

struct CommonOptions {
  fs::path manifest;
  fs::path out;
  fs::path config;
  std::uint64_t seed = 0;
  std::string backend = "toy";
  int epochs = 0;
};

json read_config(const CommonOptions& o) {
  if (o.config.empty()) return json::object();
  try {
    json j = json::parse(read_file(o.config));
    if (!j.is_object()) throw CliError("config must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw CliError("config " + o.config.string() + ": " + e.what());
  }
}

// Applies command-line overrides to a model configuration.
json model_config(const CommonOptions& o, const Backend& backend, const std::string& preset) {
  json j = read_config(o);
  j["preset"] = preset;
  if (!j.contains("train")) j["train"] = json::object();
  j["train"]["rng_seed"] = o.seed;
  if (o.epochs > 0) j["train"]["epochs"] = o.epochs;
  if (backend.toy) {
    if (!j.contains("encoder") || j["encoder"].is_null()) j["encoder"] = json::object();
    j["encoder"]["rng_seed"] = o.seed;
  } else {
    j["encoder"] = nullptr;
  }
  return j;
}

ordered_json parse_ordered(const std::string& s) { return ordered_json::parse(s); }

// ---- Subcommands ----

void run_build_dataset(const CommonOptions& o, bool encode) {
  const auto corpora = read_manifest(o.manifest);
  if (o.out.empty()) throw CliError("--out is required");
  fs::create_directories(o.out);
  ModelPtr encoder;
  if (encode) {
    json cfg = model_config(o, Backend{}, "single_language");
    cp_model* m = nullptr;
    check(cp_model_init(cfg.dump().c_str(), 0, &m), "encoder");
    encoder.reset(m);
  }
  ordered_json summary;
  summary["seed"] = o.seed;
  summary["corpora"] = ordered_json::array();
  for (const auto& e : corpora) {
    auto tb = load_treebank(e);
    char* diag = nullptr;
    check(cp_treebank_validate_json(tb.get(), &diag), e.name);
    const ordered_json diagnostics = parse_ordered(take(diag));
    for (const auto& d : diagnostics) {
      spdlog::warn("{}: sentence {}: {}: {}", e.name, d["sent_id"].get<std::string>(),
                   d["rule"].get<std::string>(), d["message"].get<std::string>());
    }
    char* jsonl = nullptr;
    check(cp_treebank_examples_jsonl(tb.get(), &jsonl), e.name);
    write_file(o.out / (e.name + ".jsonl"), take(jsonl));
    char* sj = nullptr;
    check(cp_treebank_summary_json(tb.get(), &sj), e.name);
    ordered_json entry = parse_ordered(take(sj));
    entry["role"] = e.role;
    entry["diagnostics"] = diagnostics.size();
    if (encoder) {
      cp_embeddings* emb = nullptr;
      check(cp_model_encode(encoder.get(), tb.get(), 1, &emb), e.name);
      EmbeddingsPtr holder(emb);
      const fs::path path = o.out / (e.name + ".emb");
      check(cp_embeddings_write(emb, path.string().c_str()), path.string());
      entry["embeddings"] = e.name + ".emb";
    }
    summary["corpora"].push_back(std::move(entry));
  }
  write_file(o.out / "dataset.json", summary.dump(2) + "\n");
}

void run_train(const CommonOptions& o, const std::string& mode) {
  if (mode != "single" && mode != "zeroshot") throw CliError("--mode must be single or zeroshot");
  const auto corpora = read_manifest(o.manifest);
  if (o.out.empty()) throw CliError("--out is required");
  const Backend backend = parse_backend(o.backend);
  const auto train_entries = with_role(corpora, "train");
  if (train_entries.size() != 1) {
    throw CliError("train expects exactly one corpus with role 'train', found " +
                   std::to_string(train_entries.size()));
  }
  const auto dev_entries = with_role(corpora, "dev");
  if (dev_entries.size() > 1) throw CliError("at most one corpus with role 'dev' is allowed");

  const json cfg = model_config(o, backend, mode == "single" ? "single_language" : "zero_shot");
  auto train_tb = load_treebank(*train_entries[0]);
  auto train_emb = load_embeddings(*train_entries[0], backend, train_tb.get());
  const CorpusEntry* dev_entry = dev_entries.empty() ? nullptr : dev_entries[0];
  const bool selecting = cfg["train"].value("select_best_on_validation", mode == "single");
  if (dev_entry == nullptr && selecting) {
    for (const auto* t : with_role(corpora, "test")) {
      if (!t->language_code.empty() && t->language_code == train_entries[0]->language_code) {
        dev_entry = t;
        spdlog::warn("no dev corpus; selecting epochs on test corpus {}", t->name);
        break;
      }
    }
  }
  TreebankPtr dev_tb;
  EmbeddingsPtr dev_emb;
  if (dev_entry != nullptr) {
    dev_tb = load_treebank(*dev_entry);
    dev_emb = load_embeddings(*dev_entry, backend, dev_tb.get());
  }
  spdlog::info("training on {}", train_entries[0]->name);
  cp_model* m = nullptr;
  char* history = nullptr;
  check(cp_model_train(cfg.dump().c_str(), train_tb.get(), train_emb.get(), dev_tb.get(),
                       dev_emb.get(), &m, &history),
        "train");
  ModelPtr model(m);
  fs::create_directories(o.out);
  const fs::path ckpt = o.out / "model.ckpt";
  check(cp_model_save(model.get(), ckpt.string().c_str()), ckpt.string());
  spdlog::info("wrote {}", ckpt.string());

  char* info = nullptr;
  check(cp_model_info_json(model.get(), &info), "model");
  ordered_json report;
  report["seed"] = o.seed;
  report["mode"] = mode;
  report["train_corpus"] = train_entries[0]->name;
  report["dev_corpus"] = dev_entry == nullptr ? ordered_json(nullptr) : ordered_json(dev_entry->name);
  report["model"] = parse_ordered(take(info));
  report["training"] = parse_ordered(take(history));
  report["evaluations"] = ordered_json::array();
  for (const auto* e : with_role(corpora, "test")) {
    auto tb = load_treebank(*e);
    auto emb = load_embeddings(*e, backend, tb.get());
    char* ev = nullptr;
    check(cp_model_evaluate_json(model.get(), tb.get(), emb.get(), &ev), e->name);
    ordered_json r = parse_ordered(take(ev));
    const auto& rep = r["report"];
    std::cout << e->name << ": accuracy " << rep["accuracy"].get<double>() << " (baseline "
              << rep["baseline_accuracy"].get<double>() << ")\n";
    report["evaluations"].push_back(std::move(r));
  }
  write_file(o.out / "train.json", report.dump(2) + "\n");
}

void run_zeroshot(const CommonOptions& o, const std::vector<fs::path>& checkpoints) {
  const auto corpora = read_manifest(o.manifest);
  if (o.out.empty()) throw CliError("--out is required");
  const Backend backend = parse_backend(o.backend);
  const auto targets = with_role(corpora, "test");
  if (targets.empty()) throw CliError("zeroshot needs at least one corpus with role 'test'");
  const json cfg = model_config(o, backend, "zero_shot");

  std::vector<ModelPtr> models;
  std::vector<std::string> names;
  ordered_json histories = ordered_json::object();
  if (!checkpoints.empty()) {
    for (const auto& path : checkpoints) {
      const std::string name = path.stem().string();
      if (std::find(names.begin(), names.end(), name) != names.end()) {
        throw CliError("duplicate model name '" + name + "'");
      }
      cp_model* m = nullptr;
      check(cp_model_load(path.string().c_str(), &m), path.string());
      models.emplace_back(m);
      names.push_back(name);
    }
  } else {
    const auto sources = with_role(corpora, "train");
    if (sources.empty()) {
      throw CliError("zeroshot needs --model checkpoints or at least one corpus with role 'train'");
    }
    fs::create_directories(o.out / "models");
    for (const auto* s : sources) {
      auto tb = load_treebank(*s);
      auto emb = load_embeddings(*s, backend, tb.get());
      spdlog::info("training on {}", s->name);
      cp_model* m = nullptr;
      char* history = nullptr;
      check(cp_model_train(cfg.dump().c_str(), tb.get(), emb.get(), nullptr, nullptr, &m, &history),
            s->name);
      models.emplace_back(m);
      names.push_back(s->name);
      histories[s->name] = parse_ordered(take(history));
      const fs::path ckpt = o.out / "models" / (s->name + ".ckpt");
      check(cp_model_save(m, ckpt.string().c_str()), ckpt.string());
    }
  }

  std::vector<TreebankPtr> tbs;
  std::vector<EmbeddingsPtr> embs;
  for (const auto* t : targets) {
    tbs.push_back(load_treebank(*t));
    // Vector loading failures become failed cells rather than aborting.
    try {
      embs.push_back(load_embeddings(*t, backend, tbs.back().get()));
    } catch (const CliError& err) {
      spdlog::warn("{}", err.what());
      embs.emplace_back();
    }
  }
  std::vector<const cp_model*> mp;
  std::vector<const char*> np;
  for (std::size_t i = 0; i < models.size(); ++i) {
    mp.push_back(models[i].get());
    np.push_back(names[i].c_str());
  }
  std::vector<const cp_treebank*> tp;
  std::vector<const cp_embeddings*> ep;
  for (std::size_t i = 0; i < tbs.size(); ++i) {
    tp.push_back(tbs[i].get());
    ep.push_back(embs[i].get());
  }
  char* mj = nullptr;
  char* mt = nullptr;
  check(cp_transfer_matrix(mp.data(), np.data(), mp.size(), tp.data(), ep.data(), tp.size(), &mj,
                           &mt),
        "transfer matrix");
  ordered_json report;
  report["seed"] = o.seed;
  if (checkpoints.empty()) {
    report["config"] = parse_ordered(cfg.dump());
    report["training"] = std::move(histories);
  } else {
    report["models"] = names;
  }
  report["matrix"] = parse_ordered(take(mj));
  const std::string text = take(mt);
  write_file(o.out / "matrix.json", report.dump(2) + "\n");
  write_file(o.out / "matrix.txt", text);
  std::cout << text;
}

void run_typology(const CommonOptions& o) {
  const auto corpora = read_manifest(o.manifest);
  ordered_json out = ordered_json::array();
  for (const auto& e : corpora) {
    auto tb = load_treebank(e);
    char* tj = nullptr;
    check(cp_typology_json(tb.get(), &tj), e.name);
    ordered_json j = parse_ordered(take(tj));
    std::cout << e.name;
    for (const auto& [rel, counts] : j["head_direction"].items()) {
      std::cout << "  " << rel << "=";
      if (counts["fraction_parent_right"].is_null()) {
        std::cout << "n/a";
      } else {
        std::cout << counts["fraction_parent_right"].get<double>();
      }
    }
    std::cout << "\n";
    out.push_back(std::move(j));
  }
  if (!o.out.empty()) write_file(o.out, out.dump(2) + "\n");
}

void run_attn_report(const CommonOptions& o, const fs::path& model_path,
                     const std::string& aggregation) {
  const auto corpora = read_manifest(o.manifest);
  std::optional<ModelPtr> trained;
  std::optional<ModelPtr> untrained;
  if (!model_path.empty()) {
    cp_model* m = nullptr;
    check(cp_model_load(model_path.string().c_str(), &m), model_path.string());
    trained.emplace(m);
    char* info = nullptr;
    check(cp_model_info_json(m, &info), "model");
    const json mi = json::parse(take(info));
    if (mi["backend"] != "toy") throw CliError("attn-report needs a toy-backend model");
    json cfg = {{"encoder", mi["encoder"]}};
    cp_model* u = nullptr;
    check(cp_model_init(cfg.dump().c_str(), 0, &u), "untrained encoder");
    untrained.emplace(u);
  }
  ordered_json out;
  out["aggregation"] = aggregation;
  out["model"] = model_path.empty() ? ordered_json(nullptr) : ordered_json(model_path.filename().string());
  out["corpora"] = ordered_json::array();
  auto profile = [&](const cp_embeddings* emb, const cp_treebank* tb, const std::string& name) {
    char* pj = nullptr;
    check(cp_attention_profile_json(emb, tb, aggregation.c_str(), &pj), name);
    return parse_ordered(take(pj));
  };
  for (const auto* e : with_role(corpora, "test")) {
    auto tb = load_treebank(*e);
    ordered_json entry;
    entry["name"] = e->name;
    if (trained) {
      for (auto* which : {&*trained, &*untrained}) {
        cp_embeddings* emb = nullptr;
        check(cp_model_encode(which->get(), tb.get(), 1, &emb), e->name);
        EmbeddingsPtr holder(emb);
        entry[which == &*trained ? "trained" : "untrained"] = profile(emb, tb.get(), e->name);
      }
    } else {
      auto emb = load_embeddings(*e, parse_backend(o.backend == "toy" ? "file" : o.backend),
                                 tb.get());
      entry["profile"] = profile(emb.get(), tb.get(), e->name);
    }
    out["corpora"].push_back(std::move(entry));
  }
  const std::string text = out.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(o.out, text);
  }
}

void run_synth(const CommonOptions& o, bool seed_given) {
  if (o.config.empty()) throw CliError("--config is required");
  if (o.out.empty()) throw CliError("--out is required");
  json cfg = read_config(o);
  if (seed_given) cfg["rng_seed"] = o.seed;
  cp_treebank* tb = nullptr;
  check(cp_synth_generate(cfg.dump().c_str(), &tb), "synth");
  TreebankPtr holder(tb);
  check(cp_treebank_save(tb, o.out.string().c_str()), o.out.string());
  char* sj = nullptr;
  check(cp_treebank_summary_json(tb, &sj), "synth");
  std::cout << take(sj) << "\n";
}

void run_baseline(const CommonOptions& o) {
  const auto corpora = read_manifest(o.manifest);
  ordered_json out = ordered_json::array();
  for (const auto& e : corpora) {
    auto tb = load_treebank(e);
    char* sj = nullptr;
    check(cp_treebank_summary_json(tb.get(), &sj), e.name);
    ordered_json j = parse_ordered(take(sj));
    std::cout << e.name << ": " << j["main"] << " MAIN, " << j["sub"] << " SUB, baseline "
              << j["majority_baseline"] << "\n";
    out.push_back(std::move(j));
  }
  if (!o.out.empty()) write_file(o.out, out.dump(2) + "\n");
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("clauseprobe");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CLAUSEPROBE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honor recognized ones.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Main/subordinate clause probing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cp_version()));

  CommonOptions o;
  std::string mode = "single";
  fs::path model_path;
  std::string aggregation = "mean";
  bool encode = false;

  auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("--manifest", o.manifest, "Corpus manifest (JSON)")->required();
  };
  auto add_model_options = [&](CLI::App* sub) {
    sub->add_option("--backend", o.backend, "toy, file or file:DIR");
    sub->add_option("--epochs", o.epochs, "Override the number of epochs")->check(CLI::PositiveNumber);
    sub->add_option("--config", o.config, "Model configuration (JSON)");
  };

  auto* build = app.add_subcommand("build-dataset", "Validate corpora and export labeled examples");
  add_manifest(build);
  build->add_option("--out", o.out, "Output directory")->required();
  build->add_flag("--encode", encode, "Also write toy-encoder embedding files");
  build->add_option("--config", o.config, "Model configuration used with --encode");

  auto* train = app.add_subcommand("train", "Train a probe and evaluate it on test corpora");
  add_manifest(train);
  add_model_options(train);
  train->add_option("--mode", mode, "single or zeroshot");
  train->add_option("--out", o.out, "Output directory")->required();

  std::vector<fs::path> checkpoints;
  auto* zeroshot = app.add_subcommand(
      "zeroshot", "Evaluate checkpoints (or train one per source corpus) on every test corpus");
  add_manifest(zeroshot);
  add_model_options(zeroshot);
  zeroshot->add_option("--model", checkpoints, "Checkpoint; repeatable. Named by file stem")
      ->check(CLI::ExistingFile);
  zeroshot->add_option("--out", o.out, "Output directory")->required();

  auto* typology = app.add_subcommand("typology", "Head-direction and complementizer statistics");
  add_manifest(typology);
  typology->add_option("--out", o.out, "Output JSON file");

  auto* attn = app.add_subcommand("attn-report", "Attention from predicates to their markers");
  add_manifest(attn);
  attn->add_option("--model", model_path, "Toy-backend checkpoint; compared with its initialization");
  attn->add_option("--backend", o.backend, "file or file:DIR when no model is given");
  attn->add_option("--aggregation", aggregation, "mean or max over heads")
      ->check(CLI::IsMember({"mean", "max"}));
  attn->add_option("--out", o.out, "Output JSON file");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic treebank");
  synth->add_option("--config", o.config, "Grammar configuration (JSON)")->required();
  synth->add_option("--out", o.out, "Output CoNLL-U file")->required();

  auto* baseline = app.add_subcommand("baseline", "Majority-class baselines");
  add_manifest(baseline);
  baseline->add_option("--out", o.out, "Output JSON file");

  CLI::Option* seed_opt = nullptr;
  for (auto* sub : {build, train, zeroshot, typology, attn, synth, baseline}) {
    auto* opt = sub->add_option("--seed", o.seed, "Random seed");
    if (sub == synth) seed_opt = opt;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*build) run_build_dataset(o, encode);
    else if (*train) run_train(o, mode);
    else if (*zeroshot) run_zeroshot(o, checkpoints);
    else if (*typology) run_typology(o);
    else if (*attn) run_attn_report(o, model_path, aggregation);
    else if (*synth) run_synth(o, seed_opt->count() > 0);
    else if (*baseline) run_baseline(o);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
