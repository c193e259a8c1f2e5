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

#include "clauseprobe/clauseprobe.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "clauseprobe/conllu.hpp"
#include "clauseprobe/encoder.hpp"
#include "clauseprobe/errors.hpp"
#include "clauseprobe/eval.hpp"
#include "clauseprobe/pipeline.hpp"
#include "clauseprobe/probe.hpp"
#include "clauseprobe/synthlang.hpp"
#include "clauseprobe/taskdata.hpp"
#include "clauseprobe/typology.hpp"
#include "json.hpp"

namespace cpx = clauseprobe;
using nlohmann::json;
using nlohmann::ordered_json;

struct cp_treebank {
  cpx::Treebank tb;
};

struct cp_embeddings {
  cpx::EmbeddingTable table;
};

struct cp_model {
  cpx::ProbeModel model;
};

namespace {

thread_local std::string g_last_error;

cp_status to_status(cpx::ErrorCode code) {
  switch (code) {
    case cpx::ErrorCode::kInvalidArgument: return CP_ERR_INVALID_ARGUMENT;
    case cpx::ErrorCode::kParse: return CP_ERR_PARSE;
    case cpx::ErrorCode::kIo: return CP_ERR_IO;
    case cpx::ErrorCode::kFormat: return CP_ERR_FORMAT;
    case cpx::ErrorCode::kDimension: return CP_ERR_DIMENSION;
    case cpx::ErrorCode::kNumeric: return CP_ERR_NUMERIC;
    case cpx::ErrorCode::kNotFound: return CP_ERR_NOT_FOUND;
  }
  return CP_ERR_INTERNAL;
}

template <typename F>
cp_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CP_OK;
  } catch (const cpx::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return CP_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CP_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw cpx::Error(cpx::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void emit(char** out, const std::string& s) {
  require(out != nullptr, "output pointer");
  *out = dup_string(s);
}

std::string opt_str(const char* s) { return s == nullptr ? std::string() : std::string(s); }

struct ModelSettings {
  cpx::TrainConfig train;
  std::optional<cpx::ToyEncoderConfig> toy;
};

ModelSettings parse_model_settings(const char* config_json) {
  json j = config_json == nullptr || *config_json == '\0' ? json::object() : json::parse(config_json);
  if (!j.is_object()) throw cpx::Error(cpx::ErrorCode::kInvalidArgument, "model config must be an object");
  ModelSettings settings;
  settings.train = cpx::TrainConfig::single_language();
  if (auto it = j.find("preset"); it != j.end()) {
    const auto preset = it->get<std::string>();
    if (preset == "zero_shot") {
      settings.train = cpx::TrainConfig::zero_shot();
    } else if (preset != "single_language") {
      throw cpx::Error(cpx::ErrorCode::kInvalidArgument, "unknown preset '" + preset + "'");
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") continue;
    if (key == "train") {
      settings.train = cpx::train_config_from_json(value, settings.train);
    } else if (key == "encoder") {
      if (!value.is_null()) settings.toy = cpx::toy_config_from_json(value, cpx::ToyEncoderConfig{});
    } else {
      throw cpx::Error(cpx::ErrorCode::kInvalidArgument, "unknown model config key '" + key + "'");
    }
  }
  cpx::validate(settings.train);
  return settings;
}

cpx::LabeledTreebank labeled(const cp_treebank* tb, const cp_embeddings* emb) {
  cpx::LabeledTreebank lt;
  lt.treebank = tb->tb;
  if (emb != nullptr) lt.table = emb->table;
  return lt;
}

}  // namespace

extern "C" {

const char* cp_version(void) { return "1.0.0"; }

const char* cp_status_name(cp_status status) {
  switch (status) {
    case CP_OK: return "ok";
    case CP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CP_ERR_PARSE: return "parse error";
    case CP_ERR_IO: return "i/o error";
    case CP_ERR_FORMAT: return "format error";
    case CP_ERR_DIMENSION: return "dimension mismatch";
    case CP_ERR_NUMERIC: return "numeric error";
    case CP_ERR_NOT_FOUND: return "not found";
    case CP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cp_last_error_message(void) { return g_last_error.c_str(); }

void cp_string_free(char* s) { std::free(s); }

cp_status cp_treebank_parse(const char* text, size_t length, const char* name,
                            const char* language_code, cp_treebank** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer");
    require(text != nullptr || length == 0, "text");
    auto tb = cpx::parse_conllu(std::string_view(text == nullptr ? "" : text, length),
                                opt_str(name), opt_str(language_code));
    *out = new cp_treebank{std::move(tb)};
  });
}

cp_status cp_treebank_load(const char* path, const char* name, const char* language_code,
                           cp_treebank** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer");
    require(path != nullptr, "path");
    *out = new cp_treebank{cpx::load_conllu(path, opt_str(name), opt_str(language_code))};
  });
}

void cp_treebank_free(cp_treebank* tb) { delete tb; }

size_t cp_treebank_sentence_count(const cp_treebank* tb) {
  return tb == nullptr ? 0 : tb->tb.sentences.size();
}

cp_status cp_treebank_serialize(const cp_treebank* tb, char** out) {
  return guarded([&] {
    require(tb != nullptr, "treebank");
    emit(out, cpx::serialize(tb->tb));
  });
}

cp_status cp_treebank_save(const cp_treebank* tb, const char* path) {
  return guarded([&] {
    require(tb != nullptr, "treebank");
    require(path != nullptr, "path");
    FILE* f = std::fopen(path, "wb");
    if (f == nullptr) throw cpx::Error(cpx::ErrorCode::kIo, std::string("cannot write ") + path);
    const std::string text = cpx::serialize(tb->tb);
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok) {
      throw cpx::Error(cpx::ErrorCode::kIo, std::string("write failed: ") + path);
    }
  });
}

cp_status cp_treebank_validate_json(const cp_treebank* tb, char** out) {
  return guarded([&] {
    require(tb != nullptr, "treebank");
    ordered_json arr = ordered_json::array();
    for (const auto& d : cpx::validate_treebank(tb->tb)) {
      arr.push_back({{"sent_id", d.sent_id},
                     {"token_id", d.token_id},
                     {"rule", d.rule},
                     {"message", d.message}});
    }
    emit(out, arr.dump(2));
  });
}

cp_status cp_treebank_examples_jsonl(const cp_treebank* tb, char** out) {
  return guarded([&] {
    require(tb != nullptr, "treebank");
    emit(out, cpx::to_jsonl(cpx::extract_examples(tb->tb)));
  });
}

cp_status cp_treebank_summary_json(const cp_treebank* tb, char** out) {
  return guarded([&] {
    require(tb != nullptr, "treebank");
    const auto examples = cpx::extract_examples(tb->tb);
    const auto counts = cpx::gold_counts(examples);
    ordered_json j;
    j["name"] = tb->tb.name;
    j["language_code"] = tb->tb.language_code;
    j["sentences"] = tb->tb.sentences.size();
    j["examples"] = examples.size();
    j["main"] = counts.n_main;
    j["sub"] = counts.n_sub;
    if (examples.empty()) {
      j["majority_baseline"] = nullptr;
    } else {
      j["majority_baseline"] = cpx::majority_baseline(cpx::labels_of(examples));
    }
    emit(out, j.dump(2));
  });
}

cp_status cp_synth_generate(const char* config_json, cp_treebank** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer");
    require(config_json != nullptr, "config");
    const auto cfg = cpx::synth_config_from_json(json::parse(config_json));
    *out = new cp_treebank{cpx::generate_corpus(cfg)};
  });
}

cp_status cp_typology_json(const cp_treebank* tb, char** out) {
  return guarded([&] {
    require(tb != nullptr, "treebank");
    ordered_json j;
    j["treebank"] = tb->tb.name;
    j["head_direction"] =
        cpx::to_json(cpx::head_direction(tb->tb, cpx::default_head_direction_relations()));
    j["comp_position"] = cpx::to_json(cpx::comp_position(tb->tb));
    emit(out, j.dump(2));
  });
}

cp_status cp_embeddings_read(const char* path, cp_embeddings** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer");
    require(path != nullptr, "path");
    *out = new cp_embeddings{cpx::read_embedding_file(path)};
  });
}

cp_status cp_embeddings_write(const cp_embeddings* emb, const char* path) {
  return guarded([&] {
    require(emb != nullptr, "embeddings");
    require(path != nullptr, "path");
    cpx::write_embedding_file(emb->table, path);
  });
}

void cp_embeddings_free(cp_embeddings* emb) { delete emb; }

cp_status cp_embeddings_info_json(const cp_embeddings* emb, char** out) {
  return guarded([&] {
    require(emb != nullptr, "embeddings");
    ordered_json j;
    j["dim"] = emb->table.dim();
    j["n_layers"] = emb->table.n_layers();
    j["n_heads"] = emb->table.n_heads();
    j["has_attention"] = emb->table.has_attention();
    j["records"] = emb->table.records().size();
    emit(out, j.dump(2));
  });
}

cp_status cp_embeddings_check(const cp_embeddings* emb, const cp_treebank* tb) {
  return guarded([&] {
    require(emb != nullptr, "embeddings");
    require(tb != nullptr, "treebank");
    emb->table.check_against(tb->tb);
  });
}

cp_status cp_attention_profile_json(const cp_embeddings* emb, const cp_treebank* tb,
                                    const char* aggregation, char** out) {
  return guarded([&] {
    require(emb != nullptr, "embeddings");
    require(tb != nullptr, "treebank");
    const std::string agg = aggregation == nullptr ? "mean" : aggregation;
    cpx::HeadAggregation mode;
    if (agg == "mean") {
      mode = cpx::HeadAggregation::kMean;
    } else if (agg == "max") {
      mode = cpx::HeadAggregation::kMax;
    } else {
      throw cpx::Error(cpx::ErrorCode::kInvalidArgument, "unknown aggregation '" + agg + "'");
    }
    const auto examples = cpx::extract_examples(tb->tb);
    emit(out, cpx::to_json(cpx::attention_profile(emb->table, examples, tb->tb, mode)).dump(2));
  });
}

cp_status cp_model_init(const char* config_json, uint32_t dim, cp_model** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer");
    const ModelSettings settings = parse_model_settings(config_json);
    cpx::ProbeModel m;
    m.config = settings.train;
    if (settings.toy) {
      m.encoder = cpx::init_toy_encoder(*settings.toy);
      m.probe = cpx::initial_probe(settings.train, settings.toy->dim);
    } else {
      if (dim == 0) throw cpx::Error(cpx::ErrorCode::kInvalidArgument, "dim must be positive");
      m.probe = cpx::initial_probe(settings.train, dim);
    }
    *out = new cp_model{std::move(m)};
  });
}

cp_status cp_model_train(const char* config_json, const cp_treebank* train,
                         const cp_embeddings* train_emb, const cp_treebank* dev,
                         const cp_embeddings* dev_emb, cp_model** out, char** history_json) {
  return guarded([&] {
    require(out != nullptr, "output pointer");
    require(train != nullptr, "training treebank");
    const ModelSettings settings = parse_model_settings(config_json);
    const auto train_set = labeled(train, train_emb);
    std::optional<cpx::LabeledTreebank> dev_set;
    if (dev != nullptr) dev_set = labeled(dev, dev_emb);
    auto result = cpx::train_on_treebanks(train_set, dev_set ? &*dev_set : nullptr, settings.train,
                                          settings.toy);
    std::string history = cpx::to_json(result.history, result.selected_epoch).dump(2);
    if (history_json != nullptr) *history_json = dup_string(history);
    *out = new cp_model{std::move(result.model)};
  });
}

cp_status cp_model_save(const cp_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr, "model");
    require(path != nullptr, "path");
    cpx::save_checkpoint(model->model, path);
  });
}

cp_status cp_model_load(const char* path, cp_model** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer");
    require(path != nullptr, "path");
    *out = new cp_model{cpx::load_checkpoint(path)};
  });
}

void cp_model_free(cp_model* model) { delete model; }

cp_status cp_model_info_json(const cp_model* model, char** out) {
  return guarded([&] {
    require(model != nullptr, "model");
    const auto& m = model->model;
    ordered_json j;
    j["backend"] = m.backend();
    j["dim"] = m.probe.dim();
    j["hidden_dim"] = m.probe.hidden_dim();
    j["config"] = cpx::to_json(m.config);
    j["encoder"] = m.encoder ? cpx::to_json(m.encoder->config) : ordered_json(nullptr);
    emit(out, j.dump(2));
  });
}

cp_status cp_model_encode(const cp_model* model, const cp_treebank* tb, int with_attention,
                          cp_embeddings** out) {
  return guarded([&] {
    require(model != nullptr, "model");
    require(tb != nullptr, "treebank");
    require(out != nullptr, "output pointer");
    if (!model->model.encoder) {
      throw cpx::Error(cpx::ErrorCode::kInvalidArgument, "model has no encoder");
    }
    *out = new cp_embeddings{
        cpx::toy_encode_treebank(tb->tb, *model->model.encoder, with_attention != 0)};
  });
}

cp_status cp_model_evaluate_json(const cp_model* model, const cp_treebank* tb,
                                 const cp_embeddings* emb, char** out) {
  return guarded([&] {
    require(model != nullptr, "model");
    require(tb != nullptr, "treebank");
    const auto test = labeled(tb, emb);
    ordered_json j;
    j["report"] = cpx::to_json(cpx::evaluate_model(model->model, test));
    j["positional_errors"] = cpx::to_json(cpx::positional_report(model->model, test));
    emit(out, j.dump(2));
  });
}

cp_status cp_transfer_matrix(const cp_model* const* models, const char* const* names,
                             size_t n_models, const cp_treebank* const* treebanks,
                             const cp_embeddings* const* embs, size_t n_treebanks,
                             char** json_out, char** text_out) {
  return guarded([&] {
    require(models != nullptr || n_models == 0, "models");
    require(names != nullptr || n_models == 0, "names");
    require(treebanks != nullptr || n_treebanks == 0, "treebanks");
    std::vector<cpx::ProbeModel> ms;
    std::vector<std::string> ns;
    for (size_t i = 0; i < n_models; ++i) {
      require(models[i] != nullptr, "model");
      require(names[i] != nullptr, "model name");
      ms.push_back(models[i]->model);
      ns.emplace_back(names[i]);
    }
    std::vector<cpx::LabeledTreebank> tests;
    for (size_t i = 0; i < n_treebanks; ++i) {
      require(treebanks[i] != nullptr, "treebank");
      tests.push_back(labeled(treebanks[i], embs == nullptr ? nullptr : embs[i]));
    }
    const auto matrix = cpx::transfer_matrix(ms, std::move(ns), tests);
    std::string j = cpx::to_json(matrix).dump(2);
    std::string t = cpx::to_text(matrix);
    if (json_out != nullptr) *json_out = dup_string(j);
    if (text_out != nullptr) *text_out = dup_string(t);
  });
}

}  // extern "C"
