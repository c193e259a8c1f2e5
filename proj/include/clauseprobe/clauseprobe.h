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

/* C interface to clauseprobe. All objects are opaque handles released with
 * their matching *_free function. Functions return a cp_status; on failure
 * cp_last_error_message() describes the error for the calling thread.
 * Strings returned through char** are NUL-terminated, heap-allocated and must
 * be released with cp_string_free(). JSON arguments and results are UTF-8. */

#ifndef CLAUSEPROBE_CLAUSEPROBE_H_
#define CLAUSEPROBE_CLAUSEPROBE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CLAUSEPROBE_BUILDING_LIBRARY)
#define CP_API __attribute__((visibility("default")))
#else
#define CP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_ERR_INVALID_ARGUMENT = 1,
  CP_ERR_PARSE = 2,
  CP_ERR_IO = 3,
  CP_ERR_FORMAT = 4,
  CP_ERR_DIMENSION = 5,
  CP_ERR_NUMERIC = 6,
  CP_ERR_NOT_FOUND = 7,
  CP_ERR_INTERNAL = 8
} cp_status;

typedef struct cp_treebank cp_treebank;
typedef struct cp_embeddings cp_embeddings;
typedef struct cp_model cp_model;

CP_API const char* cp_version(void);
CP_API const char* cp_status_name(cp_status status);
/* Message of the last failed call on this thread; "" if none. */
CP_API const char* cp_last_error_message(void);
CP_API void cp_string_free(char* s);

/* ---- Treebanks ---- */

CP_API cp_status cp_treebank_parse(const char* text, size_t length, const char* name,
                                   const char* language_code, cp_treebank** out);
CP_API cp_status cp_treebank_load(const char* path, const char* name,
                                  const char* language_code, cp_treebank** out);
CP_API void cp_treebank_free(cp_treebank* tb);
CP_API size_t cp_treebank_sentence_count(const cp_treebank* tb);
CP_API cp_status cp_treebank_serialize(const cp_treebank* tb, char** out);
/* Writes the treebank as CoNLL-U. */
CP_API cp_status cp_treebank_save(const cp_treebank* tb, const char* path);
/* Array of {sent_id, token_id, rule, message}; empty when valid. */
CP_API cp_status cp_treebank_validate_json(const cp_treebank* tb, char** out);
/* One JSON object per line per predicate. */
CP_API cp_status cp_treebank_examples_jsonl(const cp_treebank* tb, char** out);
/* {name, language_code, sentences, examples, main, sub, majority_baseline}. */
CP_API cp_status cp_treebank_summary_json(const cp_treebank* tb, char** out);

/* Generates a synthetic treebank from a grammar configuration object. */
CP_API cp_status cp_synth_generate(const char* config_json, cp_treebank** out);

/* {head_direction: {...}, comp_position: {...}}. */
CP_API cp_status cp_typology_json(const cp_treebank* tb, char** out);

/* ---- Embedding files ---- */

CP_API cp_status cp_embeddings_read(const char* path, cp_embeddings** out);
CP_API cp_status cp_embeddings_write(const cp_embeddings* emb, const char* path);
CP_API void cp_embeddings_free(cp_embeddings* emb);
/* {dim, n_layers, n_heads, has_attention, records}. */
CP_API cp_status cp_embeddings_info_json(const cp_embeddings* emb, char** out);
/* Fails unless every sentence of tb has a record with matching token count. */
CP_API cp_status cp_embeddings_check(const cp_embeddings* emb, const cp_treebank* tb);
/* aggregation is "mean" or "max". */
CP_API cp_status cp_attention_profile_json(const cp_embeddings* emb, const cp_treebank* tb,
                                           const char* aggregation, char** out);

/* ---- Probe models ----
 *
 * Model configuration object, all keys optional:
 *   preset:  "single_language" (default) or "zero_shot"
 *   train:   overrides of epochs, learning_rate, batch_size, rng_seed,
 *            select_best_on_validation, train_encoder, hidden_dim, optimizer
 *   encoder: toy encoder settings; present selects the toy backend, absent or
 *            null selects vectors read from embedding files */

/* Untrained model. dim is the vector size for the file backend and ignored
 * for the toy backend. */
CP_API cp_status cp_model_init(const char* config_json, uint32_t dim, cp_model** out);
/* dev and the embedding handles may be NULL where not needed. history_json
 * may be NULL. */
CP_API cp_status cp_model_train(const char* config_json, const cp_treebank* train,
                                const cp_embeddings* train_emb, const cp_treebank* dev,
                                const cp_embeddings* dev_emb, cp_model** out,
                                char** history_json);
CP_API cp_status cp_model_save(const cp_model* model, const char* path);
CP_API cp_status cp_model_load(const char* path, cp_model** out);
CP_API void cp_model_free(cp_model* model);
/* {backend, dim, hidden_dim, config, encoder}. */
CP_API cp_status cp_model_info_json(const cp_model* model, char** out);
/* Runs the toy encoder of the model over tb. */
CP_API cp_status cp_model_encode(const cp_model* model, const cp_treebank* tb,
                                 int with_attention, cp_embeddings** out);
/* {report: {...}, positional_errors: {...}}; emb may be NULL for toy models. */
CP_API cp_status cp_model_evaluate_json(const cp_model* model, const cp_treebank* tb,
                                        const cp_embeddings* emb, char** out);

/* Evaluates every model on every treebank. embs has n_treebanks entries, any
 * of which may be NULL. Either output pointer may be NULL. */
CP_API cp_status cp_transfer_matrix(const cp_model* const* models, const char* const* names,
                                    size_t n_models, const cp_treebank* const* treebanks,
                                    const cp_embeddings* const* embs, size_t n_treebanks,
                                    char** json_out, char** text_out);

#ifdef __cplusplus
}
#endif

#endif /* CLAUSEPROBE_CLAUSEPROBE_H_ */
