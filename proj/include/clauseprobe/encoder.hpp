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

// Token vector backends: the binary embedding-file format and a small
// trainable transformer ("toy encoder") that works directly on UD tokens.

#ifndef CLAUSEPROBE_ENCODER_HPP_
#define CLAUSEPROBE_ENCODER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "clauseprobe/conllu.hpp"

namespace clauseprobe {

struct EmbeddingRecord {
  std::string sent_id;
  std::uint32_t n_tokens = 0;
  std::uint32_t n_subwords = 0;
  std::vector<std::uint32_t> first_subword;  // one per token
  std::vector<float> vectors;                // n_tokens x dim, row-major
  // n_layers x n_heads x n_subwords x n_subwords; empty without attention.
  std::vector<float> attention;

  bool operator==(const EmbeddingRecord&) const = default;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::uint32_t dim, std::uint32_t n_layers, std::uint32_t n_heads,
                 bool has_attention);

  // Checks record invariants; throws Error(kInvalidArgument) on violation.
  void add(EmbeddingRecord record);

  const EmbeddingRecord* find(std::string_view sent_id) const;
  const std::vector<EmbeddingRecord>& records() const { return records_; }

  std::uint32_t dim() const { return dim_; }
  std::uint32_t n_layers() const { return n_layers_; }
  std::uint32_t n_heads() const { return n_heads_; }
  bool has_attention() const { return has_attention_; }

  std::span<const float> vector(const EmbeddingRecord& r, std::size_t token) const {
    return {r.vectors.data() + token * dim_, dim_};
  }
  float attention(const EmbeddingRecord& r, std::size_t layer, std::size_t head,
                  std::size_t query, std::size_t key) const {
    const std::size_t n = r.n_subwords;
    return r.attention[((layer * n_heads_ + head) * n + query) * n + key];
  }

  // Every sentence of `tb` must have a record whose token count matches.
  void check_against(const Treebank& tb) const;

  bool operator==(const EmbeddingTable& o) const {
    return dim_ == o.dim_ && n_layers_ == o.n_layers_ && n_heads_ == o.n_heads_ &&
           has_attention_ == o.has_attention_ && records_ == o.records_;
  }

 private:
  std::uint32_t dim_ = 0;
  std::uint32_t n_layers_ = 0;
  std::uint32_t n_heads_ = 0;
  bool has_attention_ = false;
  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr double kAttentionRowTolerance = 1e-4;

// Binary codec ("CLPRB1\0\0", version 1). Decoding throws FormatError with
// the byte offset of the problem.
std::string encode_embedding_table(const EmbeddingTable& table);
EmbeddingTable decode_embedding_table(std::string_view bytes);
EmbeddingTable read_embedding_file(const std::filesystem::path& path);
void write_embedding_file(const EmbeddingTable& table, const std::filesystem::path& path);

struct ToyEncoderConfig {
  std::uint32_t vocab_hash_buckets = 4096;
  std::uint32_t dim = 32;
  std::uint32_t n_layers = 2;
  std::uint32_t n_heads = 2;
  std::uint64_t rng_seed = 0;
  // Half-width of the uniform initializer for the embedding rows.
  double embedding_scale = 1.0;

  bool operator==(const ToyEncoderConfig&) const = default;
};

// All biases are stored as 1 x k matrices so every tensor can be visited
// uniformly.
struct EncoderLayer {
  Eigen::MatrixXd wq, wk, wv, wo;  // dim x dim
  Eigen::MatrixXd bq, bk, bv, bo;  // 1 x dim
  Eigen::MatrixXd ff_in;           // dim x 4*dim
  Eigen::MatrixXd ff_in_bias;      // 1 x 4*dim
  Eigen::MatrixXd ff_out;          // 4*dim x dim
  Eigen::MatrixXd ff_out_bias;     // 1 x dim
};

struct ToyEncoderParams {
  ToyEncoderConfig config;
  Eigen::MatrixXd embedding;  // buckets x dim
  std::vector<EncoderLayer> layers;
};

void validate(const ToyEncoderConfig& config);
ToyEncoderParams init_toy_encoder(const ToyEncoderConfig& config);
// Same shapes, all zeros.
ToyEncoderParams zeros_like(const ToyEncoderParams& params);

// Visits every tensor in a fixed order: embedding, then per layer
// wq bq wk bk wv bv wo bo ff_in ff_in_bias ff_out ff_out_bias.
void visit_tensors(ToyEncoderParams& params,
                   const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
void visit_tensors(const ToyEncoderParams& params,
                   const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn);

// FNV-1a over the UTF-8 form.
std::uint32_t hash_bucket(std::string_view form, std::uint32_t buckets);

// Standard sin/cos table, positions 0..n-1.
Eigen::MatrixXd sinusoidal_positions(std::size_t n, std::size_t dim);

struct ToyEncoding {
  Eigen::MatrixXd vectors;                // n x dim
  std::vector<Eigen::MatrixXd> attention;  // index layer * n_heads + head; n x n
};

// Intermediate values kept for the backward pass.
struct ToyForwardCache {
  std::vector<std::uint32_t> buckets;
  struct Layer {
    Eigen::MatrixXd input, q, k, v, context, mid, hidden;
    std::vector<Eigen::MatrixXd> attention;  // per head
  };
  std::vector<Layer> layers;
};

ToyEncoding toy_encode(const Sentence& sentence, const ToyEncoderParams& params,
                       ToyForwardCache* cache = nullptr);

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(vectors).
void toy_backward(const ToyForwardCache& cache, const ToyEncoderParams& params,
                  const Eigen::MatrixXd& d_vectors, ToyEncoderParams& grads);

// Encodes every sentence (identity subword alignment).
EmbeddingTable toy_encode_treebank(const Treebank& tb, const ToyEncoderParams& params,
                                   bool with_attention);

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_ENCODER_HPP_
