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

#include "clauseprobe/encoder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "clauseprobe/errors.hpp"
#include "clauseprobe/rng.hpp"

namespace clauseprobe {
namespace {

constexpr char kMagic[8] = {'C', 'L', 'P', 'R', 'B', '1', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagAttention = 1u;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(pos_, std::string("truncated record: expected ") +
                                  std::to_string(n) + " bytes for " + what + ", " +
                                  std::to_string(bytes_.size() - pos_) + " remain");
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double half_width) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-half_width, half_width);
  }
}

Eigen::MatrixXd linear_init(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  Eigen::MatrixXd m(fan_in, fan_out);
  fill_uniform(m, rng, 1.0 / std::sqrt(static_cast<double>(fan_in)));
  return m;
}

void softmax_rows(Eigen::MatrixXd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - mx).exp();
    s.row(i) /= s.row(i).sum();
  }
}

Eigen::MatrixXd affine(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                       const Eigen::MatrixXd& b) {
  Eigen::MatrixXd y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::uint32_t dim, std::uint32_t n_layers,
                               std::uint32_t n_heads, bool has_attention)
    : dim_(dim), n_layers_(n_layers), n_heads_(n_heads), has_attention_(has_attention) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be positive");
}

void EmbeddingTable::add(EmbeddingRecord r) {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "embedding record '" + r.sent_id + "': " + msg);
  };
  if (r.first_subword.size() != r.n_tokens) fail("first-subword count differs from n_tokens");
  if (r.n_tokens > 0 && r.n_subwords == 0) fail("n_subwords is zero");
  for (std::size_t i = 0; i < r.first_subword.size(); ++i) {
    if (r.first_subword[i] >= r.n_subwords) fail("first-subword index out of range");
    if (i > 0 && r.first_subword[i] < r.first_subword[i - 1]) {
      fail("first-subword indices decrease");
    }
  }
  if (r.vectors.size() != static_cast<std::size_t>(r.n_tokens) * dim_) {
    fail("vector block has wrong size");
  }
  const std::size_t n = r.n_subwords;
  const std::size_t expected_attn =
      has_attention_ ? static_cast<std::size_t>(n_layers_) * n_heads_ * n * n : 0;
  if (r.attention.size() != expected_attn) fail("attention block has wrong size");
  for (std::size_t row = 0; n > 0 && row < r.attention.size() / n; ++row) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += r.attention[row * n + k];
    if (std::abs(sum - 1.0) > kAttentionRowTolerance) {
      fail("attention row " + std::to_string(row) + " sums to " + std::to_string(sum));
    }
  }
  if (!index_.emplace(r.sent_id, records_.size()).second) fail("duplicate sent_id");
  records_.push_back(std::move(r));
}

const EmbeddingRecord* EmbeddingTable::find(std::string_view sent_id) const {
  auto it = index_.find(std::string(sent_id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

void EmbeddingTable::check_against(const Treebank& tb) const {
  for (const auto& s : tb.sentences) {
    const auto* r = find(s.sent_id);
    if (r == nullptr) {
      throw Error(ErrorCode::kNotFound, "no embedding record for sentence " + s.sent_id);
    }
    if (r->n_tokens != s.tokens.size()) {
      throw Error(ErrorCode::kDimension,
                  "sentence " + s.sent_id + ": " + std::to_string(r->n_tokens) +
                      " vectors for " + std::to_string(s.tokens.size()) + " tokens");
    }
  }
}

std::string encode_embedding_table(const EmbeddingTable& table) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, table.dim());
  put_u32(out, table.n_layers());
  put_u32(out, table.n_heads());
  put_u32(out, table.has_attention() ? kFlagAttention : 0u);
  for (const auto& r : table.records()) {
    put_u32(out, static_cast<std::uint32_t>(r.sent_id.size()));
    out += r.sent_id;
    put_u32(out, r.n_tokens);
    put_u32(out, r.n_subwords);
    for (auto i : r.first_subword) put_u32(out, i);
    for (float f : r.vectors) put_f32(out, f);
    for (float f : r.attention) put_f32(out, f);
  }
  return out;
}

EmbeddingTable decode_embedding_table(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(sizeof(kMagic), "magic") != std::string_view(kMagic, sizeof(kMagic))) {
    throw FormatError(0, "bad magic");
  }
  const std::size_t version_offset = in.offset();
  const auto version = in.u32("version");
  if (version != kVersion) {
    throw FormatError(version_offset, "version mismatch: file has " + std::to_string(version) +
                                          ", reader supports " + std::to_string(kVersion));
  }
  const auto dim = in.u32("dim");
  const auto n_layers = in.u32("n_layers");
  const auto n_heads = in.u32("n_heads");
  const std::size_t flags_offset = in.offset();
  const auto flags = in.u32("flags");
  if (dim == 0) throw FormatError(version_offset + 4, "dim is zero");
  if ((flags & ~kFlagAttention) != 0) throw FormatError(flags_offset, "unknown flag bits");
  const bool has_attention = (flags & kFlagAttention) != 0;
  EmbeddingTable table(dim, n_layers, n_heads, has_attention);

  while (!in.at_end()) {
    const std::size_t record_offset = in.offset();
    EmbeddingRecord r;
    const auto id_len = in.u32("sent_id length");
    r.sent_id = std::string(in.take(id_len, "sent_id"));
    r.n_tokens = in.u32("n_tokens");
    r.n_subwords = in.u32("n_subwords");
    if (r.n_tokens > 0 && r.n_subwords == 0) {
      throw FormatError(in.offset() - 4, "n_subwords is zero");
    }
    // Guard against absurd counts before allocating.
    in.need(static_cast<std::size_t>(r.n_tokens) * 4, "first-subword indices");
    r.first_subword.resize(r.n_tokens);
    for (std::uint32_t i = 0; i < r.n_tokens; ++i) {
      const std::size_t at = in.offset();
      r.first_subword[i] = in.u32("first-subword index");
      if (r.first_subword[i] >= r.n_subwords ||
          (i > 0 && r.first_subword[i] < r.first_subword[i - 1])) {
        throw FormatError(at, "invalid first-subword index " +
                                  std::to_string(r.first_subword[i]));
      }
    }
    const std::size_t n_floats = static_cast<std::size_t>(r.n_tokens) * dim;
    r.vectors.resize(n_floats);
    for (std::size_t i = 0; i < n_floats; ++i) r.vectors[i] = in.f32("vector element");
    if (has_attention) {
      const std::size_t n = r.n_subwords;
      const std::size_t rows = static_cast<std::size_t>(n_layers) * n_heads * n;
      r.attention.resize(rows * n);
      for (std::size_t row = 0; row < rows; ++row) {
        const std::size_t row_offset = in.offset();
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const float v = in.f32("attention value");
          r.attention[row * n + k] = v;
          sum += v;
        }
        if (std::abs(sum - 1.0) > kAttentionRowTolerance) {
          throw FormatError(row_offset, "attention row not stochastic (sum " +
                                            std::to_string(sum) + ") in record '" +
                                            r.sent_id + "'");
        }
      }
    }
    if (table.find(r.sent_id) != nullptr) {
      throw FormatError(record_offset, "duplicate sent_id '" + r.sent_id + "'");
    }
    table.add(std::move(r));
  }
  return table;
}

EmbeddingTable read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_embedding_table(buf.str());
}

void write_embedding_file(const EmbeddingTable& table, const std::filesystem::path& path) {
  const std::string bytes = encode_embedding_table(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void validate(const ToyEncoderConfig& c) {
  if (c.vocab_hash_buckets == 0 || c.dim == 0 || c.n_heads == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "toy encoder needs positive buckets, dim and heads");
  }
  if (c.dim % c.n_heads != 0) {
    throw Error(ErrorCode::kInvalidArgument, "toy encoder dim must be divisible by n_heads");
  }
  if (!(c.embedding_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "embedding_scale must be positive");
  }
}

ToyEncoderParams init_toy_encoder(const ToyEncoderConfig& config) {
  validate(config);
  Rng rng(derive_seed(config.rng_seed, "toy-encoder"));
  const Eigen::Index d = config.dim;
  ToyEncoderParams p;
  p.config = config;
  p.embedding.resize(config.vocab_hash_buckets, d);
  fill_uniform(p.embedding, rng, config.embedding_scale);
  for (std::uint32_t l = 0; l < config.n_layers; ++l) {
    EncoderLayer layer;
    layer.wq = linear_init(d, d, rng);
    layer.wk = linear_init(d, d, rng);
    layer.wv = linear_init(d, d, rng);
    layer.wo = linear_init(d, d, rng);
    layer.bq = layer.bk = layer.bv = layer.bo = Eigen::MatrixXd::Zero(1, d);
    layer.ff_in = linear_init(d, 4 * d, rng);
    layer.ff_in_bias = Eigen::MatrixXd::Zero(1, 4 * d);
    layer.ff_out = linear_init(4 * d, d, rng);
    layer.ff_out_bias = Eigen::MatrixXd::Zero(1, d);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

ToyEncoderParams zeros_like(const ToyEncoderParams& params) {
  ToyEncoderParams z = params;
  visit_tensors(z, [](const std::string&, Eigen::MatrixXd& m) { m.setZero(); });
  return z;
}

void visit_tensors(ToyEncoderParams& p,
                   const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn) {
  fn("embedding", p.embedding);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    fn(pre + "wq", L.wq);
    fn(pre + "bq", L.bq);
    fn(pre + "wk", L.wk);
    fn(pre + "bk", L.bk);
    fn(pre + "wv", L.wv);
    fn(pre + "bv", L.bv);
    fn(pre + "wo", L.wo);
    fn(pre + "bo", L.bo);
    fn(pre + "ff_in", L.ff_in);
    fn(pre + "ff_in_bias", L.ff_in_bias);
    fn(pre + "ff_out", L.ff_out);
    fn(pre + "ff_out_bias", L.ff_out_bias);
  }
}

void visit_tensors(const ToyEncoderParams& p,
                   const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn) {
  visit_tensors(const_cast<ToyEncoderParams&>(p),
                [&](const std::string& name, Eigen::MatrixXd& m) { fn(name, m); });
}

std::uint32_t hash_bucket(std::string_view form, std::uint32_t buckets) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : form) h = (h ^ c) * 0x100000001b3ULL;
  return static_cast<std::uint32_t>(h % buckets);
}

Eigen::MatrixXd sinusoidal_positions(std::size_t n, std::size_t dim) {
  Eigen::MatrixXd pe(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * rate;
      pe(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(i)) =
          (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

ToyEncoding toy_encode(const Sentence& sentence, const ToyEncoderParams& params,
                       ToyForwardCache* cache) {
  const auto& cfg = params.config;
  const Eigen::Index n = static_cast<Eigen::Index>(sentence.tokens.size());
  const Eigen::Index d = cfg.dim;
  const Eigen::Index heads = cfg.n_heads;
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Eigen::MatrixXd x = sinusoidal_positions(static_cast<std::size_t>(n), cfg.dim);
  if (cache != nullptr) {
    cache->buckets.clear();
    cache->layers.clear();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto b = hash_bucket(sentence.tokens[static_cast<std::size_t>(i)].form,
                               cfg.vocab_hash_buckets);
    x.row(i) += params.embedding.row(b);
    if (cache != nullptr) cache->buckets.push_back(b);
  }

  ToyEncoding out;
  for (const auto& L : params.layers) {
    ToyForwardCache::Layer c;
    c.input = x;
    c.q = affine(x, L.wq, L.bq);
    c.k = affine(x, L.wk, L.bk);
    c.v = affine(x, L.wv, L.bv);
    c.context.resize(n, d);
    for (Eigen::Index h = 0; h < heads; ++h) {
      Eigen::MatrixXd a =
          (c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose()) * scale;
      softmax_rows(a);
      c.context.middleCols(h * dh, dh) = a * c.v.middleCols(h * dh, dh);
      out.attention.push_back(a);
      c.attention.push_back(std::move(a));
    }
    c.mid = x + affine(c.context, L.wo, L.bo);
    c.hidden = affine(c.mid, L.ff_in, L.ff_in_bias).array().tanh().matrix();
    x = c.mid + affine(c.hidden, L.ff_out, L.ff_out_bias);
    if (cache != nullptr) cache->layers.push_back(std::move(c));
  }
  out.vectors = std::move(x);
  return out;
}

void toy_backward(const ToyForwardCache& cache, const ToyEncoderParams& params,
                  const Eigen::MatrixXd& d_vectors, ToyEncoderParams& grads) {
  const auto& cfg = params.config;
  const Eigen::Index d = cfg.dim;
  const Eigen::Index heads = cfg.n_heads;
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Eigen::MatrixXd dy = d_vectors;
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& L = params.layers[li];
    auto& G = grads.layers[li];
    const auto& c = cache.layers[li];

    // y = mid + tanh(mid * ff_in + b_in) * ff_out + b_out
    G.ff_out.noalias() += c.hidden.transpose() * dy;
    G.ff_out_bias += dy.colwise().sum();
    Eigen::MatrixXd d_pre =
        ((dy * L.ff_out.transpose()).array() * (1.0 - c.hidden.array().square())).matrix();
    G.ff_in.noalias() += c.mid.transpose() * d_pre;
    G.ff_in_bias += d_pre.colwise().sum();
    Eigen::MatrixXd d_mid = dy + d_pre * L.ff_in.transpose();

    // mid = input + context * wo + bo
    G.wo.noalias() += c.context.transpose() * d_mid;
    G.bo += d_mid.colwise().sum();
    Eigen::MatrixXd d_context = d_mid * L.wo.transpose();
    Eigen::MatrixXd d_input = d_mid;

    Eigen::MatrixXd dq(c.q.rows(), d), dk(c.k.rows(), d), dv(c.v.rows(), d);
    for (Eigen::Index h = 0; h < heads; ++h) {
      const auto& a = c.attention[static_cast<std::size_t>(h)];
      const auto dctx = d_context.middleCols(h * dh, dh);
      Eigen::MatrixXd da = dctx * c.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh) = a.transpose() * dctx;
      const Eigen::VectorXd row_dot = (da.array() * a.array()).rowwise().sum();
      Eigen::MatrixXd ds = (a.array() * (da.colwise() - row_dot).array()).matrix() * scale;
      dq.middleCols(h * dh, dh) = ds * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) = ds.transpose() * c.q.middleCols(h * dh, dh);
    }
    G.wq.noalias() += c.input.transpose() * dq;
    G.bq += dq.colwise().sum();
    G.wk.noalias() += c.input.transpose() * dk;
    G.bk += dk.colwise().sum();
    G.wv.noalias() += c.input.transpose() * dv;
    G.bv += dv.colwise().sum();
    d_input.noalias() += dq * L.wq.transpose();
    d_input.noalias() += dk * L.wk.transpose();
    d_input.noalias() += dv * L.wv.transpose();
    dy = std::move(d_input);
  }
  for (std::size_t i = 0; i < cache.buckets.size(); ++i) {
    grads.embedding.row(cache.buckets[i]) += dy.row(static_cast<Eigen::Index>(i));
  }
}

EmbeddingTable toy_encode_treebank(const Treebank& tb, const ToyEncoderParams& params,
                                   bool with_attention) {
  const auto& cfg = params.config;
  EmbeddingTable table(cfg.dim, cfg.n_layers, cfg.n_heads, with_attention);
  for (const auto& s : tb.sentences) {
    const ToyEncoding enc = toy_encode(s, params);
    EmbeddingRecord r;
    r.sent_id = s.sent_id;
    r.n_tokens = static_cast<std::uint32_t>(s.tokens.size());
    r.n_subwords = r.n_tokens;
    for (std::uint32_t i = 0; i < r.n_tokens; ++i) r.first_subword.push_back(i);
    r.vectors.reserve(static_cast<std::size_t>(r.n_tokens) * cfg.dim);
    for (Eigen::Index i = 0; i < enc.vectors.rows(); ++i) {
      for (Eigen::Index j = 0; j < enc.vectors.cols(); ++j) {
        r.vectors.push_back(static_cast<float>(enc.vectors(i, j)));
      }
    }
    if (with_attention) {
      for (const auto& a : enc.attention) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
          for (Eigen::Index j = 0; j < a.cols(); ++j) {
            r.attention.push_back(static_cast<float>(a(i, j)));
          }
        }
      }
    }
    table.add(std::move(r));
  }
  return table;
}

}  // namespace clauseprobe
