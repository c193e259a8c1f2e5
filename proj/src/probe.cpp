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

#include "clauseprobe/probe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include "clauseprobe/errors.hpp"
#include "clauseprobe/rng.hpp"

namespace clauseprobe {
namespace {

constexpr char kCheckpointMagic[8] = {'C', 'L', 'P', 'C', 'K', 'P', 'T', '1'};

int label_index(ClauseLabel l) { return l == ClauseLabel::kMain ? 0 : 1; }

void check_input(const Eigen::VectorXd& x, const ProbeParams& p) {
  if (x.size() != p.dim()) {
    throw Error(ErrorCode::kDimension, "probe expects " + std::to_string(p.dim()) +
                                           "-dim input, got " + std::to_string(x.size()));
  }
}

double accuracy_of(const std::vector<ClauseLabel>& gold, const std::vector<ClauseLabel>& pred) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hit += gold[i] == pred[i];
  return gold.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(gold.size());
}

std::vector<Eigen::MatrixXd*> optimized_tensors(ProbeModel& m, bool with_encoder) {
  auto out = m.probe.tensors();
  if (with_encoder) {
    visit_tensors(*m.encoder,
                  [&](const std::string&, Eigen::MatrixXd& t) { out.push_back(&t); });
  }
  return out;
}

std::vector<const Eigen::MatrixXd*> gradient_tensors(const ProbeParams& pg,
                                                     const ToyEncoderParams* eg) {
  auto out = pg.tensors();
  if (eg != nullptr) {
    visit_tensors(*eg, [&](const std::string&, const Eigen::MatrixXd& t) { out.push_back(&t); });
  }
  return out;
}

// Runs the shared epoch loop. `run_epoch` performs all updates for one epoch
// and returns the mean training loss; `dev_accuracy` scores the current model.
TrainResult run_training(ProbeModel model, const TrainConfig& cfg,
                         const std::function<double(ProbeModel&, int)>& run_epoch,
                         const std::function<std::optional<double>(const ProbeModel&)>& dev_accuracy) {
  TrainResult result;
  std::optional<ProbeModel> best;
  double best_acc = -1.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = run_epoch(model, epoch);
    rec.dev_accuracy = dev_accuracy(model);
    result.history.push_back(rec);
    if (cfg.select_best_on_validation && rec.dev_accuracy && *rec.dev_accuracy > best_acc) {
      best_acc = *rec.dev_accuracy;
      best = model;
      result.selected_epoch = epoch;
    }
  }
  if (cfg.select_best_on_validation && best) {
    result.model = std::move(*best);
  } else {
    result.model = std::move(model);
    result.selected_epoch = cfg.epochs;
  }
  return result;
}

void check_loss(double loss, int epoch, std::size_t batch) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kNumeric, "non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batch));
  }
}

std::vector<Eigen::VectorXd> raw_features(const ToyEncoderParams* encoder,
                                          const ProbeSentence& s) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(s.predicate_indices.size());
  if (encoder != nullptr) {
    const ToyEncoding enc = toy_encode(*s.sentence, *encoder);
    for (int idx : s.predicate_indices) out.push_back(enc.vectors.row(idx - 1).transpose());
    return out;
  }
  if (s.record == nullptr) {
    throw Error(ErrorCode::kNotFound, "missing vectors for sentence " + s.sentence->sent_id);
  }
  const std::size_t dim = s.record->vectors.size() / std::max<std::size_t>(1, s.record->n_tokens);
  for (int idx : s.predicate_indices) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    const float* row = s.record->vectors.data() + static_cast<std::size_t>(idx - 1) * dim;
    for (std::size_t j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(j)) = row[j];
    out.push_back(std::move(x));
  }
  return out;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return v;
}

}  // namespace

ProbeParams init_probe(Eigen::Index dim, Eigen::Index hidden_dim, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "probe input dim must be positive");
  if (hidden_dim == 0) hidden_dim = dim;
  if (hidden_dim < 1) throw Error(ErrorCode::kInvalidArgument, "hidden_dim must be positive");
  Rng rng(seed);
  const double a = 1.0 / std::sqrt(static_cast<double>(dim));
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-a, a);
    }
    return m;
  };
  ProbeParams p;
  p.w1 = fill(hidden_dim, dim);
  p.b1 = fill(hidden_dim, 1);
  p.w2 = fill(2, hidden_dim);
  p.b2 = fill(2, 1);
  return p;
}

ProbeParams zero_probe(Eigen::Index dim, Eigen::Index hidden_dim) {
  if (hidden_dim == 0) hidden_dim = dim;
  ProbeParams p;
  p.w1 = Eigen::MatrixXd::Zero(hidden_dim, dim);
  p.b1 = Eigen::MatrixXd::Zero(hidden_dim, 1);
  p.w2 = Eigen::MatrixXd::Zero(2, hidden_dim);
  p.b2 = Eigen::MatrixXd::Zero(2, 1);
  return p;
}

ProbeOutput probe_forward(const Eigen::VectorXd& x, const ProbeParams& p) {
  check_input(x, p);
  const Eigen::VectorXd h = (p.w1 * x + p.b1).array().tanh().matrix();
  ProbeOutput out;
  out.logits = p.w2 * h + p.b2;
  const double mx = out.logits.maxCoeff();
  out.probs = (out.logits.array() - mx).exp().matrix();
  out.probs /= out.probs.sum();
  return out;
}

ClauseLabel predict_label(const Eigen::VectorXd& x, const ProbeParams& p) {
  const auto out = probe_forward(x, p);
  return out.logits(0) > out.logits(1) ? ClauseLabel::kMain : ClauseLabel::kSub;
}

std::vector<ClauseLabel> predict(std::span<const Eigen::VectorXd> xs, const ProbeParams& p) {
  std::vector<ClauseLabel> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict_label(x, p));
  return out;
}

double loss_and_grad(std::span<const LabeledVector> batch, const ProbeParams& p,
                     ProbeParams* grads, std::vector<Eigen::VectorXd>* input_grads) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  if (grads != nullptr) *grads = zero_probe(p.dim(), p.hidden_dim());
  if (input_grads != nullptr) input_grads->clear();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& ex : batch) {
    check_input(ex.x, p);
    const Eigen::VectorXd h = (p.w1 * ex.x + p.b1).array().tanh().matrix();
    const Eigen::Vector2d logits = p.w2 * h + p.b2;
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    const int y = label_index(ex.label);
    loss += lse - logits(y);
    if (grads == nullptr && input_grads == nullptr) continue;

    Eigen::Vector2d d_logits = (logits.array() - lse).exp().matrix();
    d_logits(y) -= 1.0;
    d_logits *= inv_b;
    const Eigen::VectorXd d_pre =
        ((p.w2.transpose() * d_logits).array() * (1.0 - h.array().square())).matrix();
    if (grads != nullptr) {
      grads->w2.noalias() += d_logits * h.transpose();
      grads->b2 += d_logits;
      grads->w1.noalias() += d_pre * ex.x.transpose();
      grads->b1 += d_pre;
    }
    if (input_grads != nullptr) input_grads->push_back(p.w1.transpose() * d_pre);
  }
  return loss * inv_b;
}

TrainConfig TrainConfig::single_language() { return TrainConfig{}; }

TrainConfig TrainConfig::zero_shot() {
  TrainConfig c;
  c.epochs = 2;
  c.select_best_on_validation = false;
  return c;
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (cfg.batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (cfg.hidden_dim < 0) throw Error(ErrorCode::kInvalidArgument, "hidden_dim must be >= 0");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be finite and >= 0");
  }
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["epochs"] = cfg.epochs;
  j["learning_rate"] = cfg.learning_rate;
  j["batch_size"] = cfg.batch_size;
  j["rng_seed"] = cfg.rng_seed;
  j["select_best_on_validation"] = cfg.select_best_on_validation;
  j["train_encoder"] = cfg.train_encoder;
  j["hidden_dim"] = cfg.hidden_dim;
  j["optimizer"] = std::string(to_string(cfg.optimizer));
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "train config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
      else if (key == "select_best_on_validation") c.select_best_on_validation = value.get<bool>();
      else if (key == "train_encoder") c.train_encoder = value.get<bool>();
      else if (key == "hidden_dim") c.hidden_dim = value.get<int>();
      else if (key == "optimizer") c.optimizer = parse_optimizer(value.get<std::string>());
      else throw Error(ErrorCode::kInvalidArgument, "unknown train config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("train config: ") + e.what());
  }
  validate(c);
  return c;
}

nlohmann::ordered_json to_json(const ToyEncoderConfig& cfg) {
  nlohmann::ordered_json j;
  j["vocab_hash_buckets"] = cfg.vocab_hash_buckets;
  j["dim"] = cfg.dim;
  j["n_layers"] = cfg.n_layers;
  j["n_heads"] = cfg.n_heads;
  j["rng_seed"] = cfg.rng_seed;
  j["embedding_scale"] = cfg.embedding_scale;
  return j;
}

ToyEncoderConfig toy_config_from_json(const nlohmann::json& j, ToyEncoderConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "encoder config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "vocab_hash_buckets") c.vocab_hash_buckets = value.get<std::uint32_t>();
      else if (key == "dim") c.dim = value.get<std::uint32_t>();
      else if (key == "n_layers") c.n_layers = value.get<std::uint32_t>();
      else if (key == "n_heads") c.n_heads = value.get<std::uint32_t>();
      else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
      else if (key == "embedding_scale") c.embedding_scale = value.get<double>();
      else throw Error(ErrorCode::kInvalidArgument, "unknown encoder config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("encoder config: ") + e.what());
  }
  validate(c);
  return c;
}

std::size_t ProbeCorpus::n_examples() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.labels.size();
  return n;
}

std::vector<ClauseLabel> ProbeCorpus::gold() const {
  std::vector<ClauseLabel> out;
  for (const auto& s : sentences) out.insert(out.end(), s.labels.begin(), s.labels.end());
  return out;
}

ProbeCorpus make_probe_corpus(const Treebank& tb, const EmbeddingTable* table) {
  ProbeCorpus corpus;
  corpus.name = tb.name;
  for (const auto& s : tb.sentences) {
    ProbeSentence ps;
    ps.sentence = &s;
    for (const auto& tok : s.tokens) {
      if (auto label = label_for_deprel(tok.deprel)) {
        ps.predicate_indices.push_back(tok.id);
        ps.labels.push_back(*label);
      }
    }
    if (ps.labels.empty()) continue;
    if (table != nullptr) {
      ps.record = table->find(s.sent_id);
      if (ps.record == nullptr) {
        throw Error(ErrorCode::kNotFound,
                    tb.name + ": missing vectors for sentence " + s.sent_id);
      }
      if (ps.record->n_tokens != s.tokens.size()) {
        throw Error(ErrorCode::kDimension,
                    tb.name + ": sentence " + s.sent_id + " has " +
                        std::to_string(s.tokens.size()) + " tokens but " +
                        std::to_string(ps.record->n_tokens) + " vectors");
      }
    }
    corpus.sentences.push_back(std::move(ps));
  }
  return corpus;
}

nlohmann::ordered_json to_json(const std::vector<EpochRecord>& history, int selected_epoch) {
  nlohmann::ordered_json j;
  j["selected_epoch"] = selected_epoch;
  auto& epochs = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& r : history) {
    nlohmann::ordered_json e;
    e["epoch"] = r.epoch;
    e["train_loss"] = r.train_loss;
    e["dev_accuracy"] = r.dev_accuracy ? nlohmann::ordered_json(*r.dev_accuracy) : nullptr;
    epochs.push_back(e);
  }
  return j;
}

ProbeParams initial_probe(const TrainConfig& cfg, Eigen::Index dim) {
  return init_probe(dim, cfg.hidden_dim, derive_seed(cfg.rng_seed, "probe-init"));
}

TrainResult train(std::span<const LabeledVector> train_set,
                  std::span<const LabeledVector> dev_set, const TrainConfig& cfg) {
  validate(cfg);
  if (train_set.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (cfg.select_best_on_validation && dev_set.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "validation selection requires a dev set");
  }
  if (cfg.train_encoder) {
    throw Error(ErrorCode::kInvalidArgument, "train_encoder requires the toy backend");
  }
  ProbeModel model;
  model.config = cfg;
  model.probe = initial_probe(cfg, train_set.front().x.size());

  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  Rng rng(derive_seed(cfg.rng_seed, "shuffle"));
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

  auto run_epoch = [&](ProbeModel& m, int epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::vector<LabeledVector> batch;
    ProbeParams g;
    for (std::size_t start = 0, b = 0; start < order.size(); start += bs, ++b) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + bs); ++i) {
        batch.push_back(train_set[order[i]]);
      }
      const double loss = loss_and_grad(batch, m.probe, &g);
      check_loss(loss, epoch, b);
      total += loss * static_cast<double>(batch.size());
      opt.step(m.probe.tensors(), std::as_const(g).tensors());
    }
    return total / static_cast<double>(order.size());
  };
  auto dev_accuracy = [&](const ProbeModel& m) -> std::optional<double> {
    if (dev_set.empty()) return std::nullopt;
    std::size_t hit = 0;
    for (const auto& ex : dev_set) hit += predict_label(ex.x, m.probe) == ex.label;
    return static_cast<double>(hit) / static_cast<double>(dev_set.size());
  };
  return run_training(std::move(model), cfg, run_epoch, dev_accuracy);
}

std::vector<Eigen::VectorXd> features(const ProbeModel& model, const ProbeSentence& s) {
  auto out = raw_features(model.encoder ? &*model.encoder : nullptr, s);
  if (!out.empty() && out.front().size() != model.probe.dim()) {
    throw Error(ErrorCode::kDimension, "sentence " + s.sentence->sent_id + ": vectors are " +
                                           std::to_string(out.front().size()) +
                                           "-dim, model expects " +
                                           std::to_string(model.probe.dim()));
  }
  return out;
}

std::vector<ClauseLabel> predict(const ProbeModel& model, const ProbeCorpus& corpus) {
  std::vector<ClauseLabel> out;
  out.reserve(corpus.n_examples());
  for (const auto& s : corpus.sentences) {
    for (const auto& x : features(model, s)) out.push_back(predict_label(x, model.probe));
  }
  return out;
}

TrainResult train(const ProbeCorpus& train_set, const ProbeCorpus& dev_set,
                  const TrainConfig& cfg, std::optional<ToyEncoderParams> encoder) {
  validate(cfg);
  if (train_set.n_examples() == 0) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (cfg.select_best_on_validation && dev_set.n_examples() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "validation selection requires a dev set");
  }
  if (cfg.train_encoder && !encoder) {
    throw Error(ErrorCode::kInvalidArgument, "train_encoder requires the toy backend");
  }

  if (!cfg.train_encoder) {
    // Frozen vectors: featurize once and reuse the vector trainer.
    std::vector<LabeledVector> tr, dv;
    auto collect = [&](const ProbeCorpus& c, std::vector<LabeledVector>& out) {
      for (const auto& s : c.sentences) {
        auto xs = raw_features(encoder ? &*encoder : nullptr, s);
        for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({std::move(xs[i]), s.labels[i]});
      }
    };
    collect(train_set, tr);
    collect(dev_set, dv);
    TrainResult r = train(tr, dv, cfg);
    r.model.encoder = std::move(encoder);
    return r;
  }

  ProbeModel model;
  model.config = cfg;
  model.encoder = std::move(encoder);
  model.probe = initial_probe(cfg, model.encoder->config.dim);

  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  Rng rng(derive_seed(cfg.rng_seed, "shuffle"));
  std::vector<std::size_t> order(train_set.sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

  auto run_epoch = [&](ProbeModel& m, int epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::size_t seen = 0;
    std::size_t pos = 0;
    std::size_t b = 0;
    std::vector<ToyForwardCache> caches;
    std::vector<std::size_t> rows;  // example count per sentence in batch
    std::vector<LabeledVector> batch;
    std::vector<Eigen::VectorXd> dx;
    ProbeParams pg;
    while (pos < order.size()) {
      caches.clear();
      rows.clear();
      batch.clear();
      // Whole sentences until the batch holds at least batch_size examples.
      while (pos < order.size() && batch.size() < bs) {
        const ProbeSentence& s = train_set.sentences[order[pos++]];
        caches.emplace_back();
        const ToyEncoding enc = toy_encode(*s.sentence, *m.encoder, &caches.back());
        for (std::size_t i = 0; i < s.labels.size(); ++i) {
          batch.push_back({enc.vectors.row(s.predicate_indices[i] - 1).transpose(), s.labels[i]});
        }
        rows.push_back(order[pos - 1]);
      }
      const double loss = loss_and_grad(batch, m.probe, &pg, &dx);
      check_loss(loss, epoch, b++);
      total += loss * static_cast<double>(batch.size());
      seen += batch.size();

      ToyEncoderParams eg = zeros_like(*m.encoder);
      std::size_t k = 0;
      for (std::size_t si = 0; si < rows.size(); ++si) {
        const ProbeSentence& s = train_set.sentences[rows[si]];
        Eigen::MatrixXd d_vectors =
            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.sentence->tokens.size()),
                                  m.encoder->config.dim);
        for (int idx : s.predicate_indices) d_vectors.row(idx - 1) += dx[k++].transpose();
        toy_backward(caches[si], *m.encoder, d_vectors, eg);
      }
      opt.step(optimized_tensors(m, true), gradient_tensors(pg, &eg));
    }
    return total / static_cast<double>(seen);
  };
  auto dev_accuracy = [&](const ProbeModel& m) -> std::optional<double> {
    if (dev_set.n_examples() == 0) return std::nullopt;
    return accuracy_of(dev_set.gold(), predict(m, dev_set));
  };
  return run_training(std::move(model), cfg, run_epoch, dev_accuracy);
}

std::string encode_checkpoint(const ProbeModel& model) {
  nlohmann::ordered_json header;
  header["format"] = 1;
  header["dim"] = model.probe.dim();
  header["hidden_dim"] = model.probe.hidden_dim();
  header["backend"] = model.backend();
  header["seed"] = model.config.rng_seed;
  header["config"] = to_json(model.config);
  header["encoder"] = model.encoder ? to_json(model.encoder->config) : nlohmann::ordered_json();
  auto& blocks = header["blocks"] = nlohmann::ordered_json::array();
  std::vector<const Eigen::MatrixXd*> tensors;
  auto add = [&](const std::string& name, const Eigen::MatrixXd& m) {
    blocks.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    tensors.push_back(&m);
  };
  add("w1", model.probe.w1);
  add("b1", model.probe.b1);
  add("w2", model.probe.w2);
  add("b2", model.probe.b2);
  if (model.encoder) visit_tensors(*model.encoder, add);

  const std::string text = header.dump();
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const auto* m : tensors) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>((*m)(i, j))));
      }
    }
  }
  return out;
}

ProbeModel decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 12 ||
      bytes.substr(0, 8) != std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw FormatError(0, "not a checkpoint (bad magic)");
  }
  const std::uint32_t header_len = get_u32(bytes, 8);
  if (bytes.size() - 12 < header_len) throw FormatError(8, "truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(12, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(12, std::string("bad checkpoint header: ") + e.what());
  }
  ProbeModel model;
  try {
    model.config = train_config_from_json(header.at("config"), TrainConfig{});
    const auto dim = header.at("dim").get<Eigen::Index>();
    const auto hidden = header.at("hidden_dim").get<Eigen::Index>();
    model.probe = zero_probe(dim, hidden);
    if (!header.at("encoder").is_null()) {
      auto cfg = toy_config_from_json(header.at("encoder"), ToyEncoderConfig{});
      ToyEncoderParams enc;
      enc.config = cfg;
      enc.embedding.resize(cfg.vocab_hash_buckets, cfg.dim);
      enc.layers.resize(cfg.n_layers);
      model.encoder = std::move(enc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(12, std::string("bad checkpoint header: ") + e.what());
  }

  std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors = {
      {"w1", &model.probe.w1}, {"b1", &model.probe.b1}, {"w2", &model.probe.w2}, {"b2", &model.probe.b2}};
  if (model.encoder) {
    visit_tensors(*model.encoder, [&](const std::string& name, Eigen::MatrixXd& m) {
      tensors.emplace_back(name, &m);
    });
  }
  const auto& blocks = header.at("blocks");
  if (blocks.size() != tensors.size()) {
    throw FormatError(12, "checkpoint declares " + std::to_string(blocks.size()) +
                              " blocks, expected " + std::to_string(tensors.size()));
  }
  std::size_t at = 12 + header_len;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const auto& blk = blocks[t];
    const auto rows = blk.at("rows").get<Eigen::Index>();
    const auto cols = blk.at("cols").get<Eigen::Index>();
    if (blk.at("name").get<std::string>() != tensors[t].first || rows < 0 || cols < 0) {
      throw FormatError(12, "unexpected block '" + blk.at("name").get<std::string>() + "'");
    }
    Eigen::MatrixXd& m = *tensors[t].second;
    if (m.size() != 0 && (m.rows() != rows || m.cols() != cols)) {
      throw FormatError(12, "block '" + tensors[t].first + "' has wrong shape");
    }
    m.resize(rows, cols);
    const std::size_t n = static_cast<std::size_t>(rows * cols);
    if (bytes.size() - at < n * 4) throw FormatError(at, "truncated block '" + tensors[t].first + "'");
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = std::bit_cast<float>(get_u32(bytes, at));
        at += 4;
      }
    }
  }
  if (at != bytes.size()) throw FormatError(at, "trailing bytes after last block");
  return model;
}

void save_checkpoint(const ProbeModel& model, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

ProbeModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace clauseprobe
