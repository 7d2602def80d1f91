// SPDX-License-Identifier: Apache-2.0
/**
 * @file   models.hpp
 * @brief  The two classifiers assembled from layers:
 *
 *   CnnModel:    embed -> conv (several region sizes) + ReLU -> max over time
 *                -> concat -> dropout -> dense softmax
 *   CnnGruModel: embed -> conv (one region size) + ReLU -> temporal max pool
 *                -> bidirectional GRU -> [h_T fwd, h_1 bwd] -> dropout
 *                -> dense softmax
 *
 * Each model has a forward pass that records a trace and a backward pass
 * that consumes it. A model value doubles as its own gradient container.
 */
#ifndef FBCLASS_MODELS_HPP
#define FBCLASS_MODELS_HPP

#include <cmath>
#include <string>
#include <variant>

#include "layers.hpp"

namespace fbclass {

enum class Architecture { cnn, cnn_gru };

inline std::string_view architecture_name(Architecture a) {
  return a == Architecture::cnn ? "cnn" : "cnn_gru";
}

inline std::optional<Architecture> parse_architecture(std::string_view s) {
  if (s == "cnn")
    return Architecture::cnn;
  if (s == "cnn_gru")
    return Architecture::cnn_gru;
  return std::nullopt;
}

struct Prediction {
  std::size_t label = 0;
  double confidence = 0.0;
  Vector distribution;
};

/// Argmax with lowest-index tie-break.
inline Prediction predict(const Vector &probs) {
  if (probs.size() != kNumTags)
    throw ShapeError("predict: expected " + std::to_string(kNumTags) +
                     " probabilities, got " + std::to_string(probs.size()));
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("predict: entry outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("predict: distribution sums to " +
                                std::to_string(total));
  const auto r = max_over_time(probs.values());
  return Prediction{r.index, r.value, probs};
}

/// -ln(max(p[gold], 1e-12)).
inline double cross_entropy_loss(const Vector &probs, std::size_t gold) {
  if (gold >= probs.size())
    throw std::out_of_range("cross_entropy_loss: gold label " + std::to_string(gold) +
                            " outside " + std::to_string(probs.size()) + " classes");
  return -std::log(std::max(probs[gold], 1e-12));
}

// ---------------------------------------------------------------------------
// CNN

struct CnnModel {
  EmbeddingTable embedding;
  ConvFilterBank bank;
  DenseSoftmaxLayer output;
  double keep_prob = 0.5;

  std::size_t feature_dim() const { return bank.feature_count(); }
  static constexpr Architecture architecture = Architecture::cnn;
};

template <typename M, typename F>
  requires std::is_same_v<std::remove_const_t<M>, CnnModel>
void visit_params(M &m, const std::string &, F &&f) {
  visit_params(m.embedding, "embedding", f);
  visit_params(m.bank, "conv", f);
  visit_params(m.output, "output", f);
}

struct CnnShape {
  std::size_t vocab_size = 2;
  std::size_t embedding_dim = 300;
  std::vector<std::size_t> region_sizes{3, 4, 5};
  std::size_t filters = 128;
  double keep_prob = 0.5;
};

inline CnnModel make_cnn(const CnnShape &s, EmbeddingTable embedding, Rng &rng) {
  if (embedding.dim() != s.embedding_dim || embedding.rows() != s.vocab_size)
    throw ShapeError("make_cnn: embedding table does not match shape");
  CnnModel m;
  m.embedding = std::move(embedding);
  m.bank = ConvFilterBank::init(s.region_sizes, s.filters, s.embedding_dim, rng);
  m.output = DenseSoftmaxLayer::init(m.bank.feature_count(), kNumTags, rng);
  m.keep_prob = s.keep_prob;
  return m;
}

struct CnnTrace {
  Matrix sentence;
  std::vector<ConvOutput> conv;
  std::vector<std::vector<std::size_t>> argmax; // per block, per filter
  Vector pooled;
  DropoutMask mask;
  Vector features;
  Vector probs;
};

inline CnnTrace cnn_forward_trace(const EncodedExample &example, const CnnModel &m,
                                  const DropoutMask &mask) {
  CnnTrace t;
  t.sentence = embed_sentence(example, m.embedding);
  t.conv = conv_forward(t.sentence, m.bank);
  t.pooled = Vector(m.feature_dim());
  std::size_t off = 0;
  for (const auto &o : t.conv) {
    auto p = pool_columns(o.act);
    std::copy(p.values.begin(), p.values.end(),
              t.pooled.begin() + static_cast<std::ptrdiff_t>(off));
    off += p.values.size();
    t.argmax.push_back(std::move(p.argmax));
  }
  t.mask = mask;
  t.features = mask.apply(t.pooled);
  t.probs = dense_softmax_forward(t.features, m.output);
  return t;
}

inline CnnTrace cnn_forward_trace(const EncodedExample &example, const CnnModel &m,
                                  Mode mode, Rng &rng) {
  return cnn_forward_trace(
      example, m, DropoutMask::sample(m.feature_dim(), m.keep_prob, mode, rng));
}

inline Vector cnn_forward(const EncodedExample &example, const CnnModel &m, Mode mode,
                          Rng &rng) {
  return cnn_forward_trace(example, m, mode, rng).probs;
}

/// Accumulates dL/dtheta into grad; returns the example loss.
inline double model_backward(const EncodedExample &example, std::size_t gold,
                             const CnnModel &m, const CnnTrace &t, CnnModel &grad) {
  if (t.probs.size() != kNumTags || t.conv.size() != m.bank.blocks.size())
    throw std::logic_error("model_backward: trace does not belong to this model");
  const double loss = cross_entropy_loss(t.probs, gold);
  const Vector d_features =
      dense_softmax_backward(t.features, t.probs, gold, m.output, grad.output);
  const Vector d_pooled = t.mask.apply(d_features);

  std::vector<Matrix> d_act;
  std::size_t off = 0;
  for (std::size_t b = 0; b < t.conv.size(); ++b) {
    Matrix d(t.conv[b].act.rows(), t.conv[b].act.cols());
    for (std::size_t f = 0; f < d.cols(); ++f)
      d(t.argmax[b][f], f) = d_pooled[off + f];
    off += d.cols();
    d_act.push_back(std::move(d));
  }
  Matrix d_sentence(t.sentence.rows(), t.sentence.cols());
  conv_backward(t.sentence, m.bank, t.conv, d_act, grad.bank, d_sentence);
  embed_backward(example, d_sentence, grad.embedding);
  return loss;
}

// ---------------------------------------------------------------------------
// CNN + bidirectional GRU

struct CnnGruModel {
  EmbeddingTable embedding;
  ConvFilterBank conv; // single region size
  std::size_t pool_stride = 2;
  GruParameters fwd;
  GruParameters bwd;
  DenseSoftmaxLayer output;
  double keep_prob = 0.5;

  std::size_t feature_dim() const { return fwd.hidden() + bwd.hidden(); }
  static constexpr Architecture architecture = Architecture::cnn_gru;
};

template <typename M, typename F>
  requires std::is_same_v<std::remove_const_t<M>, CnnGruModel>
void visit_params(M &m, const std::string &, F &&f) {
  visit_params(m.embedding, "embedding", f);
  visit_params(m.conv, "conv", f);
  visit_params(m.fwd, "gru.fwd", f);
  visit_params(m.bwd, "gru.bwd", f);
  visit_params(m.output, "output", f);
}

struct CnnGruShape {
  std::size_t vocab_size = 2;
  std::size_t embedding_dim = 300;
  std::size_t region_size = 3;
  std::size_t filters = 128;
  std::size_t pool_stride = 2;
  std::size_t hidden = 300;
  double keep_prob = 0.5;
};

inline CnnGruModel make_cnn_gru(const CnnGruShape &s, EmbeddingTable embedding,
                                Rng &rng) {
  if (embedding.dim() != s.embedding_dim || embedding.rows() != s.vocab_size)
    throw ShapeError("make_cnn_gru: embedding table does not match shape");
  if (s.pool_stride < 1)
    throw ShapeError("make_cnn_gru: pool stride must be >= 1");
  CnnGruModel m;
  m.embedding = std::move(embedding);
  m.conv = ConvFilterBank::init({s.region_size}, s.filters, s.embedding_dim, rng);
  m.pool_stride = s.pool_stride;
  m.fwd = GruParameters::init(s.filters, s.hidden, rng);
  m.bwd = GruParameters::init(s.filters, s.hidden, rng);
  m.output = DenseSoftmaxLayer::init(2 * s.hidden, kNumTags, rng);
  m.keep_prob = s.keep_prob;
  return m;
}

/// Length of the GRU input sequence for a padded sentence of length n.
inline std::size_t cnn_gru_sequence_length(std::size_t n, std::size_t region,
                                           std::size_t stride) {
  if (n < region)
    return 0;
  return (n - region + 1 + stride - 1) / stride;
}

struct CnnGruTrace {
  Matrix sentence;
  std::vector<ConvOutput> conv;
  TemporalPool pooled;
  BiGruTrace gru;
  DropoutMask mask;
  Vector features;
  Vector probs;
};

inline CnnGruTrace cnn_gru_forward_trace(const EncodedExample &example,
                                         const CnnGruModel &m,
                                         const DropoutMask &mask) {
  const std::size_t region = m.conv.blocks.at(0).region;
  if (cnn_gru_sequence_length(example.indices.size(), region, m.pool_stride) == 0)
    throw ShapeError("cnn_gru_forward: padded length " +
                     std::to_string(example.indices.size()) +
                     " leaves no sequence after region " + std::to_string(region) +
                     " and stride " + std::to_string(m.pool_stride));
  CnnGruTrace t;
  t.sentence = embed_sentence(example, m.embedding);
  t.conv = conv_forward(t.sentence, m.conv);
  t.pooled = temporal_max_pool(t.conv[0].act, m.pool_stride);
  t.gru = bigru_encode(t.pooled.values, m.fwd, m.bwd);
  t.mask = mask;
  t.features = mask.apply(t.gru.output);
  t.probs = dense_softmax_forward(t.features, m.output);
  return t;
}

inline CnnGruTrace cnn_gru_forward_trace(const EncodedExample &example,
                                         const CnnGruModel &m, Mode mode, Rng &rng) {
  return cnn_gru_forward_trace(
      example, m, DropoutMask::sample(m.feature_dim(), m.keep_prob, mode, rng));
}

inline Vector cnn_gru_forward(const EncodedExample &example, const CnnGruModel &m,
                              Mode mode, Rng &rng) {
  return cnn_gru_forward_trace(example, m, mode, rng).probs;
}

inline double model_backward(const EncodedExample &example, std::size_t gold,
                             const CnnGruModel &m, const CnnGruTrace &t,
                             CnnGruModel &grad) {
  if (t.probs.size() != kNumTags || t.conv.size() != 1)
    throw std::logic_error("model_backward: trace does not belong to this model");
  const double loss = cross_entropy_loss(t.probs, gold);
  const Vector d_features =
      dense_softmax_backward(t.features, t.probs, gold, m.output, grad.output);
  const Vector d_out = t.mask.apply(d_features);

  Matrix d_pooled(t.pooled.values.rows(), t.pooled.values.cols());
  bigru_backward(t.pooled.values, t.gru, d_out, m.fwd, m.bwd, grad.fwd, grad.bwd,
                 d_pooled);

  std::vector<Matrix> d_act{Matrix(t.conv[0].act.rows(), t.conv[0].act.cols())};
  const std::size_t cols = d_pooled.cols();
  for (std::size_t r = 0; r < d_pooled.rows(); ++r)
    for (std::size_t f = 0; f < cols; ++f)
      d_act[0](t.pooled.argmax[r * cols + f], f) += d_pooled(r, f);

  Matrix d_sentence(t.sentence.rows(), t.sentence.cols());
  conv_backward(t.sentence, m.conv, t.conv, d_act, grad.conv, d_sentence);
  embed_backward(example, d_sentence, grad.embedding);
  return loss;
}

// ---------------------------------------------------------------------------
// Uniform entry points used by the training loop.

inline CnnTrace forward_trace(const EncodedExample &e, const CnnModel &m,
                              const DropoutMask &mask) {
  return cnn_forward_trace(e, m, mask);
}
inline CnnGruTrace forward_trace(const EncodedExample &e, const CnnGruModel &m,
                                 const DropoutMask &mask) {
  return cnn_gru_forward_trace(e, m, mask);
}

template <typename Model>
Vector forward(const EncodedExample &e, const Model &m, Mode mode, Rng &rng) {
  return forward_trace(e, m, DropoutMask::sample(m.feature_dim(), m.keep_prob, mode, rng))
      .probs;
}

/// Inference never draws from a generator.
template <typename Model> Vector infer(const EncodedExample &e, const Model &m) {
  return forward_trace(e, m, DropoutMask::identity(m.feature_dim())).probs;
}

using AnyModel = std::variant<CnnModel, CnnGruModel>;

template <typename Model>
concept Classifier = requires(const Model &m, Model &g, const EncodedExample &e,
                              const DropoutMask &d) {
  { m.feature_dim() } -> std::convertible_to<std::size_t>;
  { m.keep_prob } -> std::convertible_to<double>;
  forward_trace(e, m, d);
  { model_backward(e, std::size_t{}, m, forward_trace(e, m, d), g) } -> std::same_as<double>;
};

} // namespace fbclass

#endif // FBCLASS_MODELS_HPP
