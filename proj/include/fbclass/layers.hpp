// SPDX-License-Identifier: Apache-2.0
/**
 * @file   layers.hpp
 * @brief  Differentiable building blocks with hand-derived backward passes:
 *         embedding lookup, convolution + ReLU, max-over-time pooling,
 *         inverted dropout, dense softmax and the GRU cell.
 *
 * Backward functions accumulate (+=) into gradient containers that have the
 * same type and shape as the parameters, so a batch gradient is the sum of
 * per-example calls.
 */
#ifndef FBCLASS_LAYERS_HPP
#define FBCLASS_LAYERS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "corpus.hpp"
#include "numerics.hpp"

namespace fbclass {

// ---------------------------------------------------------------------------
// Parameter visiting

/// A named flat view over one parameter tensor. Rows flagged 0 in
/// trainable_rows receive no gradient.
template <typename T> struct ParamView {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<T> data;
  const std::vector<std::uint8_t> *trainable_rows = nullptr;

  bool trainable(std::size_t flat_index) const {
    return trainable_rows == nullptr || (*trainable_rows)[flat_index / cols] != 0;
  }
};

template <typename M>
concept MatrixLike = std::is_same_v<std::remove_const_t<M>, Matrix>;
template <typename V>
concept VectorLike = std::is_same_v<std::remove_const_t<V>, Vector>;

template <typename T>
using param_elem_t = std::conditional_t<std::is_const_v<T>, const double, double>;

template <MatrixLike M, typename F>
void visit_params(M &m, const std::string &name, F &&f) {
  f(ParamView<param_elem_t<M>>{name, m.rows(), m.cols(), m.values()});
}

template <VectorLike V, typename F>
void visit_params(V &v, const std::string &name, F &&f) {
  f(ParamView<param_elem_t<V>>{name, 1, v.size(), v.values()});
}

/// Fresh all-zero container shaped like the argument.
template <typename P> P zeros_like(const P &p) {
  P z = p;
  visit_params(z, "", [](auto view) {
    for (auto &x : view.data)
      x = 0.0;
  });
  return z;
}

template <typename P> std::size_t parameter_count(const P &p) {
  std::size_t n = 0;
  visit_params(p, "", [&](auto view) { n += view.data.size(); });
  return n;
}

// ---------------------------------------------------------------------------
// Embedding

template <typename E, typename F>
  requires std::is_same_v<std::remove_const_t<E>, EmbeddingTable>
void visit_params(E &table, const std::string &name, F &&f) {
  f(ParamView<param_elem_t<E>>{name, table.weights.rows(), table.weights.cols(),
                               table.weights.values(), &table.trainable});
}

/// max_len x k sentence matrix; PAD rows are zero.
inline Matrix embed_sentence(const EncodedExample &example,
                             const EmbeddingTable &table) {
  Matrix s(example.indices.size(), table.dim());
  for (std::size_t i = 0; i < example.indices.size(); ++i) {
    const std::size_t idx = example.indices[i];
    if (idx >= table.rows())
      throw ShapeError("embed_sentence: index " + std::to_string(idx) +
                       " outside table of " + std::to_string(table.rows()) +
                       " rows");
    const auto src = table.weights.row(idx);
    std::copy(src.begin(), src.end(), s.row(i).begin());
  }
  return s;
}

inline void embed_backward(const EncodedExample &example, const Matrix &d_sentence,
                           EmbeddingTable &grad) {
  for (std::size_t i = 0; i < example.indices.size(); ++i) {
    const std::size_t idx = example.indices[i];
    if (!grad.trainable[idx])
      continue;
    axpy(1.0, d_sentence.row(i), grad.weights.row(idx));
  }
}

// ---------------------------------------------------------------------------
// Convolution

/// Filters of one region size. Row f of weights is filter f flattened over
/// its region x k window, matching the row-major layout of the sentence.
struct ConvBlock {
  std::size_t region = 0;
  Matrix weights; // filters x (region * k)
  Vector bias;    // filters

  std::size_t filters() const { return weights.rows(); }
};

struct ConvFilterBank {
  std::size_t dim = 0; // k
  std::vector<ConvBlock> blocks;

  std::size_t feature_count() const {
    std::size_t n = 0;
    for (const auto &b : blocks)
      n += b.filters();
    return n;
  }
  std::size_t max_region() const {
    std::size_t m = 0;
    for (const auto &b : blocks)
      m = std::max(m, b.region);
    return m;
  }

  /// Weights uniform on +-sqrt(6 / (region*k + filters)); biases zero.
  static ConvFilterBank init(const std::vector<std::size_t> &region_sizes,
                             std::size_t filters, std::size_t k, Rng &rng) {
    if (filters < 1 || k < 1 || region_sizes.empty())
      throw ShapeError("conv bank needs filters >= 1, k >= 1 and a region size");
    ConvFilterBank bank;
    bank.dim = k;
    for (std::size_t h : region_sizes) {
      if (h < 1)
        throw ShapeError("region size must be >= 1");
      const double s = std::sqrt(6.0 / static_cast<double>(h * k + filters));
      bank.blocks.push_back(
          ConvBlock{h, random_uniform_init(filters, h * k, s, rng), Vector(filters)});
    }
    return bank;
  }
};

template <typename B, typename F>
  requires std::is_same_v<std::remove_const_t<B>, ConvFilterBank>
void visit_params(B &bank, const std::string &name, F &&f) {
  for (auto &b : bank.blocks) {
    const std::string base = name + ".h" + std::to_string(b.region);
    visit_params(b.weights, base + ".weight", f);
    visit_params(b.bias, base + ".bias", f);
  }
}

/// Feature maps of one block, one row per window position.
struct ConvOutput {
  Matrix pre; // positions x filters, before ReLU
  Matrix act; // ReLU(pre)
};

inline std::vector<ConvOutput> conv_forward(const Matrix &sentence,
                                            const ConvFilterBank &bank) {
  if (sentence.cols() != bank.dim)
    throw ShapeError("conv_forward: sentence " + sentence.shape_string() +
                     " against filters of width " + std::to_string(bank.dim));
  const std::size_t n = sentence.rows();
  const std::size_t k = bank.dim;
  const auto flat = sentence.values();
  std::vector<ConvOutput> out;
  out.reserve(bank.blocks.size());
  for (const auto &b : bank.blocks) {
    if (n < b.region)
      throw ShapeError("conv_forward: sentence length " + std::to_string(n) +
                       " shorter than region " + std::to_string(b.region));
    const std::size_t positions = n - b.region + 1;
    ConvOutput o{Matrix(positions, b.filters()), Matrix(positions, b.filters())};
    for (std::size_t i = 0; i < positions; ++i) {
      const auto window = flat.subspan(i * k, b.region * k);
      for (std::size_t f = 0; f < b.filters(); ++f) {
        const double v = dot(b.weights.row(f), window) + b.bias[f];
        o.pre(i, f) = v;
        o.act(i, f) = activate(v, Activation::relu);
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

/// d_act holds the loss gradient w.r.t. each block's activations.
/// Accumulates into grad and d_sentence.
inline void conv_backward(const Matrix &sentence, const ConvFilterBank &bank,
                          const std::vector<ConvOutput> &outputs,
                          const std::vector<Matrix> &d_act, ConvFilterBank &grad,
                          Matrix &d_sentence) {
  const std::size_t k = bank.dim;
  const auto flat = sentence.values();
  auto d_flat = d_sentence.values();
  for (std::size_t bi = 0; bi < bank.blocks.size(); ++bi) {
    const auto &b = bank.blocks[bi];
    auto &g = grad.blocks[bi];
    const auto &o = outputs[bi];
    for (std::size_t i = 0; i < o.pre.rows(); ++i) {
      const auto window = flat.subspan(i * k, b.region * k);
      auto d_window = d_flat.subspan(i * k, b.region * k);
      for (std::size_t f = 0; f < b.filters(); ++f) {
        const double d_pre =
            d_act[bi](i, f) * activate_derivative(o.pre(i, f), Activation::relu);
        if (d_pre == 0.0)
          continue;
        g.bias[f] += d_pre;
        axpy(d_pre, window, g.weights.row(f));
        axpy(d_pre, b.weights.row(f), d_window);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Pooling

struct PoolResult {
  double value = 0.0;
  std::size_t index = 0;
};

/// Maximum and its first index.
inline PoolResult max_over_time(std::span<const double> c) {
  if (c.empty())
    throw ShapeError("max_over_time: empty feature map");
  PoolResult r{c[0], 0};
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] > r.value)
      r = {c[i], i};
  return r;
}

/// Max over rows for every column of a positions x filters map.
struct ColumnPool {
  Vector values;
  std::vector<std::size_t> argmax;
};

inline ColumnPool pool_columns(const Matrix &m) {
  if (m.rows() == 0)
    throw ShapeError("pool_columns: empty feature map");
  ColumnPool p{Vector(m.cols()), std::vector<std::size_t>(m.cols(), 0)};
  for (std::size_t f = 0; f < m.cols(); ++f) {
    double best = m(0, f);
    std::size_t at = 0;
    for (std::size_t i = 1; i < m.rows(); ++i)
      if (m(i, f) > best) {
        best = m(i, f);
        at = i;
      }
    p.values[f] = best;
    p.argmax[f] = at;
  }
  return p;
}

/// Non-overlapping max pool along time with the given stride; the last
/// window may be short. Output has ceil(rows / stride) rows.
struct TemporalPool {
  Matrix values;
  std::vector<std::size_t> argmax; // source row per (out_row, col), row-major
};

inline TemporalPool temporal_max_pool(const Matrix &seq, std::size_t stride) {
  if (stride < 1)
    throw ShapeError("temporal_max_pool: stride must be >= 1");
  const std::size_t out_rows = (seq.rows() + stride - 1) / stride;
  if (out_rows == 0)
    throw ShapeError("temporal_max_pool: empty sequence");
  TemporalPool p{Matrix(out_rows, seq.cols()),
                 std::vector<std::size_t>(out_rows * seq.cols())};
  for (std::size_t t = 0; t < out_rows; ++t) {
    const std::size_t lo = t * stride;
    const std::size_t hi = std::min(seq.rows(), lo + stride);
    for (std::size_t f = 0; f < seq.cols(); ++f) {
      std::size_t at = lo;
      for (std::size_t i = lo + 1; i < hi; ++i)
        if (seq(i, f) > seq(at, f))
          at = i;
      p.values(t, f) = seq(at, f);
      p.argmax[t * seq.cols() + f] = at;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Dropout

enum class Mode { train, infer };

/// Per-entry multipliers: 0 or 1/keep_prob in train mode, 1 in infer mode.
struct DropoutMask {
  double keep_prob = 1.0;
  Mode mode = Mode::infer;
  Vector scale;

  static DropoutMask identity(std::size_t n) {
    return DropoutMask{1.0, Mode::infer, Vector(n, 1.0)};
  }

  /// Infer mode and keep_prob 1 never touch rng.
  static DropoutMask sample(std::size_t n, double keep_prob, Mode mode, Rng &rng) {
    if (!(keep_prob > 0.0 && keep_prob <= 1.0))
      throw std::invalid_argument("dropout keep_prob must lie in (0, 1]");
    DropoutMask m{keep_prob, mode, Vector(n, 1.0)};
    if (mode == Mode::infer || keep_prob == 1.0)
      return m;
    for (double &s : m.scale)
      s = rng.uniform() < keep_prob ? 1.0 / keep_prob : 0.0;
    return m;
  }

  Vector apply(const Vector &v) const {
    if (v.size() != scale.size())
      throw ShapeError("dropout: mask of " + std::to_string(scale.size()) +
                       " against vector of " + std::to_string(v.size()));
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      out[i] = v[i] * scale[i];
    return out;
  }
};

inline Vector dropout_apply(const Vector &v, double keep_prob, Mode mode, Rng &rng) {
  return DropoutMask::sample(v.size(), keep_prob, mode, rng).apply(v);
}

// ---------------------------------------------------------------------------
// Dense softmax

struct DenseSoftmaxLayer {
  Matrix weights; // feature_dim x classes
  Vector bias;    // classes

  std::size_t feature_dim() const { return weights.rows(); }
  std::size_t classes() const { return weights.cols(); }

  static DenseSoftmaxLayer init(std::size_t feature_dim, std::size_t classes,
                                Rng &rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(feature_dim + classes));
    return DenseSoftmaxLayer{random_uniform_init(feature_dim, classes, s, rng),
                             Vector(classes)};
  }
};

template <typename D, typename F>
  requires std::is_same_v<std::remove_const_t<D>, DenseSoftmaxLayer>
void visit_params(D &layer, const std::string &name, F &&f) {
  visit_params(layer.weights, name + ".weight", f);
  visit_params(layer.bias, name + ".bias", f);
}

inline Vector dense_logits(const Vector &p, const DenseSoftmaxLayer &layer) {
  if (p.size() != layer.feature_dim())
    throw ShapeError("dense_softmax: features of length " + std::to_string(p.size()) +
                     " against layer " + layer.weights.shape_string());
  Vector z = vecmat(p.values(), layer.weights);
  for (std::size_t j = 0; j < z.size(); ++j)
    z[j] += layer.bias[j];
  return z;
}

inline Vector dense_softmax_forward(const Vector &p, const DenseSoftmaxLayer &layer) {
  return softmax(dense_logits(p, layer));
}

/// Cross-entropy backward through softmax: d_logits = probs - onehot(gold).
/// Returns the gradient w.r.t. the input features.
inline Vector dense_softmax_backward(const Vector &p, const Vector &probs,
                                     std::size_t gold,
                                     const DenseSoftmaxLayer &layer,
                                     DenseSoftmaxLayer &grad) {
  Vector d_logits = probs;
  d_logits[gold] -= 1.0;
  add_outer(p.values(), d_logits.values(), grad.weights);
  axpy(1.0, d_logits.values(), grad.bias.values());
  return matvec(layer.weights, d_logits.values());
}

// ---------------------------------------------------------------------------
// GRU

/// z = sigm(x Wz + h Vz + bz), r = sigm(x Wr + h Vr + br),
/// c = tanh(x W + (r . h) V + b), h' = z . h + (1 - z) . c
struct GruParameters {
  Matrix w_update, w_reset, w_cand; // input x hidden
  Matrix v_update, v_reset, v_cand; // hidden x hidden
  Vector b_update, b_reset, b_cand; // hidden

  std::size_t input_dim() const { return w_update.rows(); }
  std::size_t hidden() const { return w_update.cols(); }

  static GruParameters zeros(std::size_t input_dim, std::size_t hidden) {
    const Matrix wi(input_dim, hidden), wh(hidden, hidden);
    const Vector b(hidden);
    return GruParameters{wi, wi, wi, wh, wh, wh, b, b, b};
  }

  static GruParameters init(std::size_t input_dim, std::size_t hidden, Rng &rng) {
    auto p = zeros(input_dim, hidden);
    const double si = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
    const double sh = std::sqrt(3.0 / static_cast<double>(hidden));
    for (Matrix *m : {&p.w_update, &p.w_reset, &p.w_cand})
      fill_uniform(m->values(), si, rng);
    for (Matrix *m : {&p.v_update, &p.v_reset, &p.v_cand})
      fill_uniform(m->values(), sh, rng);
    return p;
  }
};

template <typename G, typename F>
  requires std::is_same_v<std::remove_const_t<G>, GruParameters>
void visit_params(G &p, const std::string &name, F &&f) {
  visit_params(p.w_update, name + ".w_update", f);
  visit_params(p.v_update, name + ".v_update", f);
  visit_params(p.b_update, name + ".b_update", f);
  visit_params(p.w_reset, name + ".w_reset", f);
  visit_params(p.v_reset, name + ".v_reset", f);
  visit_params(p.b_reset, name + ".b_reset", f);
  visit_params(p.w_cand, name + ".w_cand", f);
  visit_params(p.v_cand, name + ".v_cand", f);
  visit_params(p.b_cand, name + ".b_cand", f);
}

struct GruState {
  Vector h;
  Vector update; // z
  Vector reset;  // r
  Vector cand;   // candidate state
};

inline GruState gru_step(std::span<const double> x, const Vector &h_prev,
                         const GruParameters &p) {
  if (x.size() != p.input_dim() || h_prev.size() != p.hidden())
    throw ShapeError("gru_step: input " + std::to_string(x.size()) + ", state " +
                     std::to_string(h_prev.size()) + " against cell " +
                     std::to_string(p.input_dim()) + "->" + std::to_string(p.hidden()));
  const std::size_t n = p.hidden();
  Vector az = vecmat(x, p.w_update), ar = vecmat(x, p.w_reset),
         ac = vecmat(x, p.w_cand);
  const Vector hz = vecmat(h_prev.values(), p.v_update);
  const Vector hr = vecmat(h_prev.values(), p.v_reset);
  GruState s{Vector(n), Vector(n), Vector(n), Vector(n)};
  Vector rh(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.update[j] = activate(az[j] + hz[j] + p.b_update[j], Activation::sigmoid);
    s.reset[j] = activate(ar[j] + hr[j] + p.b_reset[j], Activation::sigmoid);
    rh[j] = s.reset[j] * h_prev[j];
  }
  const Vector hc = vecmat(rh.values(), p.v_cand);
  for (std::size_t j = 0; j < n; ++j) {
    s.cand[j] = std::tanh(ac[j] + hc[j] + p.b_cand[j]);
    s.h[j] = s.update[j] * h_prev[j] + (1.0 - s.update[j]) * s.cand[j];
  }
  return s;
}

/// Backward through one step given dL/dh'. Accumulates parameter gradients
/// into grad and the input gradient into d_x; returns dL/dh_prev.
inline Vector gru_step_backward(std::span<const double> x, const Vector &h_prev,
                                const GruState &s, const Vector &d_h,
                                const GruParameters &p, GruParameters &grad,
                                std::span<double> d_x) {
  const std::size_t n = p.hidden();
  Vector d_az(n), d_ar(n), d_ac(n), d_prev(n), rh(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double z = s.update[j];
    const double c = s.cand[j];
    d_prev[j] = d_h[j] * z;
    d_az[j] = d_h[j] * (h_prev[j] - c) * z * (1.0 - z);
    d_ac[j] = d_h[j] * (1.0 - z) * (1.0 - c * c);
    rh[j] = s.reset[j] * h_prev[j];
  }
  // candidate branch
  add_outer(x, d_ac.values(), grad.w_cand);
  add_outer(rh.values(), d_ac.values(), grad.v_cand);
  axpy(1.0, d_ac.values(), grad.b_cand.values());
  const Vector d_rh = matvec(p.v_cand, d_ac.values());
  for (std::size_t j = 0; j < n; ++j) {
    const double r = s.reset[j];
    d_prev[j] += d_rh[j] * r;
    d_ar[j] = d_rh[j] * h_prev[j] * r * (1.0 - r);
  }
  // gates
  add_outer(x, d_az.values(), grad.w_update);
  add_outer(h_prev.values(), d_az.values(), grad.v_update);
  axpy(1.0, d_az.values(), grad.b_update.values());
  add_outer(x, d_ar.values(), grad.w_reset);
  add_outer(h_prev.values(), d_ar.values(), grad.v_reset);
  axpy(1.0, d_ar.values(), grad.b_reset.values());

  axpy(1.0, matvec(p.w_cand, d_ac.values()).values(), d_x);
  axpy(1.0, matvec(p.w_update, d_az.values()).values(), d_x);
  axpy(1.0, matvec(p.w_reset, d_ar.values()).values(), d_x);
  axpy(1.0, matvec(p.v_update, d_az.values()).values(), d_prev.values());
  axpy(1.0, matvec(p.v_reset, d_ar.values()).values(), d_prev.values());
  return d_prev;
}

/// States of both directions. fwd[t] follows input row t; bwd[t] is the
/// backward cell's state after consuming rows T-1 down to t.
struct BiGruTrace {
  std::vector<GruState> fwd;
  std::vector<GruState> bwd;
  Vector output; // [h_T fwd, h_1 bwd]
};

inline BiGruTrace bigru_encode(const Matrix &seq, const GruParameters &fwd,
                               const GruParameters &bwd) {
  if (seq.rows() == 0)
    throw ShapeError("bigru_encode: empty sequence");
  const std::size_t T = seq.rows();
  BiGruTrace tr;
  tr.fwd.reserve(T);
  tr.bwd.resize(T);
  Vector h(fwd.hidden());
  for (std::size_t t = 0; t < T; ++t) {
    tr.fwd.push_back(gru_step(seq.row(t), h, fwd));
    h = tr.fwd.back().h;
  }
  Vector hb(bwd.hidden());
  for (std::size_t t = T; t-- > 0;) {
    tr.bwd[t] = gru_step(seq.row(t), hb, bwd);
    hb = tr.bwd[t].h;
  }
  tr.output = Vector(fwd.hidden() + bwd.hidden());
  std::copy(tr.fwd.back().h.begin(), tr.fwd.back().h.end(), tr.output.begin());
  std::copy(tr.bwd.front().h.begin(), tr.bwd.front().h.end(),
            tr.output.begin() + static_cast<std::ptrdiff_t>(fwd.hidden()));
  return tr;
}

/// Backprop through time for both directions. Accumulates into the gradient
/// containers and d_seq.
inline void bigru_backward(const Matrix &seq, const BiGruTrace &tr,
                           const Vector &d_output, const GruParameters &fwd,
                           const GruParameters &bwd, GruParameters &g_fwd,
                           GruParameters &g_bwd, Matrix &d_seq) {
  const std::size_t T = seq.rows();
  const std::size_t nf = fwd.hidden();
  const Vector zero_f(nf), zero_b(bwd.hidden());

  Vector d_h(nf);
  std::copy(d_output.begin(), d_output.begin() + static_cast<std::ptrdiff_t>(nf),
            d_h.begin());
  for (std::size_t t = T; t-- > 0;) {
    const Vector &h_prev = t == 0 ? zero_f : tr.fwd[t - 1].h;
    d_h = gru_step_backward(seq.row(t), h_prev, tr.fwd[t], d_h, fwd, g_fwd,
                            d_seq.row(t));
  }

  Vector d_hb(bwd.hidden());
  std::copy(d_output.begin() + static_cast<std::ptrdiff_t>(nf), d_output.end(),
            d_hb.begin());
  for (std::size_t t = 0; t < T; ++t) {
    const Vector &h_prev = t + 1 == T ? zero_b : tr.bwd[t + 1].h;
    d_hb = gru_step_backward(seq.row(t), h_prev, tr.bwd[t], d_hb, bwd, g_bwd,
                             d_seq.row(t));
  }
}

} // namespace fbclass

#endif // FBCLASS_LAYERS_HPP
