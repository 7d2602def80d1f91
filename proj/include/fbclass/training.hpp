// SPDX-License-Identifier: Apache-2.0
/**
 * @file   training.hpp
 * @brief  Training configuration and presets, mini-batch SGD, the epoch loop
 *         with best-dev model selection, and the gradient-check harness.
 */
#ifndef FBCLASS_TRAINING_HPP
#define FBCLASS_TRAINING_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "models.hpp"

namespace fbclass {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
  Architecture architecture = Architecture::cnn;
  std::size_t max_epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double keep_prob = 0.5;
  std::uint64_t seed = 1;
  std::size_t embedding_dim = 300;
  std::size_t filters = 128;
  std::vector<std::size_t> region_sizes{3, 4, 5};
  std::size_t gru_hidden = 300;
  std::size_t gru_region_size = 3;
  std::size_t pool_stride = 2;
  std::size_t min_count = 1;
  std::size_t max_len = 0; // 0: longest training sentence
  TokenMode tokenizer = TokenMode::word;
  std::string embeddings;   // optional pre-trained vectors
  double embedding_init_scale = 0.25;

  bool operator==(const TrainConfig &) const = default;

  void validate() const {
    if (batch_size < 1)
      throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning_rate must be a finite non-negative number");
    if (!(keep_prob > 0.0 && keep_prob <= 1.0))
      throw ConfigError("keep_prob must lie in (0, 1]");
    if (max_epochs < 1)
      throw ConfigError("max_epochs must be >= 1");
    if (embedding_dim < 1 || filters < 1 || gru_hidden < 1)
      throw ConfigError("embedding_dim, filters and gru_hidden must be >= 1");
    if (region_sizes.empty())
      throw ConfigError("region_sizes must not be empty");
    for (auto h : region_sizes)
      if (h < 1)
        throw ConfigError("region sizes must be >= 1");
    if (gru_region_size < 1 || pool_stride < 1 || min_count < 1)
      throw ConfigError("gru_region_size, pool_stride and min_count must be >= 1");
    if (!(embedding_init_scale > 0.0))
      throw ConfigError("embedding_init_scale must be positive");
  }
};

/// Per-language defaults; architectures follow each language's best
/// system (CNN+GRU only for Spanish).
inline TrainConfig preset(std::string_view language) {
  TrainConfig c;
  if (language == "en" || language == "fr") {
    return c;
  }
  if (language == "es") {
    c.architecture = Architecture::cnn_gru;
    c.max_epochs = 200;
    c.gru_hidden = 300;
    return c;
  }
  if (language == "jp") {
    c.tokenizer = TokenMode::character;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(language) +
                    "' (expected en, es, fr or jp)");
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::size_t config_count(const std::string &key, const std::string &v) {
  auto n = parse_count(v);
  if (!n)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return *n;
}

inline double config_real(const std::string &key, const std::string &v) {
  auto d = parse_double(v);
  if (!d)
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return *d;
}

} // namespace detail

inline void set_config_value(TrainConfig &c, const std::string &key,
                             const std::string &value) {
  using detail::config_count;
  using detail::config_real;
  if (key == "architecture") {
    auto a = parse_architecture(value);
    if (!a)
      throw ConfigError("architecture: expected cnn or cnn_gru, got '" + value + "'");
    c.architecture = *a;
  } else if (key == "max_epochs") {
    c.max_epochs = config_count(key, value);
  } else if (key == "batch_size") {
    c.batch_size = config_count(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = config_real(key, value);
  } else if (key == "keep_prob") {
    c.keep_prob = config_real(key, value);
  } else if (key == "seed") {
    c.seed = config_count(key, value);
  } else if (key == "embedding_dim") {
    c.embedding_dim = config_count(key, value);
  } else if (key == "filters") {
    c.filters = config_count(key, value);
  } else if (key == "region_sizes") {
    c.region_sizes.clear();
    for (auto part : detail::split(value, ','))
      c.region_sizes.push_back(config_count(key, detail::trim(part)));
  } else if (key == "gru_hidden") {
    c.gru_hidden = config_count(key, value);
  } else if (key == "gru_region_size") {
    c.gru_region_size = config_count(key, value);
  } else if (key == "pool_stride") {
    c.pool_stride = config_count(key, value);
  } else if (key == "min_count") {
    c.min_count = config_count(key, value);
  } else if (key == "max_len") {
    c.max_len = config_count(key, value);
  } else if (key == "tokenizer") {
    if (value == "word")
      c.tokenizer = TokenMode::word;
    else if (value == "char")
      c.tokenizer = TokenMode::character;
    else
      throw ConfigError("tokenizer: expected word or char, got '" + value + "'");
  } else if (key == "embeddings") {
    c.embeddings = value;
  } else if (key == "embedding_init_scale") {
    c.embedding_init_scale = config_real(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Flat "key = value" lines; '#' starts a comment.
inline void apply_config_text(TrainConfig &c, std::istream &in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty())
      continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    try {
      set_config_value(c, detail::trim(std::string_view(body).substr(0, eq)),
                       detail::trim(std::string_view(body).substr(eq + 1)));
    } catch (const ConfigError &e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

/// Inverse of apply_config_text.
inline std::map<std::string, std::string> config_entries(const TrainConfig &c) {
  const auto real = shortest_repr;
  std::string regions;
  for (auto h : c.region_sizes)
    regions += (regions.empty() ? "" : ",") + std::to_string(h);
  return {
      {"architecture", std::string(architecture_name(c.architecture))},
      {"max_epochs", std::to_string(c.max_epochs)},
      {"batch_size", std::to_string(c.batch_size)},
      {"learning_rate", real(c.learning_rate)},
      {"keep_prob", real(c.keep_prob)},
      {"seed", std::to_string(c.seed)},
      {"embedding_dim", std::to_string(c.embedding_dim)},
      {"filters", std::to_string(c.filters)},
      {"region_sizes", regions},
      {"gru_hidden", std::to_string(c.gru_hidden)},
      {"gru_region_size", std::to_string(c.gru_region_size)},
      {"pool_stride", std::to_string(c.pool_stride)},
      {"min_count", std::to_string(c.min_count)},
      {"max_len", std::to_string(c.max_len)},
      {"tokenizer", c.tokenizer == TokenMode::word ? "word" : "char"},
      {"embeddings", c.embeddings},
      {"embedding_init_scale", real(c.embedding_init_scale)},
  };
}

// ---------------------------------------------------------------------------

/// theta -= lr * grad for every tensor. No decay, no clipping.
template <typename Model>
void sgd_step(Model &params, const Model &grads, double learning_rate) {
  std::vector<ParamView<const double>> g;
  visit_params(grads, "", [&](ParamView<const double> v) { g.push_back(v); });
  std::size_t i = 0;
  visit_params(params, "", [&](ParamView<double> v) {
    if (i >= g.size() || g[i].data.size() != v.data.size())
      throw ShapeError("sgd_step: gradient for '" + v.name + "' does not match");
    const auto gd = g[i++].data;
    for (std::size_t j = 0; j < v.data.size(); ++j)
      v.data[j] -= learning_rate * gd[j];
  });
  if (i != g.size())
    throw ShapeError("sgd_step: gradient has extra tensors");
}

template <typename Model> void scale_params(Model &m, double factor) {
  visit_params(m, "", [&](ParamView<double> v) {
    for (double &x : v.data)
      x *= factor;
  });
}

template <typename Model> void add_params(Model &acc, const Model &x) {
  std::vector<ParamView<const double>> src;
  visit_params(x, "", [&](ParamView<const double> v) { src.push_back(v); });
  std::size_t i = 0;
  visit_params(acc, "", [&](ParamView<double> v) {
    axpy(1.0, src[i++].data, v.data);
  });
}

struct EpochReport {
  std::size_t epoch = 0; // 1-based
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double dev_accuracy = 0.0;
  double seconds = 0.0;
};

template <typename Model> struct TrainedModel {
  Model best;
  Model final_model;
  TrainConfig config;
  std::vector<EpochReport> history;
  std::size_t best_epoch = 0;
  double best_dev_accuracy = 0.0;
};

/// Fraction of examples whose inferred label lies in its gold set.
template <Classifier Model>
double exact_accuracy(const Model &m, const std::vector<EncodedExample> &examples,
                      const std::vector<TagSet> &gold) {
  if (examples.size() != gold.size())
    throw ShapeError("exact_accuracy: examples and gold differ in length");
  if (examples.empty())
    return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (gold[i].contains(predict(infer(examples[i], m)).label))
      ++hits;
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

/// Single-label gold sets from example labels.
inline std::vector<TagSet> label_sets(const std::vector<EncodedExample> &examples) {
  std::vector<TagSet> out;
  out.reserve(examples.size());
  for (const auto &e : examples)
    out.push_back(TagSet{static_cast<Tag>(e.label)});
  return out;
}

/// Run generator for shuffling and dropout, independent of the init stream.
inline Rng training_rng(std::uint64_t seed) { return Rng(seed ^ 0x747261696e696e67ULL); }

/**
 * Mini-batch SGD. Per epoch: shuffle with the run generator, walk batches
 * (last one may be short), draw a fresh dropout mask per example, sum
 * per-example gradients in batch order, step with the batch mean, then
 * score train and dev in inference mode. The best dev model (earliest on
 * ties) and the final model are both returned; with an empty dev set the
 * final model is the best.
 */
template <Classifier Model>
TrainedModel<Model>
train(Model model, const std::vector<EncodedExample> &train_set,
      const std::vector<EncodedExample> &dev_set, const std::vector<TagSet> &dev_gold,
      const TrainConfig &config,
      const std::function<void(const EpochReport &)> &on_epoch = {}) {
  config.validate();
  if (train_set.empty())
    throw std::invalid_argument("train: empty training set");
  if (dev_set.size() != dev_gold.size())
    throw std::invalid_argument("train: dev examples and gold differ in length");

  Rng rng = training_rng(config.seed);
  TrainedModel<Model> result{model, model, config, {}, 0, -1.0};
  const auto train_gold = label_sets(train_set);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Model grads = zeros_like(model);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      grads = zeros_like(model);
      for (std::size_t i = start; i < end; ++i) {
        const auto &ex = train_set[order[i]];
        const auto mask =
            DropoutMask::sample(model.feature_dim(), model.keep_prob, Mode::train, rng);
        const auto trace = forward_trace(ex, model, mask);
        const double loss = model_backward(ex, ex.label, model, trace, grads);
        if (!std::isfinite(loss))
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index));
        loss_sum += loss;
      }
      scale_params(grads, 1.0 / static_cast<double>(end - start));
      sgd_step(model, grads, config.learning_rate);
    }

    EpochReport rep;
    rep.epoch = epoch;
    rep.mean_loss = loss_sum / static_cast<double>(train_set.size());
    rep.train_accuracy = exact_accuracy(model, train_set, train_gold);
    rep.dev_accuracy = exact_accuracy(model, dev_set, dev_gold);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                      .count();
    result.history.push_back(rep);
    if (!dev_set.empty() && rep.dev_accuracy > result.best_dev_accuracy) {
      result.best_dev_accuracy = rep.dev_accuracy;
      result.best_epoch = epoch;
      result.best = model;
    }
    if (on_epoch)
      on_epoch(rep);
  }
  result.final_model = model;
  if (dev_set.empty()) {
    result.best = model;
    result.best_epoch = config.max_epochs;
    result.best_dev_accuracy = 0.0;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Gradient checking

struct GroupError {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  std::vector<GroupError> groups;
  double threshold = 1e-4;

  bool passed() const {
    for (const auto &g : groups)
      if (!(g.max_relative_error < threshold))
        return false;
    return !groups.empty();
  }
  double worst() const {
    double w = 0.0;
    for (const auto &g : groups)
      w = std::max(w, g.max_relative_error);
    return w;
  }
};

/**
 * Compares model_backward on one example (dropout mask frozen) with the
 * central finite difference of the loss, tensor by tensor. Frozen embedding
 * rows are skipped. corrupt, when set, edits the analytic gradient first.
 */
template <Classifier Model>
GradCheckReport gradient_check(Model model, const EncodedExample &example,
                               std::size_t gold, const DropoutMask &mask,
                               double eps = 1e-4,
                               const std::function<void(Model &)> &corrupt = {}) {
  Model grads = zeros_like(model);
  model_backward(example, gold, model, forward_trace(example, model, mask), grads);
  if (corrupt)
    corrupt(grads);
  const auto analytic = [&] {
    std::vector<std::vector<double>> out;
    visit_params(std::as_const(grads), "", [&](ParamView<const double> v) {
      out.emplace_back(v.data.begin(), v.data.end());
    });
    return out;
  }();

  auto loss = [&] {
    return cross_entropy_loss(forward_trace(example, model, mask).probs, gold);
  };
  GradCheckReport report;
  std::size_t t = 0;
  visit_params(model, "", [&](ParamView<double> v) {
    const Vector numeric = finite_difference_gradient(loss, v.data, eps);
    GroupError g{v.name};
    for (std::size_t j = 0; j < v.data.size(); ++j) {
      if (!v.trainable(j))
        continue;
      ++g.checked;
      const double err = relative_error(analytic[t][j], numeric[j]);
      if (err > g.max_relative_error || g.checked == 1) {
        g.max_relative_error = err;
        g.worst_index = j;
        g.analytic = analytic[t][j];
        g.numeric = numeric[j];
      }
    }
    report.groups.push_back(g);
    ++t;
  });
  return report;
}

/// Small configuration used by the harness: k=8, 2 filters per region size
/// (3,4,5), GRU hidden 8, padded length 12, 20-token vocabulary.
struct GradCheckPreset {
  std::size_t vocab_size = 20;
  std::size_t embedding_dim = 8;
  std::size_t filters = 2;
  std::vector<std::size_t> region_sizes{3, 4, 5};
  std::size_t gru_hidden = 8;
  std::size_t gru_region_size = 3;
  std::size_t pool_stride = 2;
  std::size_t max_len = 12;
};

/// Random small instance: embeddings and inputs uniform in [-1, 1], a
/// sentence of 6..12 real tokens followed by padding, random gold label.
struct GradCheckInstance {
  AnyModel model;
  EncodedExample example;
  std::size_t gold = 0;
};

inline GradCheckInstance make_grad_check_instance(Architecture arch, std::uint64_t seed,
                                                  const GradCheckPreset &p = {}) {
  Rng rng(seed);
  auto table = EmbeddingTable::random(p.vocab_size, p.embedding_dim, 1.0, rng);
  GradCheckInstance inst;
  if (arch == Architecture::cnn) {
    CnnShape s{p.vocab_size, p.embedding_dim, p.region_sizes, p.filters, 1.0};
    auto m = make_cnn(s, std::move(table), rng);
    fill_uniform(m.output.bias.values(), 0.5, rng);
    for (auto &b : m.bank.blocks)
      fill_uniform(b.bias.values(), 0.5, rng);
    inst.model = std::move(m);
  } else {
    CnnGruShape s{p.vocab_size, p.embedding_dim, p.gru_region_size, p.filters,
                  p.pool_stride, p.gru_hidden, 1.0};
    auto m = make_cnn_gru(s, std::move(table), rng);
    fill_uniform(m.output.bias.values(), 0.5, rng);
    fill_uniform(m.conv.blocks[0].bias.values(), 0.5, rng);
    for (GruParameters *g : {&m.fwd, &m.bwd})
      for (Vector *b : {&g->b_update, &g->b_reset, &g->b_cand})
        fill_uniform(b->values(), 0.5, rng);
    inst.model = std::move(m);
  }
  const std::size_t len = 6 + static_cast<std::size_t>(rng.below(p.max_len - 5));
  inst.example.indices.assign(p.max_len, kPadIndex);
  inst.example.true_length = len;
  for (std::size_t i = 0; i < len; ++i)
    inst.example.indices[i] = 1 + static_cast<std::size_t>(rng.below(p.vocab_size - 1));
  inst.gold = static_cast<std::size_t>(rng.below(kNumTags));
  inst.example.label = inst.gold;
  return inst;
}

/**
 * Harness entry point: builds the small instance for arch and seed, freezes
 * dropout to the identity and checks every tensor. corrupt_prefix, when
 * non-empty, scales the analytic gradient of every tensor whose name starts
 * with it by 1.1 (a sensitivity self-test).
 */
inline GradCheckReport gradient_check_run(Architecture arch, std::uint64_t seed,
                                          const std::string &corrupt_prefix = "") {
  auto inst = make_grad_check_instance(arch, seed);
  return std::visit(
      [&](auto &m) {
        using M = std::decay_t<decltype(m)>;
        std::function<void(M &)> corrupt;
        if (!corrupt_prefix.empty())
          corrupt = [&](M &g) {
            visit_params(g, "", [&](ParamView<double> v) {
              if (v.name.rfind(corrupt_prefix, 0) == 0)
                for (double &x : v.data)
                  x *= 1.1;
            });
          };
        return gradient_check(m, inst.example, inst.gold,
                              DropoutMask::identity(m.feature_dim()), 1e-4, corrupt);
      },
      inst.model);
}

} // namespace fbclass

#endif // FBCLASS_TRAINING_HPP
