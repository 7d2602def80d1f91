// SPDX-License-Identifier: Apache-2.0
/**
 * @file   pipeline.hpp
 * @brief  Dataset-to-model glue: label expansion, vocabulary, padding length,
 *         training and test-set scoring.
 */
#ifndef FBCLASS_PIPELINE_HPP
#define FBCLASS_PIPELINE_HPP

#include "evaluation.hpp"
#include "model_store.hpp"

namespace fbclass {

/// Smallest padded length the architecture can consume.
inline std::size_t min_padded_length(const TrainConfig &c) {
  if (c.architecture == Architecture::cnn)
    return *std::max_element(c.region_sizes.begin(), c.region_sizes.end());
  return c.gru_region_size;
}

using AnyTrained = std::variant<TrainedModel<CnnModel>, TrainedModel<CnnGruModel>>;

struct TrainOutcome {
  Vocabulary vocab;
  std::size_t max_len = 1;
  AnyTrained trained;
};

/**
 * Builds the vocabulary from the training texts, expands multi-label
 * training records into single-label copies (dev is left as is), fixes the
 * padded length (config value, else the longest training sentence, raised to
 * the architecture minimum) and trains.
 */
inline TrainOutcome train_on_splits(const TrainConfig &config, const DatasetSplit &train_split,
                                    const DatasetSplit &dev_split,
                                    const std::function<void(const EpochReport &)> &on_epoch = {}) {
  config.validate();
  if (train_split.records.empty())
    throw DataError("training split is empty");
  const std::size_t floor_len = min_padded_length(config);
  std::size_t max_len = config.max_len;
  if (max_len == 0)
    max_len = std::max(floor_len, max_token_length(train_split.records, config.tokenizer));
  else if (max_len < floor_len)
    throw ConfigError("max_len " + std::to_string(max_len) +
                      " is below the minimum " + std::to_string(floor_len) +
                      " for this architecture");

  Vocabulary vocab = build_vocabulary(train_split.records, config.min_count, config.tokenizer);
  const auto expanded = expand_multilabel(train_split.records);
  const auto train_set = encode_records(expanded, vocab, max_len, config.tokenizer);
  const auto dev_set = encode_records(dev_split.records, vocab, max_len, config.tokenizer);
  std::vector<TagSet> dev_gold;
  for (const auto &r : dev_split.records)
    dev_gold.push_back(r.tags);

  AnyModel init = initial_model(config, vocab);
  TrainOutcome out{std::move(vocab), max_len, TrainedModel<CnnModel>{}};
  std::visit(
      [&](auto &m) { out.trained = train(std::move(m), train_set, dev_set, dev_gold, config, on_epoch); },
      init);
  return out;
}

/// Inference-mode predictions for every record of a split.
template <Classifier Model>
std::vector<Prediction> predict_split(const Model &m, const DatasetSplit &split,
                                      const Vocabulary &vocab, std::size_t max_len,
                                      TokenMode mode) {
  std::vector<Prediction> out;
  out.reserve(split.records.size());
  for (const auto &r : split.records)
    out.push_back(predict(infer(pad_encode(tokenize(r.text, mode), vocab, max_len), m)));
  return out;
}

inline std::vector<TagSet> gold_sets(const DatasetSplit &split) {
  std::vector<TagSet> g;
  g.reserve(split.records.size());
  for (const auto &r : split.records)
    g.push_back(r.tags);
  return g;
}

inline EvalReport evaluate_bundle(const ModelBundle &b, const DatasetSplit &test) {
  const auto preds = std::visit(
      [&](const auto &m) {
        return predict_split(m, test, b.vocab, b.max_len, b.config.tokenizer);
      },
      b.model);
  return score(preds, gold_sets(test));
}

} // namespace fbclass

#endif // FBCLASS_PIPELINE_HPP
