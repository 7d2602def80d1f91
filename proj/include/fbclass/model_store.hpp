// SPDX-License-Identifier: Apache-2.0
/**
 * @file   model_store.hpp
 * @brief  Trained-model directory: manifest.json, vocab.txt, best.ckpt,
 *         final.ckpt, history.jsonl and timings.jsonl.
 *
 * Everything except timings.jsonl is a pure function of data and config.
 */
#ifndef FBCLASS_MODEL_STORE_HPP
#define FBCLASS_MODEL_STORE_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "checkpoint.hpp"
#include "training.hpp"

namespace fbclass {

inline constexpr int kManifestVersion = 1;

/// Model directory does not match its manifest's vocabulary.
class VocabularyMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ModelBundle {
  AnyModel model;
  Vocabulary vocab;
  TrainConfig config;
  std::size_t max_len = 1;

  Vector infer_text(const std::string &text) const {
    const auto ex = pad_encode(tokenize(text, config.tokenizer), vocab, max_len);
    return std::visit([&](const auto &m) { return infer(ex, m); }, model);
  }
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shapes from config, weights zero. Used before loading a checkpoint.
inline AnyModel shaped_model(const TrainConfig &c, std::size_t vocab_size) {
  Rng rng(0);
  auto table = EmbeddingTable::zeros(vocab_size, c.embedding_dim);
  if (c.architecture == Architecture::cnn)
    return make_cnn(CnnShape{vocab_size, c.embedding_dim, c.region_sizes, c.filters,
                             c.keep_prob},
                    std::move(table), rng);
  return make_cnn_gru(CnnGruShape{vocab_size, c.embedding_dim, c.gru_region_size,
                                  c.filters, c.pool_stride, c.gru_hidden, c.keep_prob},
                      std::move(table), rng);
}

/// Fresh randomly initialised model; init draws come from Rng(config.seed).
inline AnyModel initial_model(const TrainConfig &c, const Vocabulary &vocab) {
  Rng rng(c.seed);
  EmbeddingTable table =
      c.embeddings.empty()
          ? EmbeddingTable::random(vocab.size(), c.embedding_dim,
                                   c.embedding_init_scale, rng)
          : load_embeddings(c.embeddings, vocab, c.embedding_dim, rng);
  if (c.architecture == Architecture::cnn)
    return make_cnn(CnnShape{vocab.size(), c.embedding_dim, c.region_sizes, c.filters,
                             c.keep_prob},
                    std::move(table), rng);
  return make_cnn_gru(CnnGruShape{vocab.size(), c.embedding_dim, c.gru_region_size,
                                  c.filters, c.pool_stride, c.gru_hidden, c.keep_prob},
                      std::move(table), rng);
}

inline nlohmann::json epoch_json(const EpochReport &r) {
  return nlohmann::json{{"epoch", r.epoch},
                        {"mean_loss", r.mean_loss},
                        {"train_accuracy", r.train_accuracy},
                        {"dev_accuracy", r.dev_accuracy}};
}

namespace detail {

inline void write_text_file(const std::filesystem::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text))
    throw DataError("cannot write '" + p.string() + "'");
}

} // namespace detail

template <typename Model>
void save_model_dir(const std::filesystem::path &dir, const TrainedModel<Model> &tm,
                    const Vocabulary &vocab, std::size_t max_len) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw DataError("cannot create '" + dir.string() + "': " + ec.message());

  std::string vocab_text;
  for (const auto &t : vocab.tokens())
    vocab_text += t + "\n";
  detail::write_text_file(dir / "vocab.txt", vocab_text);

  save_checkpoint((dir / "best.ckpt").string(), tm.best);
  save_checkpoint((dir / "final.ckpt").string(), tm.final_model);

  std::string history, timings;
  for (const auto &r : tm.history) {
    history += epoch_json(r).dump() + "\n";
    timings += nlohmann::json{{"epoch", r.epoch}, {"seconds", r.seconds}}.dump() + "\n";
  }
  detail::write_text_file(dir / "history.jsonl", history);
  detail::write_text_file(dir / "timings.jsonl", timings);

  nlohmann::json config = nlohmann::json::object();
  for (const auto &[k, v] : config_entries(tm.config))
    config[k] = v;
  nlohmann::json tags = nlohmann::json::array();
  for (auto t : kTagNames)
    tags.push_back(std::string(t));
  nlohmann::json manifest = {
      {"format_version", kManifestVersion},
      {"architecture", std::string(architecture_name(Model::architecture))},
      {"config", config},
      {"max_len", max_len},
      {"vocab_file", "vocab.txt"},
      {"vocab_size", vocab.size()},
      {"vocab_hash", hex64(vocab.hash())},
      {"tags", tags},
      {"best_checkpoint", "best.ckpt"},
      {"final_checkpoint", "final.ckpt"},
      {"best_epoch", tm.best_epoch},
      {"best_dev_accuracy", tm.best_dev_accuracy},
      {"history_file", "history.jsonl"},
  };
  detail::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

/**
 * Loads manifest, vocabulary and one checkpoint (best by default).
 * Throws VocabularyMismatch when vocab.txt does not hash to the manifest's
 * value, CheckpointError / DataError for unreadable or corrupt files.
 */
inline ModelBundle load_model_dir(const std::filesystem::path &dir,
                                  const std::string &which = "best_checkpoint") {
  std::ifstream mf(dir / "manifest.json");
  if (!mf)
    throw DataError("cannot read '" + (dir / "manifest.json").string() + "'");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }

  ModelBundle b;
  try {
    if (manifest.at("format_version").get<int>() != kManifestVersion)
      throw DataError("unsupported manifest version");
    for (const auto &[k, v] : manifest.at("config").items())
      set_config_value(b.config, k, v.get<std::string>());
    b.max_len = manifest.at("max_len").get<std::size_t>();
    const auto arch = manifest.at("architecture").get<std::string>();
    if (arch != architecture_name(b.config.architecture))
      throw DataError("manifest architecture disagrees with its config");
    const auto tags = manifest.at("tags").get<std::vector<std::string>>();
    if (tags.size() != kNumTags || !std::equal(tags.begin(), tags.end(), kTagNames.begin()))
      throw DataError("manifest tag order differs from the canonical order");

    std::ifstream vf(dir / manifest.at("vocab_file").get<std::string>());
    if (!vf)
      throw DataError("cannot read vocabulary file");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(vf, line))
      tokens.push_back(line);
    b.vocab = Vocabulary::from_tokens(tokens);
    if (hex64(b.vocab.hash()) != manifest.at("vocab_hash").get<std::string>() ||
        b.vocab.size() != manifest.at("vocab_size").get<std::size_t>())
      throw VocabularyMismatch("vocabulary does not match the manifest hash");

    b.model = shaped_model(b.config, b.vocab.size());
    const auto ckpt = (dir / manifest.at(which).get<std::string>()).string();
    std::visit([&](auto &m) { load_checkpoint(ckpt, m); }, b.model);
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError &e) {
    throw DataError(std::string("manifest config: ") + e.what());
  }
  return b;
}

} // namespace fbclass

#endif // FBCLASS_MODEL_STORE_HPP
