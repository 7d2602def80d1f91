// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include <gtest/gtest.h>

#include <fbclass/pipeline.hpp>

using namespace fbclass;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.embedding_dim = 8;
  c.filters = 4;
  c.gru_hidden = 6;
  c.max_epochs = 4;
  c.batch_size = 8;
  return c;
}

/// All 24 sentences of a 4-per-class synthetic corpus.
DatasetSplit overfit_split(std::uint64_t seed) {
  const auto c = generate_synthetic(seed, 4, 2);
  DatasetSplit all{SplitRole::train, c.train.records};
  all.records.insert(all.records.end(), c.dev.records.begin(), c.dev.records.end());
  all.records.insert(all.records.end(), c.test.records.begin(), c.test.records.end());
  return all;
}

std::vector<double> losses(const AnyTrained &t) {
  return std::visit(
      [](const auto &tm) {
        std::vector<double> out;
        for (const auto &r : tm.history)
          out.push_back(r.mean_loss);
        return out;
      },
      t);
}

} // namespace

TEST(Sgd, Examples) {
  Vector theta{1.0, -3.0}, g{2.0, 0.0};
  sgd_step(theta, g, 0.1);
  EXPECT_DOUBLE_EQ(theta[0], 0.8);
  EXPECT_EQ(theta[1], -3.0);
  const Vector before = theta;
  sgd_step(theta, Vector{5.0, 5.0}, 0.0);
  EXPECT_EQ(theta, before);
  sgd_step(theta, Vector(2), 0.3);
  EXPECT_EQ(theta, before);
  EXPECT_THROW(sgd_step(theta, Vector(3), 0.1), ShapeError);
}

TEST(Sgd, ModelStepTouchesEveryParameter) {
  Rng rng(1);
  auto m = make_cnn(CnnShape{10, 4, {2, 3}, 2, 0.5}, EmbeddingTable::random(10, 4, 1.0, rng), rng);
  auto ones = zeros_like(m);
  visit_params(ones, "", [](ParamView<double> v) {
    for (double &x : v.data)
      x = 1.0;
  });
  const auto before = m;
  sgd_step(m, ones, 0.5);
  std::vector<double> a, b;
  visit_params(before, "", [&](ParamView<const double> v) { a.insert(a.end(), v.data.begin(), v.data.end()); });
  visit_params(std::as_const(m), "", [&](ParamView<const double> v) { b.insert(b.end(), v.data.begin(), v.data.end()); });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_DOUBLE_EQ(b[i], a[i] - 0.5);
}

TEST(Config, PublishedDefaults) {
  const TrainConfig c;
  EXPECT_EQ(c.embedding_dim, 300u);
  EXPECT_EQ(c.filters, 128u);
  EXPECT_EQ(c.region_sizes, (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_EQ(c.keep_prob, 0.5);
  EXPECT_EQ(c.batch_size, 64u);
  EXPECT_EQ(c.max_epochs, 100u);
  EXPECT_EQ(c.gru_hidden, 300u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, Presets) {
  EXPECT_EQ(preset("en").architecture, Architecture::cnn);
  EXPECT_EQ(preset("fr").architecture, Architecture::cnn);
  const auto es = preset("es");
  EXPECT_EQ(es.architecture, Architecture::cnn_gru);
  EXPECT_EQ(es.max_epochs, 200u);
  EXPECT_EQ(es.gru_hidden, 300u);
  EXPECT_EQ(preset("jp").tokenizer, TokenMode::character);
  EXPECT_THROW(preset("de"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  TrainConfig c;
  std::istringstream in("# desk run\n"
                        "architecture = cnn_gru\n"
                        "learning_rate = 0.025   # halved\n"
                        "region_sizes = 2, 3\n"
                        "tokenizer = char\n"
                        "\n"
                        "seed=42\n");
  apply_config_text(c, in);
  EXPECT_EQ(c.architecture, Architecture::cnn_gru);
  EXPECT_EQ(c.learning_rate, 0.025);
  EXPECT_EQ(c.region_sizes, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(c.tokenizer, TokenMode::character);
  EXPECT_EQ(c.seed, 42u);

  std::string text;
  for (const auto &[k, v] : config_entries(c))
    text += k + " = " + v + "\n";
  TrainConfig back;
  std::istringstream again(text);
  apply_config_text(back, again);
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_entries(TrainConfig{}).at("learning_rate"), "0.05");
}

TEST(Config, ErrorsNameTheLine) {
  TrainConfig c;
  std::istringstream unknown("seed = 1\nfilter_count = 3\n");
  try {
    apply_config_text(c, unknown);
    FAIL();
  } catch (const ConfigError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("filter_count"), std::string::npos);
  }
  std::istringstream bad_value("batch_size = many\n");
  EXPECT_THROW(apply_config_text(c, bad_value), ConfigError);
  std::istringstream no_eq("batch_size\n");
  EXPECT_THROW(apply_config_text(c, no_eq), ConfigError);
  TrainConfig k;
  k.keep_prob = 0.0;
  EXPECT_THROW(k.validate(), ConfigError);
  k = TrainConfig{};
  k.batch_size = 0;
  EXPECT_THROW(k.validate(), ConfigError);
}

TEST(Train, RejectsEmptyTrainingSet) {
  Rng rng(1);
  auto m = make_cnn(CnnShape{10, 4, {2}, 2, 0.5}, EmbeddingTable::random(10, 4, 1.0, rng), rng);
  EXPECT_THROW(train(m, {}, {}, {}, small_config()), std::invalid_argument);
  EXPECT_THROW(train_on_splits(small_config(), DatasetSplit{SplitRole::train, {}},
                               DatasetSplit{SplitRole::dev, {}}),
               DataError);
}

TEST(Train, DeterministicForFixedSeed) {
  const auto corpus = generate_synthetic(5, 10, 3);
  for (auto arch : {Architecture::cnn, Architecture::cnn_gru}) {
    auto c = small_config();
    c.architecture = arch;
    const auto a = train_on_splits(c, corpus.train, corpus.dev);
    const auto b = train_on_splits(c, corpus.train, corpus.dev);
    const auto la = losses(a.trained), lb = losses(b.trained);
    ASSERT_EQ(la.size(), 4u);
    for (std::size_t i = 0; i < la.size(); ++i)
      EXPECT_EQ(std::bit_cast<std::uint64_t>(la[i]), std::bit_cast<std::uint64_t>(lb[i]));
    std::stringstream ca, cb;
    std::visit([&](const auto &tm) { save_checkpoint(ca, tm.best); }, a.trained);
    std::visit([&](const auto &tm) { save_checkpoint(cb, tm.best); }, b.trained);
    EXPECT_EQ(ca.str(), cb.str());

    c.seed = 2;
    EXPECT_NE(losses(train_on_splits(c, corpus.train, corpus.dev).trained), la);
  }
}

TEST(Train, ZeroLearningRateFreezesModel) {
  const auto corpus = generate_synthetic(6, 10, 3);
  auto c = small_config();
  c.learning_rate = 0.0;
  const auto out = train_on_splits(c, corpus.train, corpus.dev);
  const auto &tm = std::get<TrainedModel<CnnModel>>(out.trained);
  for (const auto &r : tm.history) {
    EXPECT_EQ(r.dev_accuracy, tm.history.front().dev_accuracy);
    EXPECT_EQ(r.train_accuracy, tm.history.front().train_accuracy);
  }
  const auto init = std::get<CnnModel>(initial_model(c, out.vocab));
  std::stringstream a, b;
  save_checkpoint(a, init);
  save_checkpoint(b, tm.final_model);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Train, ShapesAndPadRowAreStable) {
  const auto corpus = generate_synthetic(7, 10, 3);
  for (auto arch : {Architecture::cnn, Architecture::cnn_gru}) {
    auto c = small_config();
    c.architecture = arch;
    const auto out = train_on_splits(c, corpus.train, corpus.dev);
    const auto init = initial_model(c, out.vocab);
    std::visit(
        [&](const auto &tm) {
          using M = std::decay_t<decltype(tm.best)>;
          EXPECT_EQ(parameter_count(tm.final_model), parameter_count(std::get<M>(init)));
          EXPECT_EQ(parameter_count(tm.best), parameter_count(std::get<M>(init)));
          for (double x : tm.final_model.embedding.weights.row(kPadIndex))
            EXPECT_EQ(x, 0.0);
          EXPECT_GE(tm.best_epoch, 1u);
          EXPECT_LE(tm.best_epoch, c.max_epochs);
          EXPECT_EQ(tm.history.at(tm.best_epoch - 1).dev_accuracy, tm.best_dev_accuracy);
        },
        out.trained);
  }
}

TEST(Train, EmptyDevKeepsFinalModel) {
  const auto corpus = generate_synthetic(8, 6, 2);
  const auto out = train_on_splits(small_config(), corpus.train, DatasetSplit{SplitRole::dev, {}});
  const auto &tm = std::get<TrainedModel<CnnModel>>(out.trained);
  EXPECT_EQ(tm.best_epoch, tm.config.max_epochs);
  std::stringstream a, b;
  save_checkpoint(a, tm.best);
  save_checkpoint(b, tm.final_model);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Train, MaxLenBelowArchitectureMinimumRejected) {
  const auto corpus = generate_synthetic(8, 6, 2);
  auto c = small_config();
  c.max_len = 4; // largest region is 5
  EXPECT_THROW(train_on_splits(c, corpus.train, corpus.dev), ConfigError);
}

TEST(Train, DivergenceAbortsWithDiagnostics) {
  const auto corpus = generate_synthetic(9, 10, 3);
  auto c = small_config();
  c.learning_rate = 1e300;
  c.keep_prob = 1.0;
  try {
    train_on_splits(c, corpus.train, corpus.dev);
    FAIL() << "expected divergence";
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Train, OverfitsTwentyFourExamples) {
  const auto split = overfit_split(11);
  ASSERT_EQ(split.size(), 24u);
  auto c = small_config();
  c.embedding_dim = 16;
  c.max_epochs = 300;
  c.batch_size = 4;
  std::size_t reached = 0;
  std::vector<double> loss;
  const auto out = train_on_splits(c, split, DatasetSplit{SplitRole::dev, {}},
                                   [&](const EpochReport &r) {
                                     loss.push_back(r.mean_loss);
                                     if (!reached && r.train_accuracy == 1.0)
                                       reached = r.epoch;
                                   });
  EXPECT_GT(reached, 0u) << "training accuracy never reached 1.0";
  // Loss trend: 25-epoch window means decrease over the first 150 epochs.
  auto window = [&](std::size_t at) {
    double s = 0.0;
    for (std::size_t i = at; i < at + 25; ++i)
      s += loss[i];
    return s / 25.0;
  };
  for (std::size_t w = 25; w < 150; w += 25)
    EXPECT_LT(window(w), window(w - 25)) << "window starting at epoch " << w;
}

TEST(GradCheck, BothArchitecturesPass) {
  for (auto arch : {Architecture::cnn, Architecture::cnn_gru}) {
    const auto r = gradient_check_run(arch, 1);
    EXPECT_TRUE(r.passed()) << architecture_name(arch) << " worst " << r.worst();
    EXPECT_LT(r.worst(), 1e-6);
  }
}

TEST(GradCheck, CorruptedConvGradientIsFlagged) {
  const auto r = gradient_check_run(Architecture::cnn, 1, "conv");
  EXPECT_FALSE(r.passed());
  for (const auto &g : r.groups) {
    if (g.name.rfind("conv", 0) == 0)
      EXPECT_GT(g.max_relative_error, 0.05) << g.name;
    else
      EXPECT_LT(g.max_relative_error, 1e-4) << g.name;
  }
}
