// SPDX-License-Identifier: Apache-2.0
/**
 * @file   cli.hpp
 * @brief  Command-line front end: train, evaluate, predict, gen-data and
 *         grad-check.
 *
 * Exit codes: 0 success, 1 data / file errors, 2 configuration or usage
 * errors (including vocabulary mismatch), 3 numerical divergence or a failed
 * gradient check.
 */
#ifndef FBCLASS_CLI_HPP
#define FBCLASS_CLI_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"

namespace fbclass::cli {

enum ExitCode : int { kOk = 0, kDataError = 1, kConfigError = 2, kNumericError = 3 };

struct TrainArgs {
  std::string config_path, train_path, dev_path, out_dir, preset;
  std::optional<std::uint64_t> seed;
  std::string architecture;
  std::vector<std::string> overrides; // key=value
};

/// Built-in defaults < preset < config file < flags.
inline TrainConfig resolve_config(const TrainArgs &a) {
  TrainConfig c = a.preset.empty() ? TrainConfig{} : preset(a.preset);
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in)
      throw ConfigError("cannot read config '" + a.config_path + "'");
    apply_config_text(c, in);
  }
  for (const auto &kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed)
    c.seed = *a.seed;
  if (!a.architecture.empty())
    set_config_value(c, "architecture", a.architecture);
  c.validate();
  return c;
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string prediction_line(const Prediction &p) {
  std::string line(tag_name(p.label));
  line += '\t' + fixed6(p.confidence) + '\t';
  for (std::size_t i = 0; i < p.distribution.size(); ++i)
    line += (i ? "," : "") + fixed6(p.distribution[i]);
  return line;
}

} // namespace detail

inline int run_train(const TrainArgs &a, std::ostream &out, std::ostream &err) {
  TrainConfig config;
  try {
    config = resolve_config(a);
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const auto train_split = load_tsv(a.train_path, SplitRole::train);
    const auto dev_split = load_tsv(a.dev_path, SplitRole::dev);
    auto outcome = train_on_splits(config, train_split, dev_split, [&](const EpochReport &r) {
      char line[160];
      std::snprintf(line, sizeof line,
                    "epoch %4zu  loss %.6f  train_acc %.4f  dev_acc %.4f  (%.2fs)\n",
                    r.epoch, r.mean_loss, r.train_accuracy, r.dev_accuracy, r.seconds);
      out << line << std::flush;
    });
    std::visit(
        [&](const auto &tm) {
          save_model_dir(a.out_dir, tm, outcome.vocab, outcome.max_len);
          out << "best epoch " << tm.best_epoch << ", dev accuracy "
              << detail::fixed6(tm.best_dev_accuracy) << "; model written to " << a.out_dir
              << "\n";
        },
        outcome.trained);
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericError &e) {
    err << "numerical divergence: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

inline int run_evaluate(const std::string &model_dir, const std::string &test_path,
                        const std::string &report_path, std::ostream &out,
                        std::ostream &err) {
  try {
    const auto bundle = load_model_dir(model_dir);
    const auto test = load_tsv(test_path, SplitRole::test);
    const auto report = evaluate_bundle(bundle, test);
    out << format_report_text(report);
    if (!report_path.empty()) {
      std::ofstream rf(report_path, std::ios::binary);
      if (!rf || !(rf << format_report_record(report)))
        throw DataError("cannot write report '" + report_path + "'");
    }
  } catch (const VocabularyMismatch &e) {
    err << "vocabulary mismatch: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

inline int run_predict(const std::string &model_dir, const std::optional<std::string> &text,
                       const std::string &file, std::ostream &out, std::ostream &err) {
  try {
    std::vector<std::string> lines;
    if (text) {
      if (!text->empty())
        lines.push_back(*text);
    } else {
      std::ifstream in(file, std::ios::binary);
      if (!in)
        throw DataError("cannot read '" + file + "'");
      std::string line;
      while (std::getline(in, line))
        lines.emplace_back(fbclass::detail::chomp(line));
    }
    if (lines.empty())
      return kOk;
    const auto bundle = load_model_dir(model_dir);
    for (const auto &l : lines)
      out << detail::prediction_line(predict(bundle.infer_text(l))) << "\n";
  } catch (const VocabularyMismatch &e) {
    err << "vocabulary mismatch: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

inline int run_gen_data(std::uint64_t seed, std::size_t per_class, std::size_t noise,
                        const std::string &out_dir, std::ostream &out, std::ostream &err) {
  try {
    if (per_class < 1)
      throw ConfigError("--per-class must be >= 1");
    const auto corpus = generate_synthetic(seed, per_class, noise);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
      throw DataError("cannot create '" + out_dir + "': " + ec.message());
    for (const DatasetSplit *s : {&corpus.train, &corpus.dev, &corpus.test}) {
      const auto path = std::filesystem::path(out_dir) / (std::string(role_name(s->role)) + ".tsv");
      std::ofstream f(path, std::ios::binary);
      if (!f)
        throw DataError("cannot write '" + path.string() + "'");
      write_tsv(f, *s);
      if (!f)
        throw DataError("failed writing '" + path.string() + "'");
      out << path.string() << ": " << s->size() << " records\n";
    }
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

inline int run_grad_check(const std::string &architecture, std::uint64_t seed,
                          const std::string &corrupt, std::ostream &out, std::ostream &err) {
  const auto arch = parse_architecture(architecture);
  if (!arch) {
    err << "config error: unknown architecture '" << architecture << "'\n";
    return kConfigError;
  }
  const auto report = gradient_check_run(*arch, seed, corrupt);
  char line[200];
  for (const auto &g : report.groups) {
    std::snprintf(line, sizeof line, "%-22s max_rel_err %.3e  at %zu  (analytic %.6e, numeric %.6e)  %s\n",
                  g.name.c_str(), g.max_relative_error, g.worst_index, g.analytic, g.numeric,
                  g.max_relative_error < report.threshold ? "ok" : "FAIL");
    out << line;
  }
  std::snprintf(line, sizeof line, "worst %.3e (threshold %.0e): %s\n", report.worst(),
                report.threshold, report.passed() ? "PASS" : "FAIL");
  out << line;
  return report.passed() ? kOk : kNumericError;
}

/// Parses argv-style arguments (without the program name) and dispatches.
inline int run(const std::vector<std::string> &args, std::ostream &out = std::cout,
               std::ostream &err = std::cerr) {
  CLI::App app{"Customer feedback sentence classifier (CNN and CNN+GRU)", "fbclass"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto *train = app.add_subcommand("train", "train a model");
  train->add_option("--config", ta.config_path, "flat key = value config file");
  train->add_option("--train", ta.train_path, "training TSV")->required();
  train->add_option("--dev", ta.dev_path, "development TSV")->required();
  train->add_option("--out", ta.out_dir, "output model directory")->required();
  train->add_option("--preset", ta.preset, "en | es | fr | jp");
  train->add_option("--seed", ta.seed, "random seed");
  train->add_option("--architecture", ta.architecture, "cnn | cnn_gru");
  train->add_option("--set", ta.overrides, "override any config key (key=value)");

  std::string model_dir, test_path, report_path;
  auto *evaluate = app.add_subcommand("evaluate", "score a model on a labelled TSV");
  evaluate->add_option("--model", model_dir, "model directory")->required();
  evaluate->add_option("--test", test_path, "test TSV")->required();
  evaluate->add_option("--report", report_path, "machine-readable report output");

  std::optional<std::string> text;
  std::string file;
  auto *pred = app.add_subcommand("predict", "classify sentences");
  pred->add_option("--model", model_dir, "model directory")->required();
  auto *text_opt = pred->add_option("--text", text, "one sentence");
  auto *file_opt = pred->add_option("--file", file, "one sentence per line");
  text_opt->excludes(file_opt);

  std::uint64_t seed = 7;
  std::size_t per_class = 100, noise = 4;
  std::string out_dir;
  auto *gen = app.add_subcommand("gen-data", "write a synthetic train/dev/test corpus");
  gen->add_option("--seed", seed, "random seed")->required();
  gen->add_option("--per-class", per_class, "sentences per class")->required();
  gen->add_option("--noise", noise, "filler words per sentence")->capture_default_str();
  gen->add_option("--out", out_dir, "output directory")->required();

  std::string arch;
  std::uint64_t gc_seed = 1;
  std::string corrupt;
  auto *gc = app.add_subcommand("grad-check", "compare backprop with finite differences");
  gc->add_option("--architecture", arch, "cnn | cnn_gru")->required();
  gc->add_option("--seed", gc_seed, "random seed")->capture_default_str();
  gc->add_option("--corrupt", corrupt,
                 "scale analytic gradients of tensors with this name prefix by 1.1 "
                 "(harness self-test)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "usage error: " << e.what() << "\n";
    return kConfigError;
  }

  if (*train)
    return run_train(ta, out, err);
  if (*evaluate)
    return run_evaluate(model_dir, test_path, report_path, out, err);
  if (*pred) {
    if (!*text_opt && !*file_opt) {
      err << "usage error: predict needs --text or --file\n";
      return kConfigError;
    }
    return run_predict(model_dir, text, file, out, err);
  }
  if (*gen)
    return run_gen_data(seed, per_class, noise, out_dir, out, err);
  return run_grad_check(arch, gc_seed, corrupt, out, err);
}

} // namespace fbclass::cli

#endif // FBCLASS_CLI_HPP
