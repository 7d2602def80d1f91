// SPDX-License-Identifier: Apache-2.0
/**
 * @file   evaluation.hpp
 * @brief  Per-tag precision / recall / F1 with the -1 sentinel for undefined
 *         ratios, exact accuracy under multi-label gold, and report I/O.
 */
#ifndef FBCLASS_EVALUATION_HPP
#define FBCLASS_EVALUATION_HPP

#include <array>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "models.hpp"

namespace fbclass {

inline constexpr double kUndefined = -1.0;

struct TagMetrics {
  Tag tag = Tag::comment;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = kUndefined;
  double recall = kUndefined;
  double f1 = kUndefined;

  bool operator==(const TagMetrics &) const = default;
};

struct EvalReport {
  std::array<TagMetrics, kNumTags> tags{};
  double exact_accuracy = 0.0;
  std::size_t n_examples = 0;

  bool operator==(const EvalReport &) const = default;
};

/// Fills precision, recall and f1 from the counts.
inline void finalize_metrics(TagMetrics &m) {
  m.precision = m.tp + m.fp > 0
                    ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp)
                    : kUndefined;
  m.recall = m.tp + m.fn > 0
                 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
                 : kUndefined;
  if (m.precision < 0.0 || m.recall < 0.0)
    m.f1 = kUndefined;
  else if (m.precision + m.recall == 0.0)
    m.f1 = 0.0;
  else
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
}

/**
 * A prediction is correct when it lies in the gold set. The predicted tag
 * scores tp if in gold, else fp; every other gold tag scores fn.
 */
inline EvalReport score(const std::vector<std::size_t> &predicted,
                        const std::vector<TagSet> &gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("score: " + std::to_string(predicted.size()) +
                                " predictions against " + std::to_string(gold.size()) +
                                " gold sets");
  EvalReport r;
  for (std::size_t t = 0; t < kNumTags; ++t)
    r.tags[t].tag = static_cast<Tag>(t);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const std::size_t p = predicted[i];
    if (p >= kNumTags)
      throw std::out_of_range("score: predicted label " + std::to_string(p));
    if (gold[i].empty())
      throw std::invalid_argument("score: empty gold set at example " +
                                  std::to_string(i));
    if (gold[i].contains(p)) {
      ++r.tags[p].tp;
      ++correct;
    } else {
      ++r.tags[p].fp;
    }
    for (Tag g : gold[i].tags())
      if (static_cast<std::size_t>(g) != p)
        ++r.tags[static_cast<std::size_t>(g)].fn;
  }
  for (auto &m : r.tags)
    finalize_metrics(m);
  r.n_examples = predicted.size();
  r.exact_accuracy =
      r.n_examples ? static_cast<double>(correct) / static_cast<double>(r.n_examples)
                   : 0.0;
  return r;
}

inline EvalReport score(const std::vector<Prediction> &predictions,
                        const std::vector<TagSet> &gold) {
  std::vector<std::size_t> labels;
  labels.reserve(predictions.size());
  for (const auto &p : predictions)
    labels.push_back(p.label);
  return score(labels, gold);
}

namespace detail {

/// Four decimals, or "-1" for the sentinel.
inline std::string metric_text(double v) {
  if (v == kUndefined)
    return "-1";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string exact_text(double v) { return shortest_repr(v); }

} // namespace detail

/// Aligned table in canonical tag order followed by the accuracy line.
inline std::string format_report_text(const EvalReport &r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %9s %9s %9s %6s %6s %6s\n", "tag",
                "precision", "recall", "f1", "tp", "fp", "fn");
  out += line;
  for (const auto &m : r.tags) {
    std::snprintf(line, sizeof line, "%-14s %9s %9s %9s %6zu %6zu %6zu\n",
                  std::string(tag_name(m.tag)).c_str(),
                  detail::metric_text(m.precision).c_str(),
                  detail::metric_text(m.recall).c_str(),
                  detail::metric_text(m.f1).c_str(), m.tp, m.fp, m.fn);
    out += line;
  }
  out += "exact_accuracy " + detail::metric_text(r.exact_accuracy) + "\n";
  out += "n_examples " + std::to_string(r.n_examples) + "\n";
  return out;
}

/// One "key value" line per numeric field, values in shortest round-trip
/// form. Keys: n_examples, exact_accuracy, <tag>.{tp,fp,fn,precision,recall,f1}.
inline std::string format_report_record(const EvalReport &r) {
  std::string out;
  out += "n_examples " + std::to_string(r.n_examples) + "\n";
  out += "exact_accuracy " + detail::exact_text(r.exact_accuracy) + "\n";
  for (const auto &m : r.tags) {
    const std::string t(tag_name(m.tag));
    out += t + ".tp " + std::to_string(m.tp) + "\n";
    out += t + ".fp " + std::to_string(m.fp) + "\n";
    out += t + ".fn " + std::to_string(m.fn) + "\n";
    out += t + ".precision " + detail::exact_text(m.precision) + "\n";
    out += t + ".recall " + detail::exact_text(m.recall) + "\n";
    out += t + ".f1 " + detail::exact_text(m.f1) + "\n";
  }
  return out;
}

inline EvalReport parse_report_record(std::istream &in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto l = detail::chomp(line);
    if (l.empty())
      continue;
    const auto sp = l.find(' ');
    if (sp == std::string_view::npos)
      throw DataError("expected 'key value'", lineno);
    kv[std::string(l.substr(0, sp))] = std::string(l.substr(sp + 1));
  }
  auto get = [&](const std::string &key) -> const std::string & {
    auto it = kv.find(key);
    if (it == kv.end())
      throw DataError("report record is missing '" + key + "'");
    return it->second;
  };
  auto count = [&](const std::string &key) {
    auto v = detail::parse_count(get(key));
    if (!v)
      throw DataError("bad count for '" + key + "'");
    return *v;
  };
  auto real = [&](const std::string &key) {
    auto v = detail::parse_double(get(key));
    if (!v)
      throw DataError("bad number for '" + key + "'");
    return *v;
  };
  EvalReport r;
  r.n_examples = count("n_examples");
  r.exact_accuracy = real("exact_accuracy");
  for (std::size_t t = 0; t < kNumTags; ++t) {
    auto &m = r.tags[t];
    const std::string name(tag_name(t));
    m.tag = static_cast<Tag>(t);
    m.tp = count(name + ".tp");
    m.fp = count(name + ".fp");
    m.fn = count(name + ".fn");
    m.precision = real(name + ".precision");
    m.recall = real(name + ".recall");
    m.f1 = real(name + ".f1");
  }
  return r;
}

} // namespace fbclass

#endif // FBCLASS_EVALUATION_HPP
