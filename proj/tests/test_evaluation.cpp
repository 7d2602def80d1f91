// SPDX-License-Identifier: Apache-2.0
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include <fbclass/evaluation.hpp>

#include "test_support.hpp"

using namespace fbclass;
using test_support::brute_force_counts;
using test_support::metric_fixture;

namespace {

struct Split {
  std::vector<std::size_t> pred;
  std::vector<TagSet> gold;
};

Split fixture() {
  Split s;
  for (const auto &row : metric_fixture()) {
    s.pred.push_back(row.predicted);
    s.gold.push_back(row.gold);
  }
  return s;
}

} // namespace

TEST(Score, FixtureMatchesBruteForceOracle) {
  const auto f = fixture();
  ASSERT_EQ(f.pred.size(), 20u);
  const auto r = score(f.pred, f.gold);
  const auto oracle = brute_force_counts(f.pred, f.gold);
  for (std::size_t t = 0; t < kNumTags; ++t) {
    EXPECT_EQ(r.tags[t].tp, oracle[t].tp) << tag_name(t);
    EXPECT_EQ(r.tags[t].fp, oracle[t].fp) << tag_name(t);
    EXPECT_EQ(r.tags[t].fn, oracle[t].fn) << tag_name(t);
  }
  EXPECT_EQ(r.n_examples, 20u);
  EXPECT_DOUBLE_EQ(r.exact_accuracy, 0.65);
}

TEST(Score, FixtureHandCounts) {
  // Committed counts, tallied by hand from the fixture rows.
  const std::size_t expect[kNumTags][3] = {
      {6, 3, 2}, {3, 2, 2}, {0, 0, 3}, {1, 1, 2}, {2, 1, 0}, {1, 0, 1}};
  const auto f = fixture();
  const auto r = score(f.pred, f.gold);
  for (std::size_t t = 0; t < kNumTags; ++t) {
    EXPECT_EQ(r.tags[t].tp, expect[t][0]) << tag_name(t);
    EXPECT_EQ(r.tags[t].fp, expect[t][1]) << tag_name(t);
    EXPECT_EQ(r.tags[t].fn, expect[t][2]) << tag_name(t);
  }
  EXPECT_DOUBLE_EQ(r.tags[0].precision, 6.0 / 9.0);
  EXPECT_DOUBLE_EQ(r.tags[0].recall, 6.0 / 8.0);
  EXPECT_DOUBLE_EQ(r.tags[0].f1, 2.0 * 6.0 / (2.0 * 6.0 + 3.0 + 2.0));
}

TEST(Score, NeverPredictedTagUsesSentinel) {
  const auto f = fixture();
  const auto &rq = score(f.pred, f.gold).tags[static_cast<std::size_t>(Tag::request)];
  EXPECT_EQ(rq.precision, -1.0);
  EXPECT_EQ(rq.recall, 0.0);
  EXPECT_EQ(rq.f1, -1.0);
}

TEST(Score, AbsentTagIsFullyUndefinedAndZeroF1WhenBothZero) {
  // comment predicted once, wrongly; complaint in gold, never predicted.
  const auto r = score(std::vector<std::size_t>{0}, {TagSet{Tag::complaint}});
  EXPECT_EQ(r.tags[0].precision, 0.0);
  EXPECT_EQ(r.tags[0].recall, -1.0);
  EXPECT_EQ(r.tags[0].f1, -1.0);
  EXPECT_EQ(r.tags[5].precision, -1.0);
  EXPECT_EQ(r.tags[5].recall, -1.0);

  TagMetrics m{Tag::bug, 0, 2, 3};
  finalize_metrics(m);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
}

TEST(Score, AllCorrectAndErrors) {
  const auto r = score(std::vector<std::size_t>{0, 3, 3}, {TagSet{Tag::comment}, TagSet{Tag::bug, Tag::comment},
                                   TagSet{Tag::bug}});
  EXPECT_EQ(r.exact_accuracy, 1.0);
  EXPECT_THROW(score(std::vector<std::size_t>{0}, {}), std::invalid_argument);
  EXPECT_THROW(score(std::vector<std::size_t>{6}, {TagSet{Tag::bug}}), std::out_of_range);
  EXPECT_THROW(score(std::vector<std::size_t>{0}, {TagSet{}}), std::invalid_argument);
}

TEST(Score, PredictionOverloadAgrees) {
  const auto f = fixture();
  std::vector<Prediction> preds;
  for (auto p : f.pred) {
    Vector d(6, 0.0);
    d[p] = 1.0;
    preds.push_back(Prediction{p, 1.0, d});
  }
  EXPECT_EQ(score(preds, f.gold), score(f.pred, f.gold));
}

TEST(Score, SingleTagGoldInvariants) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<std::size_t> pred;
    std::vector<TagSet> gold;
    for (std::size_t i = 0; i < n; ++i) {
      pred.push_back(rng.below(6));
      gold.push_back(TagSet{static_cast<Tag>(rng.below(6))});
    }
    const auto r = score(pred, gold);
    std::size_t tp = 0, tp_fn = 0;
    for (const auto &m : r.tags) {
      tp += m.tp;
      tp_fn += m.tp + m.fn;
    }
    EXPECT_DOUBLE_EQ(r.exact_accuracy, static_cast<double>(tp) / static_cast<double>(n));
    EXPECT_EQ(tp_fn, n);
  }
}

TEST(Score, PermutationInvariant) {
  auto f = fixture();
  const auto ref = score(f.pred, f.gold);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> order(f.pred.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    Split p;
    for (auto i : order) {
      p.pred.push_back(f.pred[i]);
      p.gold.push_back(f.gold[i]);
    }
    EXPECT_EQ(score(p.pred, p.gold), ref);
  }
}

TEST(Report, TextFormat) {
  const auto f = fixture();
  auto r = score(f.pred, f.gold);
  const auto text = format_report_text(r);
  EXPECT_NE(text.find("exact_accuracy 0.6500\n"), std::string::npos);
  EXPECT_NE(text.find("n_examples 20\n"), std::string::npos);
  std::istringstream in(text);
  std::string line, first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("tag", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(in, line))
    if (line.rfind("exact", 0) != 0 && line.rfind("n_examples", 0) != 0)
      ++rows;
  EXPECT_EQ(rows, 6u);
  EXPECT_NE(text.find("request               -1    0.0000        -1"), std::string::npos) << text;

  r.exact_accuracy = 0.70;
  EXPECT_NE(format_report_text(r).find("exact_accuracy 0.7000\n"), std::string::npos);
}

TEST(Report, RecordRoundTripsExactly) {
  const auto f = fixture();
  const auto r = score(f.pred, f.gold);
  const auto rec = format_report_record(r);
  EXPECT_NE(rec.find("request.precision -1\n"), std::string::npos);
  std::istringstream in(rec);
  EXPECT_EQ(parse_report_record(in), r);

  std::istringstream broken("n_examples 3\n");
  EXPECT_THROW(parse_report_record(broken), DataError);
}
