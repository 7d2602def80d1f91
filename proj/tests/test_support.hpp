// SPDX-License-Identifier: Apache-2.0
// Shared fixtures and helpers for the unit and acceptance suites.
#ifndef FBCLASS_TEST_SUPPORT_HPP
#define FBCLASS_TEST_SUPPORT_HPP

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <fbclass/corpus.hpp>

namespace fbclass::test_support {

/// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string &name) {
  const auto p = std::filesystem::path(FBCLASS_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_file(const std::filesystem::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Ten records carrying fourteen tags; r4 is the multi-tag
/// "bug, comment" record.
inline const char *kPreprocessingFixture =
    "r1\tit is fast, but the controls are lousy\tcomplaint\n"
    "r2\tSaw advertisements for the new version\tcomment,request\n"
    "r3\tplease add a dark theme\trequest\n"
    "r4\t編集で付けようとしても、どうしてもその人のだけ消えてしまう\tbug,comment\n"
    "r5\tthe installer crashes and I hate it\tbug,complaint,comment\n"
    "r6\tMi pareja y yo hicimos una escapada\tmeaningless\n"
    "r7\tPour moi et avec modesties d'éloges\tundetermined\n"
    "r8\tkeeps installing shortcuts on my desktop\tcomplaint\n"
    "r9\tworks well\tcomment\n"
    "r10\tno idea\tundetermined\n";

/// Twenty predictions with hand-built gold sets. The request tag occurs in
/// gold three times and is never predicted.
struct MetricFixtureRow {
  std::size_t predicted;
  TagSet gold;
};

inline std::vector<MetricFixtureRow> metric_fixture() {
  using T = Tag;
  const auto co = T::comment, cp = T::complaint, rq = T::request, bg = T::bug,
             me = T::meaningless, ud = T::undetermined;
  auto p = [](Tag t) { return static_cast<std::size_t>(t); };
  return {
      {p(co), {co}},     {p(co), {co}}, {p(co), {cp}},     {p(cp), {cp}},
      {p(cp), {cp, bg}}, {p(co), {co, bg}}, {p(bg), {bg}}, {p(cp), {rq}},
      {p(co), {rq}},     {p(me), {me}}, {p(me), {co}},     {p(ud), {ud}},
      {p(co), {ud}},     {p(cp), {co}}, {p(co), {co}},     {p(bg), {cp}},
      {p(cp), {cp}},     {p(co), {rq, co}}, {p(me), {me}}, {p(co), {co}},
  };
}

struct OracleCounts {
  std::size_t tp, fp, fn;
};

/// Per-tag enumeration of the confusion counts, tag-major.
inline std::vector<OracleCounts> brute_force_counts(const std::vector<std::size_t> &pred,
                                                    const std::vector<TagSet> &gold) {
  std::vector<OracleCounts> out;
  for (std::size_t t = 0; t < kNumTags; ++t) {
    OracleCounts c{0, 0, 0};
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool predicted = pred[i] == t;
      const bool in_gold = gold[i].contains(t);
      c.tp += predicted && in_gold;
      c.fp += predicted && !in_gold;
      c.fn += !predicted && in_gold;
    }
    out.push_back(c);
  }
  return out;
}

} // namespace fbclass::test_support

#endif // FBCLASS_TEST_SUPPORT_HPP
