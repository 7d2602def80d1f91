// SPDX-License-Identifier: Apache-2.0
/**
 * @file   corpus.hpp
 * @brief  Feedback records, tag set, tokenizer, vocabulary, padding,
 *         embedding loader, TSV reader/writer and the synthetic corpus.
 */
#ifndef FBCLASS_CORPUS_HPP
#define FBCLASS_CORPUS_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "numerics.hpp"

namespace fbclass {

/// Malformed input data. Carries the 1-based line number when known.
class DataError : public std::runtime_error {
public:
  DataError(const std::string &what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Canonical order: CO, CP, RQ, BG, ME, UD.
enum class Tag : std::uint8_t {
  comment = 0,
  complaint,
  request,
  bug,
  meaningless,
  undetermined
};

inline constexpr std::size_t kNumTags = 6;

inline constexpr std::array<std::string_view, kNumTags> kTagNames = {
    "comment", "complaint", "request", "bug", "meaningless", "undetermined"};

inline std::string_view tag_name(Tag t) {
  return kTagNames[static_cast<std::size_t>(t)];
}
inline std::string_view tag_name(std::size_t index) { return kTagNames.at(index); }

inline std::optional<Tag> parse_tag(std::string_view s) {
  for (std::size_t i = 0; i < kNumTags; ++i)
    if (kTagNames[i] == s)
      return static_cast<Tag>(i);
  return std::nullopt;
}

/// Subset of the six tags, iterated in canonical order.
class TagSet {
public:
  TagSet() = default;
  TagSet(std::initializer_list<Tag> tags) {
    for (Tag t : tags)
      insert(t);
  }

  void insert(Tag t) { bits_ |= bit(t); }
  bool contains(Tag t) const { return (bits_ & bit(t)) != 0; }
  bool contains(std::size_t index) const {
    return index < kNumTags && contains(static_cast<Tag>(index));
  }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const { return static_cast<std::size_t>(__builtin_popcount(bits_)); }

  std::vector<Tag> tags() const {
    std::vector<Tag> out;
    for (std::size_t i = 0; i < kNumTags; ++i)
      if (contains(i))
        out.push_back(static_cast<Tag>(i));
    return out;
  }

  /// Comma-joined names, e.g. "comment,bug".
  std::string to_string() const {
    std::string s;
    for (Tag t : tags()) {
      if (!s.empty())
        s += ',';
      s += tag_name(t);
    }
    return s;
  }

  bool operator==(const TagSet &) const = default;

private:
  static std::uint8_t bit(Tag t) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t));
  }
  std::uint8_t bits_ = 0;
};

struct FeedbackRecord {
  std::string id;
  std::string text;
  TagSet tags;

  bool operator==(const FeedbackRecord &) const = default;
};

enum class SplitRole { train, dev, test };

inline std::string_view role_name(SplitRole r) {
  switch (r) {
  case SplitRole::train:
    return "train";
  case SplitRole::dev:
    return "dev";
  case SplitRole::test:
    return "test";
  }
  return "?";
}

struct DatasetSplit {
  SplitRole role = SplitRole::train;
  std::vector<FeedbackRecord> records;

  std::size_t size() const { return records.size(); }
  bool operator==(const DatasetSplit &) const = default;
};

// ---------------------------------------------------------------------------
// Tokenizer

enum class TokenMode { word, character };

namespace detail {

inline std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len != 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80)
        ok = false;
      else
        cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string &out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' ||
         c == U'\f' || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 ||
         c == 0x202F || c == 0x205F || c == 0x3000;
}

inline bool is_punct(char32_t c) {
  if (c < 0x80)
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  return c == 0xA1 || c == 0xAB || c == 0xBB || c == 0xBF ||
         (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || c == 0xFF01 || c == 0xFF08 ||
         c == 0xFF09 || c == 0xFF0C || c == 0xFF0E || c == 0xFF1A ||
         c == 0xFF1B || c == 0xFF1F;
}

/// Lowercase for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic
/// capitals. Other scripts pass through.
inline char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z')
    return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7)
    return c + 32;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130)
      return U'i';
    if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E))
      return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x178)
      return 0xFF;
    if (c != 0x138 && c != 0x149 && c != 0x17F && c % 2 == 0)
      return c + 1;
    return c;
  }
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2)
    return c + 32;
  if (c >= 0x410 && c <= 0x42F)
    return c + 32;
  if (c >= 0x400 && c <= 0x40F)
    return c + 80;
  return c;
}

} // namespace detail

/**
 * word: lowercase, split on whitespace, peel leading and trailing punctuation
 * off each chunk as one-character tokens (inner punctuation such as "don't"
 * stays attached). character: one token per Unicode scalar, whitespace
 * dropped, case preserved.
 */
inline std::vector<std::string> tokenize(std::string_view text, TokenMode mode) {
  const auto cps = detail::decode_utf8(text);
  std::vector<std::string> tokens;
  if (mode == TokenMode::character) {
    for (char32_t c : cps) {
      if (detail::is_space(c))
        continue;
      std::string t;
      detail::append_utf8(t, c);
      tokens.push_back(std::move(t));
    }
    return tokens;
  }

  auto emit_chunk = [&](std::size_t begin, std::size_t end) {
    std::size_t lo = begin, hi = end;
    std::vector<std::string> trailing;
    while (lo < hi && detail::is_punct(cps[lo])) {
      std::string t;
      detail::append_utf8(t, cps[lo++]);
      tokens.push_back(std::move(t));
    }
    while (hi > lo && detail::is_punct(cps[hi - 1])) {
      std::string t;
      detail::append_utf8(t, cps[--hi]);
      trailing.push_back(std::move(t));
    }
    if (lo < hi) {
      std::string core;
      for (std::size_t i = lo; i < hi; ++i)
        detail::append_utf8(core, detail::to_lower(cps[i]));
      tokens.push_back(std::move(core));
    }
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
  };

  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && detail::is_space(cps[i]))
      ++i;
    const std::size_t start = i;
    while (i < cps.size() && !detail::is_space(cps[i]))
      ++i;
    if (i > start)
      emit_chunk(start, i);
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Preprocessing

/// One single-tag copy per gold tag, tags in canonical order.
inline std::vector<FeedbackRecord>
expand_multilabel(const std::vector<FeedbackRecord> &records) {
  std::vector<FeedbackRecord> out;
  out.reserve(records.size());
  for (const auto &r : records) {
    if (r.tags.empty())
      throw DataError("record '" + r.id + "' has no tags");
    for (Tag t : r.tags.tags())
      out.push_back(FeedbackRecord{r.id, r.text, TagSet{t}});
  }
  return out;
}

inline constexpr std::size_t kPadIndex = 0;
inline constexpr std::size_t kUnkIndex = 1;
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";

class Vocabulary {
public:
  Vocabulary() {
    add(std::string(kPadToken));
    add(std::string(kUnkToken));
  }

  /// Rebuild from an ordered token list whose first two entries are PAD, UNK.
  static Vocabulary from_tokens(const std::vector<std::string> &tokens) {
    if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken)
      throw DataError("vocabulary must start with " + std::string(kPadToken) +
                      " and " + std::string(kUnkToken));
    Vocabulary v;
    for (std::size_t i = 2; i < tokens.size(); ++i)
      if (!v.add(tokens[i]))
        throw DataError("duplicate vocabulary token '" + tokens[i] + "'", i + 1);
    return v;
  }

  std::size_t size() const { return tokens_.size(); }

  std::size_t index_of(const std::string &token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnkIndex : it->second;
  }
  bool contains(const std::string &token) const { return index_.count(token) != 0; }
  const std::string &token_at(std::size_t i) const { return tokens_.at(i); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  /// FNV-1a 64 over the newline-terminated token list.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto &t : tokens_) {
      for (unsigned char c : t) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
      h ^= '\n';
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  bool operator==(const Vocabulary &o) const { return tokens_ == o.tokens_; }

private:
  bool add(const std::string &token) {
    if (index_.count(token))
      return false;
    index_.emplace(token, tokens_.size());
    tokens_.push_back(token);
    return true;
  }

  friend Vocabulary build_vocabulary(const std::vector<FeedbackRecord> &,
                                     std::size_t, TokenMode);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Frequency >= min_count; descending frequency, ties lexicographic.
inline Vocabulary build_vocabulary(const std::vector<FeedbackRecord> &records,
                                   std::size_t min_count, TokenMode mode) {
  if (min_count < 1)
    throw std::invalid_argument("build_vocabulary: min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto &r : records)
    for (auto &t : tokenize(r.text, mode))
      ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(),
                                                          counts.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) {
    return a.second > b.second;
  });
  Vocabulary v;
  for (const auto &[tok, n] : sorted)
    if (n >= min_count)
      v.add(tok);
  return v;
}

struct EncodedExample {
  std::vector<std::size_t> indices;
  std::size_t true_length = 0;
  std::size_t label = 0;

  bool operator==(const EncodedExample &) const = default;
};

inline EncodedExample pad_encode(const std::vector<std::string> &tokens,
                                 const Vocabulary &vocab, std::size_t max_len) {
  if (max_len < 1)
    throw std::invalid_argument("pad_encode: max_len must be >= 1");
  EncodedExample e;
  e.indices.assign(max_len, kPadIndex);
  e.true_length = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < e.true_length; ++i)
    e.indices[i] = vocab.index_of(tokens[i]);
  return e;
}

/// Longest tokenized text, at least 1.
inline std::size_t max_token_length(const std::vector<FeedbackRecord> &records,
                                    TokenMode mode) {
  std::size_t m = 1;
  for (const auto &r : records)
    m = std::max(m, tokenize(r.text, mode).size());
  return m;
}

/// Encode each record with its first canonical tag as label.
inline std::vector<EncodedExample>
encode_records(const std::vector<FeedbackRecord> &records, const Vocabulary &vocab,
               std::size_t max_len, TokenMode mode) {
  std::vector<EncodedExample> out;
  out.reserve(records.size());
  for (const auto &r : records) {
    auto e = pad_encode(tokenize(r.text, mode), vocab, max_len);
    if (!r.tags.empty())
      e.label = static_cast<std::size_t>(r.tags.tags().front());
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embeddings

struct EmbeddingTable {
  Matrix weights;                  // vocab size x k
  std::vector<std::uint8_t> trainable; // per row; PAD row is 0

  std::size_t rows() const { return weights.rows(); }
  std::size_t dim() const { return weights.cols(); }

  static EmbeddingTable zeros(std::size_t vocab_size, std::size_t k) {
    if (k == 0 || vocab_size < 2)
      throw ShapeError("embedding table needs k > 0 and room for PAD/UNK");
    EmbeddingTable t{Matrix(vocab_size, k), std::vector<std::uint8_t>(vocab_size, 1)};
    t.trainable[kPadIndex] = 0;
    return t;
  }

  static EmbeddingTable random(std::size_t vocab_size, std::size_t k,
                               double scale, Rng &rng) {
    auto t = zeros(vocab_size, k);
    for (std::size_t r = 1; r < vocab_size; ++r)
      fill_uniform(t.weights.row(r), scale, rng);
    return t;
  }
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ')
      ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ')
      ++i;
    if (i > start)
      out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_count(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    return std::nullopt;
  return v;
}

inline std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r')
    line.remove_suffix(1);
  return line;
}

} // namespace detail

/**
 * Text embeddings: "<count> <dim>" header, then "token v1 ... v_dim".
 * Tokens absent from the file (and UNK) get uniform rows of scale 0.01,
 * drawn in row order; PAD stays zero.
 */
inline EmbeddingTable load_embeddings(std::istream &in, const Vocabulary &vocab,
                                      std::size_t k, Rng &rng) {
  std::string line;
  if (!std::getline(in, line))
    throw DataError("embedding file is empty", 1);
  const auto header = detail::split_spaces(detail::chomp(line));
  std::optional<std::size_t> count, dim;
  if (header.size() == 2) {
    count = detail::parse_count(header[0]);
    dim = detail::parse_count(header[1]);
  }
  if (!count || !dim)
    throw DataError("malformed embedding header", 1);
  if (*dim != k)
    throw DataError("embedding dimension " + std::to_string(*dim) +
                    " does not match requested " + std::to_string(k));

  auto table = EmbeddingTable::zeros(vocab.size(), k);
  std::vector<std::uint8_t> found(vocab.size(), 0);
  std::size_t lineno = 1, entries = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto l = detail::chomp(line);
    if (l.empty())
      continue;
    const auto fields = detail::split_spaces(l);
    if (fields.size() != k + 1)
      throw DataError("expected token and " + std::to_string(k) + " values", lineno);
    std::vector<double> vec(k);
    for (std::size_t j = 0; j < k; ++j) {
      auto v = detail::parse_double(fields[j + 1]);
      if (!v)
        throw DataError("bad number '" + std::string(fields[j + 1]) + "'", lineno);
      vec[j] = *v;
    }
    ++entries;
    const std::string token(fields[0]);
    if (!vocab.contains(token))
      continue;
    const std::size_t idx = vocab.index_of(token);
    if (idx == kPadIndex || found[idx])
      continue;
    found[idx] = 1;
    std::copy(vec.begin(), vec.end(), table.weights.row(idx).begin());
  }
  if (entries != *count)
    throw DataError("header declares " + std::to_string(*count) +
                    " vectors but file has " + std::to_string(entries));
  for (std::size_t r = 1; r < vocab.size(); ++r)
    if (!found[r])
      fill_uniform(table.weights.row(r), 0.01, rng);
  return table;
}

inline EmbeddingTable load_embeddings(const std::string &path, const Vocabulary &vocab,
                                      std::size_t k, Rng &rng) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open embedding file '" + path + "'");
  return load_embeddings(in, vocab, k, rng);
}

// ---------------------------------------------------------------------------
// TSV datasets: id<TAB>text<TAB>tag[,tag...]

inline DatasetSplit load_tsv(std::istream &in, SplitRole role, bool lenient = false) {
  DatasetSplit split{role, {}};
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto l = detail::chomp(line);
    if (l.empty())
      continue;
    const auto fields = detail::split(l, '\t');
    if (fields.size() != 3)
      throw DataError("expected 3 tab-separated fields, got " +
                          std::to_string(fields.size()),
                      lineno);
    FeedbackRecord r;
    r.id = std::string(fields[0]);
    r.text = std::string(fields[1]);
    if (r.id.empty())
      throw DataError("empty id", lineno);
    if (r.text.empty() && !lenient)
      throw DataError("empty text", lineno);
    for (auto name : detail::split(fields[2], ',')) {
      auto tag = parse_tag(name);
      if (!tag)
        throw DataError("unknown tag '" + std::string(name) + "'", lineno);
      r.tags.insert(*tag);
    }
    if (!seen.insert(r.id).second)
      throw DataError("duplicate id '" + r.id + "'", lineno);
    split.records.push_back(std::move(r));
  }
  return split;
}

inline DatasetSplit load_tsv(const std::string &path, SplitRole role,
                             bool lenient = false) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  return load_tsv(in, role, lenient);
}

inline void write_tsv(std::ostream &out, const DatasetSplit &split) {
  for (const auto &r : split.records)
    out << r.id << '\t' << r.text << '\t' << r.tags.to_string() << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace detail {

inline constexpr std::array<std::array<std::string_view, 5>, kNumTags>
    kSyntheticLexicon = {{
        {"great", "nice", "love", "pleasant", "smooth"},
        {"slow", "horrible", "lousy", "awful", "annoying"},
        {"please", "add", "wish", "suggest", "option"},
        {"crash", "error", "freeze", "glitch", "broken"},
        {"lol", "hmm", "blah", "meh", "whatever"},
        {"perhaps", "maybe", "somehow", "unclear", "dunno"},
    }};

inline constexpr std::array<std::string_view, 16> kSyntheticFiller = {
    "the", "app", "it",   "is",  "this", "and", "my",   "on",
    "with", "for", "when", "was", "to",   "of",  "word", "screen"};

} // namespace detail

struct SyntheticCorpus {
  DatasetSplit train{SplitRole::train, {}};
  DatasetSplit dev{SplitRole::dev, {}};
  DatasetSplit test{SplitRole::test, {}};
};

/// Class keywords of the synthetic generator, for oracle checks.
inline std::vector<std::string> synthetic_keywords(Tag t) {
  const auto &lex = detail::kSyntheticLexicon[static_cast<std::size_t>(t)];
  return {lex.begin(), lex.end()};
}

/// One sentence per draw: 1-3 class keywords plus vocab_noise filler words,
/// shuffled. Per class, round(0.70 n) go to train, round(0.15 n) to dev, the
/// rest to test; each split is then shuffled.
inline SyntheticCorpus generate_synthetic(std::uint64_t seed, std::size_t n_per_class,
                                          std::size_t vocab_noise) {
  if (n_per_class < 1)
    throw std::invalid_argument("generate_synthetic: n_per_class must be >= 1");
  Rng rng(seed);
  SyntheticCorpus c;
  const auto n_train = static_cast<std::size_t>(std::llround(0.70 * n_per_class));
  const auto n_dev = std::min(n_per_class - n_train,
                              static_cast<std::size_t>(std::llround(0.15 * n_per_class)));
  for (std::size_t cls = 0; cls < kNumTags; ++cls) {
    const auto &lex = detail::kSyntheticLexicon[cls];
    for (std::size_t i = 0; i < n_per_class; ++i) {
      std::vector<std::string_view> words;
      const std::size_t n_kw = 1 + static_cast<std::size_t>(rng.below(3));
      for (std::size_t j = 0; j < n_kw; ++j)
        words.push_back(lex[rng.below(lex.size())]);
      for (std::size_t j = 0; j < vocab_noise; ++j)
        words.push_back(detail::kSyntheticFiller[rng.below(detail::kSyntheticFiller.size())]);
      rng.shuffle(words);
      std::string text;
      for (auto w : words) {
        if (!text.empty())
          text += ' ';
        text += w;
      }
      FeedbackRecord r{"syn-" + std::string(kTagNames[cls]) + "-" + std::to_string(i),
                       std::move(text), TagSet{static_cast<Tag>(cls)}};
      auto &dest = i < n_train ? c.train : (i < n_train + n_dev ? c.dev : c.test);
      dest.records.push_back(std::move(r));
    }
  }
  rng.shuffle(c.train.records);
  rng.shuffle(c.dev.records);
  rng.shuffle(c.test.records);
  return c;
}

} // namespace fbclass

#endif // FBCLASS_CORPUS_HPP
