// SPDX-License-Identifier: Apache-2.0
/**
 * @file   checkpoint.hpp
 * @brief  Versioned binary checkpoint of named parameter tensors.
 *
 * Layout (all integers and doubles little-endian):
 *
 *   "FBCKPT\0\0"            8-byte magic
 *   u32 version             currently 1
 *   u64 tensor_count
 *   per tensor:
 *     u32 name_len, name bytes
 *     u64 rows, u64 cols
 *     rows*cols f64 values  IEEE-754 bit patterns
 *   u64 fnv1a64             over every preceding byte
 *
 * Values are stored as raw bit patterns so a save/load round trip is exact.
 */
#ifndef FBCLASS_CHECKPOINT_HPP
#define FBCLASS_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "models.hpp"

namespace fbclass {

class CheckpointError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'F', 'B', 'C', 'K', 'P', 'T', 0, 0};

struct NamedTensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

namespace detail {

class HashingWriter {
public:
  explicit HashingWriter(std::ostream &out) : out_(out) {}

  void bytes(const void *p, std::size_t n) {
    const auto *c = static_cast<const unsigned char *>(p);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= c[i];
      hash_ *= 0x100000001b3ULL;
    }
    out_.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
  }
  template <typename U> void uint(U v) {
    unsigned char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i)
      buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, sizeof(U));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t hash() const { return hash_; }

private:
  std::ostream &out_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class HashingReader {
public:
  explicit HashingReader(std::istream &in) : in_(in) {}

  void bytes(void *p, std::size_t n) {
    if (!in_.read(static_cast<char *>(p), static_cast<std::streamsize>(n)))
      throw CheckpointError("checkpoint truncated");
    const auto *c = static_cast<const unsigned char *>(p);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= c[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  template <typename U> U uint() {
    unsigned char buf[sizeof(U)];
    bytes(buf, sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::uint64_t hash() const { return hash_; }

private:
  std::istream &in_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

} // namespace detail

inline void write_tensors(std::ostream &out, const std::vector<NamedTensor> &tensors) {
  detail::HashingWriter w(out);
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.uint<std::uint32_t>(kCheckpointVersion);
  w.uint<std::uint64_t>(tensors.size());
  for (const auto &t : tensors) {
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.uint<std::uint64_t>(t.rows);
    w.uint<std::uint64_t>(t.cols);
    for (double v : t.values)
      w.f64(v);
  }
  const std::uint64_t h = w.hash();
  w.uint<std::uint64_t>(h);
  if (!out)
    throw CheckpointError("failed writing checkpoint");
}

inline std::vector<NamedTensor> read_tensors(std::istream &in) {
  detail::HashingReader r(in);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw CheckpointError("not a checkpoint (bad magic)");
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto count = r.uint<std::uint64_t>();
  if (count > 4096)
    throw CheckpointError("implausible tensor count");
  std::vector<NamedTensor> tensors;
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto len = r.uint<std::uint32_t>();
    if (len > 4096)
      throw CheckpointError("implausible tensor name length");
    t.name.resize(len);
    r.bytes(t.name.data(), len);
    t.rows = r.uint<std::uint64_t>();
    t.cols = r.uint<std::uint64_t>();
    if (t.cols != 0 && t.rows > (std::uint64_t{1} << 32) / t.cols)
      throw CheckpointError("implausible shape for tensor '" + t.name + "'");
    t.values.resize(t.rows * t.cols);
    for (double &v : t.values)
      v = r.f64();
    tensors.push_back(std::move(t));
  }
  const std::uint64_t expected = r.hash();
  if (r.uint<std::uint64_t>() != expected)
    throw CheckpointError("checkpoint checksum mismatch");
  return tensors;
}

template <typename Model> std::vector<NamedTensor> collect_tensors(const Model &m) {
  std::vector<NamedTensor> out;
  visit_params(m, "", [&](auto view) {
    out.push_back(NamedTensor{view.name, view.rows, view.cols,
                              std::vector<double>(view.data.begin(), view.data.end())});
  });
  return out;
}

template <typename Model> void save_checkpoint(std::ostream &out, const Model &m) {
  write_tensors(out, collect_tensors(m));
}

/// Fills an already-shaped model; names and shapes must match exactly.
template <typename Model> void load_checkpoint(std::istream &in, Model &m) {
  const auto tensors = read_tensors(in);
  std::size_t i = 0;
  visit_params(m, "", [&](auto view) {
    if (i >= tensors.size())
      throw CheckpointError("checkpoint is missing tensor '" + view.name + "'");
    const auto &t = tensors[i++];
    if (t.name != view.name || t.rows != view.rows || t.cols != view.cols)
      throw CheckpointError("checkpoint tensor '" + t.name + "' [" +
                            std::to_string(t.rows) + "x" + std::to_string(t.cols) +
                            "] does not match '" + view.name + "' [" +
                            std::to_string(view.rows) + "x" +
                            std::to_string(view.cols) + "]");
    std::copy(t.values.begin(), t.values.end(), view.data.begin());
  });
  if (i != tensors.size())
    throw CheckpointError("checkpoint has extra tensors");
}

template <typename Model> void save_checkpoint(const std::string &path, const Model &m) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw CheckpointError("cannot write '" + path + "'");
  save_checkpoint(out, m);
}

template <typename Model> void load_checkpoint(const std::string &path, Model &m) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError("cannot read '" + path + "'");
  load_checkpoint(in, m);
}

} // namespace fbclass

#endif // FBCLASS_CHECKPOINT_HPP
