// SPDX-License-Identifier: Apache-2.0
/**
 * @file   numerics.hpp
 * @brief  Dense 64-bit vector/matrix arithmetic, activations, the seeded
 *         generator and the central finite-difference gradient oracle.
 */
#ifndef FBCLASS_NUMERICS_HPP
#define FBCLASS_NUMERICS_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace fbclass {

/// Raised on any operand shape disagreement.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation produces NaN or infinity.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Vector {
public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double> &raw() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Vector &) const = default;

private:
  std::vector<double> data_;
};

/// Row-major dense matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto &r : rows) {
      if (r.size() != cols_)
        throw ShapeError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double &operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shape_string() const {
    return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
  }

  bool operator==(const Matrix &) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ShapeError("dot: length " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size())
    throw ShapeError("axpy: length " + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] += alpha * x[i];
}

inline Matrix matmul(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " +
                     b.shape_string());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0)
        continue;
      auto brow = b.row(p);
      for (std::size_t j = 0; j < b.cols(); ++j)
        orow[j] += aip * brow[j];
    }
  }
  return out;
}

/// Row vector times matrix: out_j = sum_i x_i m(i, j).
inline Vector vecmat(std::span<const double> x, const Matrix &m) {
  if (x.size() != m.rows())
    throw ShapeError("vecmat: vector of length " + std::to_string(x.size()) +
                     " against " + m.shape_string());
  Vector out(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (x[i] == 0.0)
      continue;
    axpy(x[i], m.row(i), out.values());
  }
  return out;
}

/// Matrix times column vector: out_i = sum_j m(i, j) x_j.
inline Vector matvec(const Matrix &m, std::span<const double> x) {
  if (x.size() != m.cols())
    throw ShapeError("matvec: " + m.shape_string() + " against vector of length " +
                     std::to_string(x.size()));
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    out[i] = dot(m.row(i), x);
  return out;
}

/// m += a^T b for row vectors a (rows) and b (cols).
inline void add_outer(std::span<const double> a, std::span<const double> b,
                      Matrix &m) {
  if (a.size() != m.rows() || b.size() != m.cols())
    throw ShapeError("add_outer: " + std::to_string(a.size()) + "x" +
                     std::to_string(b.size()) + " into " + m.shape_string());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0)
      continue;
    axpy(a[i], b, m.row(i));
  }
}

enum class Activation { relu, sigmoid, tanh };

inline double activate(double x, Activation kind) {
  switch (kind) {
  case Activation::relu:
    return x > 0.0 ? x : 0.0;
  case Activation::sigmoid:
    if (x >= 0.0)
      return 1.0 / (1.0 + std::exp(-x));
    else {
      const double e = std::exp(x);
      return e / (1.0 + e);
    }
  case Activation::tanh:
    return std::tanh(x);
  }
  return x;
}

/// Derivative at x. ReLU uses 0 at the kink.
inline double activate_derivative(double x, Activation kind) {
  switch (kind) {
  case Activation::relu:
    return x > 0.0 ? 1.0 : 0.0;
  case Activation::sigmoid: {
    const double s = activate(x, Activation::sigmoid);
    return s * (1.0 - s);
  }
  case Activation::tanh: {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  }
  }
  return 1.0;
}

inline Vector activate(const Vector &x, Activation kind) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = activate(x[i], kind);
  return out;
}

inline Vector activate_derivative(const Vector &x, Activation kind) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = activate_derivative(x[i], kind);
  return out;
}

inline Vector softmax(std::span<const double> logits) {
  if (logits.empty())
    throw ShapeError("softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    total += out[i];
  }
  for (double &v : out)
    v /= total;
  return out;
}
inline Vector softmax(const Vector &logits) { return softmax(logits.values()); }

/**
 * Deterministic generator: xoshiro256** seeded by expanding the 64-bit seed
 * through splitmix64. Doubles take the top 53 bits. The sequence depends only
 * on the seed, never on the platform's standard library.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    seed_ = seed;
    std::uint64_t x = seed;
    for (auto &s : state_)
      s = splitmix64(x);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n), unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0)
      throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// Fisher-Yates, back to front.
  template <typename T> void shuffle(std::vector<T> &items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  bool operator==(const Rng &) const = default;

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t &x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_ = 0;
  std::uint64_t state_[4] = {};
};

inline Matrix random_uniform_init(std::size_t rows, std::size_t cols,
                                  double scale, Rng &rng) {
  if (!(scale > 0.0))
    throw std::invalid_argument("random_uniform_init: scale must be positive");
  Matrix m(rows, cols);
  for (double &v : m.values())
    v = rng.uniform(-scale, scale);
  return m;
}

inline void fill_uniform(std::span<double> out, double scale, Rng &rng) {
  for (double &v : out)
    v = rng.uniform(-scale, scale);
}

inline bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double v) { return std::isfinite(v); });
}

/**
 * Central difference (f(t + eps e_i) - f(t - eps e_i)) / (2 eps) for every
 * coordinate. theta is restored before returning.
 */
template <typename F>
  requires std::is_invocable_r_v<double, F &>
Vector finite_difference_gradient(F &&f, std::span<double> theta,
                                  double eps = 1e-4) {
  if (!(eps > 0.0))
    throw std::invalid_argument("finite_difference_gradient: eps must be positive");
  Vector grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double plus = f();
    theta[i] = saved - eps;
    const double minus = f();
    theta[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw NumericError("finite_difference_gradient: non-finite evaluation at "
                         "coordinate " + std::to_string(i));
    grad[i] = (plus - minus) / (2.0 * eps);
  }
  return grad;
}

/// Overload for a function of an explicit parameter vector.
inline Vector
finite_difference_gradient(const std::function<double(const Vector &)> &f,
                           const Vector &theta, double eps = 1e-4) {
  Vector work = theta;
  return finite_difference_gradient([&] { return f(work); }, work.values(),
                                    eps);
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps vanishing gradients from
/// turning round-off into large ratios.
inline double relative_error(double a, double b, double floor = 1e-6) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

/// Shortest decimal that parses back to the same double.
inline std::string shortest_repr(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

} // namespace fbclass

#endif // FBCLASS_NUMERICS_HPP
