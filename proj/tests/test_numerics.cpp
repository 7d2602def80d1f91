// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <fbclass/numerics.hpp>

using namespace fbclass;

namespace {

// Independent triple-loop product.
Matrix naive_matmul(const Matrix &a, const Matrix &b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p)
        s += a(i, p) * b(p, j);
      c(i, j) = s;
    }
  return c;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng &rng) {
  return random_uniform_init(r, c, 1.0, rng);
}

} // namespace

TEST(Matmul, IdentityAndZero) {
  const Matrix m{{1, 2}, {3, 4}};
  EXPECT_EQ(matmul(Matrix::identity(2), m), m);
  const Matrix zero(2, 2);
  EXPECT_EQ(matmul(zero, m), zero);
}

TEST(Matmul, SmallProductMatchesOracle) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{5}, {6}};
  const Matrix expected{{17}, {39}};
  EXPECT_EQ(naive_matmul(a, b), expected);
  EXPECT_EQ(matmul(a, b), expected);
}

TEST(Matmul, RandomAgreesWithNaive) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_matrix(1 + rng.below(6), 1 + rng.below(6), rng);
    const auto b = random_matrix(a.cols(), 1 + rng.below(6), rng);
    const auto c = matmul(a, b), d = naive_matmul(a, b);
    for (std::size_t i = 0; i < c.size(); ++i)
      EXPECT_NEAR(c.values()[i], d.values()[i], 1e-12);
  }
}

TEST(Matmul, ShapeErrorNamesBothOperands) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError &e) {
    const std::string msg = e.what();
    ASSERT_NE(msg.find("[2x3]"), std::string::npos);
    EXPECT_NE(msg.find("[2x3]"), msg.rfind("[2x3]")) << msg;
  }
}

TEST(Matmul, Associativity) {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.below(5), m = 1 + rng.below(5), p = 1 + rng.below(5),
                      q = 1 + rng.below(5);
    const auto a = random_matrix(n, m, rng), b = random_matrix(m, p, rng),
               c = random_matrix(p, q, rng);
    const auto l = matmul(matmul(a, b), c), r = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < l.size(); ++i)
      EXPECT_LE(relative_error(l.values()[i], r.values()[i], 1e-12), 1e-9);
  }
}

TEST(Activation, PiecewiseAndClosedForms) {
  EXPECT_EQ(activate(-3.0, Activation::relu), 0.0);
  EXPECT_EQ(activate(2.0, Activation::relu), 2.0);
  EXPECT_EQ(activate_derivative(-3.0, Activation::relu), 0.0);
  EXPECT_EQ(activate_derivative(2.0, Activation::relu), 1.0);
  EXPECT_EQ(activate_derivative(0.0, Activation::relu), 0.0);
  EXPECT_EQ(activate(0.0, Activation::sigmoid), 0.5);
  EXPECT_EQ(activate(0.0, Activation::tanh), 0.0);
  EXPECT_NEAR(activate(std::log(3.0), Activation::sigmoid), 0.75, 1e-15);
  const Vector v = activate(Vector{-1.0, 0.5}, Activation::relu);
  EXPECT_EQ(v, (Vector{0.0, 0.5}));
}

TEST(Activation, DerivativesMatchFiniteDifferences) {
  Rng rng(5);
  for (auto kind : {Activation::relu, Activation::sigmoid, Activation::tanh}) {
    for (int i = 0; i < 100; ++i) {
      double x = rng.uniform(-4.0, 4.0);
      if (kind == Activation::relu && std::abs(x) < 1e-3)
        x = 0.5;
      Vector theta{x};
      const auto fd = finite_difference_gradient(
          [&](const Vector &t) { return activate(t[0], kind); }, theta, 1e-5);
      EXPECT_LT(relative_error(activate_derivative(x, kind), fd[0]), 1e-6)
          << "kind " << static_cast<int>(kind) << " x " << x;
    }
  }
}

TEST(Softmax, UniformShiftAndClosedForm) {
  const auto u = softmax(Vector(6, 0.0));
  for (double p : u)
    EXPECT_DOUBLE_EQ(p, 1.0 / 6.0);
  const auto s = softmax(Vector{1.0, 2.0});
  EXPECT_NEAR(s[0], 0.2689414213699951, 1e-15);
  EXPECT_NEAR(s[1], 0.7310585786300049, 1e-15);
  const Vector x{0.3, -1.2, 4.0};
  const auto a = softmax(x), b = softmax(Vector{100.3, 98.8, 104.0});
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(Softmax, NormalizedOverRandomLogits) {
  Rng rng(17);
  for (int t = 0; t < 1000; ++t) {
    Vector x(1 + rng.below(10));
    for (double &v : x)
      v = rng.uniform(-50.0, 50.0);
    const auto p = softmax(x);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Softmax, LargeLogitsStayFinite) {
  const auto p = softmax(Vector{1000.0, 0.0});
  EXPECT_TRUE(all_finite(p.values()));
  EXPECT_NEAR(p[0], 1.0, 1e-15);
}

TEST(FiniteDifference, SquareAndConstant) {
  const auto g = finite_difference_gradient([](const Vector &t) { return t[0] * t[0]; },
                                            Vector{3.0});
  EXPECT_NEAR(g[0], 6.0, 1e-7);
  const auto z = finite_difference_gradient([](const Vector &) { return 4.2; },
                                            Vector{1.0, -2.0, 3.0});
  EXPECT_EQ(z, Vector(3, 0.0));
}

TEST(FiniteDifference, QuadraticForm) {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 2 + rng.below(5);
    const auto a = random_matrix(n, n, rng);
    Vector theta(n);
    fill_uniform(theta.values(), 1.0, rng);
    auto f = [&](const Vector &x) { return 0.5 * dot(x.values(), matvec(a, x.values()).values()); };
    const auto fd = finite_difference_gradient(f, theta);
    for (std::size_t i = 0; i < n; ++i) {
      double expected = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        expected += 0.5 * (a(i, j) + a(j, i)) * theta[j];
      EXPECT_LT(relative_error(fd[i], expected), 1e-6);
    }
  }
}

TEST(FiniteDifference, TwoClassSoftmaxCrossEntropy) {
  // logits = W x + b, loss = -ln softmax(logits)[gold]; dL/dW = (p - y) x^T.
  const Vector x{0.4, -1.1, 0.7};
  const std::size_t gold = 1;
  Vector theta{0.2, -0.3, 0.5, 0.1, 0.9, -0.4, 0.05, -0.15};
  auto loss = [&](const Vector &t) {
    Vector logits{t[6], t[7]};
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t j = 0; j < 3; ++j)
        logits[c] += t[c * 3 + j] * x[j];
    return -std::log(softmax(logits)[gold]);
  };
  Vector logits{theta[6], theta[7]};
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < 3; ++j)
      logits[c] += theta[c * 3 + j] * x[j];
  const auto p = softmax(logits);
  Vector analytic(8);
  for (std::size_t c = 0; c < 2; ++c) {
    const double d = p[c] - (c == gold ? 1.0 : 0.0);
    for (std::size_t j = 0; j < 3; ++j)
      analytic[c * 3 + j] = d * x[j];
    analytic[6 + c] = d;
  }
  const auto fd = finite_difference_gradient(loss, theta);
  for (std::size_t i = 0; i < 8; ++i)
    EXPECT_LT(relative_error(analytic[i], fd[i]), 1e-6) << i;
}

TEST(FiniteDifference, NonFiniteReportsCoordinate) {
  try {
    finite_difference_gradient(
        [](const Vector &t) { return t[2] > 0.5 ? std::log(-1.0) : 0.0; },
        Vector{0.0, 0.0, 0.5});
    FAIL() << "expected NumericError";
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 2"), std::string::npos);
  }
}

TEST(FiniteDifference, RestoresTheta) {
  Vector theta{1.0, 2.0};
  auto f = [&] { return theta[0] * theta[1]; };
  finite_difference_gradient(f, theta.values());
  EXPECT_EQ(theta, (Vector{1.0, 2.0}));
}

TEST(Rng, MatchesReferenceXoshiro) {
  // Reference values from an independent implementation of
  // splitmix64-seeded xoshiro256**.
  Rng a(0);
  EXPECT_EQ(a.next_u64(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(a.next_u64(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(a.next_u64(), 0x1a5f849d4933e6e0ULL);
  EXPECT_EQ(a.next_u64(), 0x6aa594f1262d2d2cULL);
  Rng b(42);
  EXPECT_EQ(b.next_u64(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(Rng(7).uniform(), 0.7005764821796896);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(9);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i)
    v[i] = i;
  rng.shuffle(v);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(sorted[i], i);
  EXPECT_NE(v, sorted);
}

TEST(RandomInit, DeterministicAndInRange) {
  Rng a(99), b(99);
  const auto m1 = random_uniform_init(7, 5, 0.01, a);
  const auto m2 = random_uniform_init(7, 5, 0.01, b);
  EXPECT_EQ(m1, m2);
  for (double v : m1.values()) {
    EXPECT_GE(v, -0.01);
    EXPECT_LE(v, 0.01);
  }
  EXPECT_THROW(random_uniform_init(1, 1, 0.0, a), std::invalid_argument);
}

TEST(RandomInit, MeanOfManyDrawsNearZero) {
  Rng rng(2024);
  const auto m = random_uniform_init(1000, 1000, 1.0, rng);
  double sum = 0.0;
  for (double v : m.values())
    sum += v;
  EXPECT_LT(std::abs(sum / 1e6), 1e-3);
}
