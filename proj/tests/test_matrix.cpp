#include <catch_amalgamated.hpp>

#include <nrep/error.h>
#include <nrep/matrix.h>

#include "oracles.h"

using namespace nrep;
using Catch::Matchers::WithinAbs;

TEST_CASE("construction symmetrizes and records asymmetry") {
  Mat a(2, 2);
  a << 1.0, 2.0, 2.5, 3.0;
  DenseSymMatrix s(a);
  CHECK(s(0, 1) == 2.25);
  CHECK(s(1, 0) == 2.25);
  CHECK_THAT(s.asymmetry(), WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(DenseSymMatrix::checked(a), Error);
  CHECK_NOTHROW(DenseSymMatrix::checked(s.matrix()));
  CHECK_THROWS_AS(DenseSymMatrix(Mat(2, 3)), Error);
  CHECK_THROWS_AS(DenseSymMatrix(Mat(0, 0)), Error);
}

TEST_CASE("eigendecomposition of small cases") {
  auto e = sym_eigendecompose(DenseSymMatrix::identity(3));
  for (int i = 0; i < 3; ++i) CHECK_THAT(e.eigenvalues(i), WithinAbs(1.0, 1e-14));

  Vec d(2);
  d << 2.0, -1.0;
  e = sym_eigendecompose(DenseSymMatrix::diagonal(d));
  CHECK_THAT(e.eigenvalues(0), WithinAbs(-1.0, 1e-14));
  CHECK_THAT(e.eigenvalues(1), WithinAbs(2.0, 1e-14));

  // [[0,1],[1,0]]: lambda^2 - 1 = 0, vectors (1,-1)/sqrt2 and (1,1)/sqrt2
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  e = sym_eigendecompose(DenseSymMatrix(x));
  CHECK_THAT(e.eigenvalues(0), WithinAbs(-1.0, 1e-14));
  CHECK_THAT(e.eigenvalues(1), WithinAbs(1.0, 1e-14));
  const double r = 1 / std::sqrt(2.0);
  CHECK_THAT(std::abs(e.eigenvectors(0, 0)), WithinAbs(r, 1e-14));
  CHECK_THAT(e.eigenvectors(0, 0) * e.eigenvectors(1, 0), WithinAbs(-0.5, 1e-14));
  CHECK_THAT(e.eigenvectors(0, 1) * e.eigenvectors(1, 1), WithinAbs(0.5, 1e-14));
}

TEST_CASE("eigendecomposition reconstructs random matrices") {
  std::mt19937_64 rng(11);
  for (Index n : {1, 2, 5, 12}) {
    Mat a = oracle::random_symmetric(rng, n);
    auto e = sym_eigendecompose(DenseSymMatrix(a));
    std::vector<double> lam(e.eigenvalues.data(), e.eigenvalues.data() + n);
    for (Index i = 1; i < n; ++i) CHECK(lam[i - 1] <= lam[i]);
    Mat back = oracle::compose(e.eigenvectors, lam);
    CHECK(oracle::frobenius(back - a) <= 1e-10 * n);
    Mat qtq = oracle::multiply(e.eigenvectors.transpose(), e.eigenvectors);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        CHECK_THAT(qtq(i, j), WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
  }
}

TEST_CASE("fractional powers") {
  auto id = fractional_power(DenseSymMatrix::identity(4), -0.5);
  CHECK(oracle::frobenius(id.matrix() - Mat::Identity(4, 4)) < 1e-14);

  Vec d(2);
  d << 4.0, 9.0;
  auto h = fractional_power(DenseSymMatrix::diagonal(d), 0.5);
  CHECK_THAT(h(0, 0), WithinAbs(2.0, 1e-14));
  CHECK_THAT(h(1, 1), WithinAbs(3.0, 1e-14));
  CHECK_THAT(h(0, 1), WithinAbs(0.0, 1e-14));

  // [[1,s],[s,1]]: eigenvalues 1 +- s on (1,1)/sqrt2, (1,-1)/sqrt2
  const double s = 0.5;
  Mat sm(2, 2);
  sm << 1, s, s, 1;
  auto inv = fractional_power(DenseSymMatrix(sm), -0.5);
  const double p = 1 / std::sqrt(1 + s), m = 1 / std::sqrt(1 - s);
  CHECK_THAT(inv(0, 0), WithinAbs(0.5 * (p + m), 1e-13));
  CHECK_THAT(inv(0, 1), WithinAbs(0.5 * (p - m), 1e-13));
  Mat ident = oracle::multiply(oracle::multiply(inv.matrix(), inv.matrix()), sm);
  CHECK(oracle::frobenius(ident - Mat::Identity(2, 2)) < 1e-9 * 2);

  CHECK_THROWS_AS(fractional_power(DenseSymMatrix(sm), 0.3), Error);
}

TEST_CASE("square root squares back on random SPD matrices") {
  std::mt19937_64 rng(5);
  for (Index n : {2, 4, 7}) {
    Mat q = oracle::random_orthogonal(rng, n);
    std::vector<double> lam(n);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (auto &x : lam) x = u(rng);
    Mat a = oracle::compose(q, lam);
    auto root = fractional_power(DenseSymMatrix(a), 0.5);
    CHECK(oracle::frobenius(oracle::multiply(root.matrix(), root.matrix()) - a) <=
          1e-9 * n);
  }
}

TEST_CASE("singular overlap names the eigenvalue") {
  Mat s(2, 2);
  s << 1, 1, 1, 1;
  try {
    fractional_power(DenseSymMatrix(s), -0.5);
    FAIL("expected a singular overlap error");
  } catch (const SingularOverlapError &e) {
    CHECK(e.kind() == ErrorKind::singular_overlap);
    CHECK(std::abs(e.eigenvalue()) < 1e-10);
  }
}

TEST_CASE("trace products") {
  Mat a(2, 2), b(2, 2);
  a << 1, 0, 0, 2;
  b << 3, 0, 0, 4;
  CHECK(trace_product(DenseSymMatrix(a), DenseSymMatrix(b)) == 11.0);

  std::mt19937_64 rng(3);
  Mat x = oracle::random_symmetric(rng, 4), y = oracle::random_symmetric(rng, 4);
  double loop = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) loop += x(i, j) * y(j, i);
  DenseSymMatrix dx(x), dy(y);
  CHECK_THAT(trace_product(dx, dy), WithinAbs(loop, 1e-13));
  CHECK_THAT(trace_product(dx, dy), WithinAbs(trace_product(dy, dx), 1e-13));
  CHECK_THAT(trace_product(DenseSymMatrix::identity(4), dx), WithinAbs(oracle::trace(x), 1e-14));
  CHECK_THROWS_AS(trace_product(dx, DenseSymMatrix::identity(3)), Error);
}

TEST_CASE("idempotency residual") {
  Vec d(3);
  d << 1, 0, 0;
  CHECK(idempotency_residual(DenseSymMatrix::diagonal(d)) == 0.0);
  CHECK(idempotency_residual(DenseSymMatrix(Mat::Constant(1, 1, 0.5))) == 0.25);
  Mat half = Mat::Constant(2, 2, 0.5);
  Mat sq = oracle::multiply(half, half);
  CHECK(oracle::frobenius(sq - half) == 0.0);
  CHECK(idempotency_residual(DenseSymMatrix(half)) < 1e-15);

  // both directions: {0,1} spectrum gives zero, anything else does not
  std::mt19937_64 rng(8);
  Mat q = oracle::random_orthogonal(rng, 5);
  CHECK(idempotency_residual(DenseSymMatrix(oracle::compose(q, {1, 1, 0, 1, 0}))) < 1e-13);
  CHECK(idempotency_residual(DenseSymMatrix(oracle::compose(q, {1, 1, 0, 0.9, 0}))) >
        0.08);
}
