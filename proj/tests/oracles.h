// Test-side reference computations. Nothing here calls into the library's
// numerical routines; results are built from plain loops and std::exp.
#pragma once

#include <nrep/matrix.h>
#include <nrep/scattering.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using nrep::Index;
using nrep::Mat;

inline Mat random_symmetric(std::mt19937_64 &rng, Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
  return a;
}

// Gram-Schmidt on random columns; plain loops.
inline Mat random_orthogonal(std::mt19937_64 &rng, Index n) {
  std::normal_distribution<double> g;
  Mat q(n, n);
  for (Index c = 0; c < n; ++c) {
    std::vector<double> v(n);
    for (auto &x : v) x = g(rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index p = 0; p < c; ++p) {
        double d = 0;
        for (Index i = 0; i < n; ++i) d += v[i] * q(i, p);
        for (Index i = 0; i < n; ++i) v[i] -= d * q(i, p);
      }
    }
    double nrm = 0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (Index i = 0; i < n; ++i) q(i, c) = v[i] / nrm;
  }
  return q;
}

inline Mat multiply(const Mat &a, const Mat &b) {
  Mat c = Mat::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double trace(const Mat &a) {
  double s = 0;
  for (Index i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

inline double frobenius(const Mat &a) {
  double s = 0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Q diag(d) Q^T with explicit loops.
inline Mat compose(const Mat &q, const std::vector<double> &d) {
  Index n = q.rows();
  Mat a = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) a(i, j) += q(i, k) * d[k] * q(j, k);
  return a;
}

// Projector onto the first `rank` columns of a random rotation.
inline Mat random_projector(std::mt19937_64 &rng, Index n, Index rank) {
  std::vector<double> d(n, 0.0);
  for (Index i = 0; i < rank; ++i) d[i] = 1.0;
  return compose(random_orthogonal(rng, n), d);
}

inline double scalar_mcweeny(double x) { return 3 * x * x - 2 * x * x * x; }

// Uniform-grid 3D quadrature of phi_a(r) phi_b(r) e^{iK.r}. The 1D factors are
// tabulated per axis but the sum itself runs over the full 3D grid.
inline std::complex<double> quadrature_form_factor(const nrep::GaussianFunction &fa,
                                                   const nrep::GaussianFunction &fb,
                                                   const nrep::Vec3 &k, double h = 0.1,
                                                   double half_width = 8.0) {
  const int n = static_cast<int>(std::round(2 * half_width / h)) + 1;
  const double a = fa.exponent, b = fb.exponent;
  const double na = std::pow(2 * a / std::numbers::pi, 0.75);
  const double nb = std::pow(2 * b / std::numbers::pi, 0.75);
  std::vector<std::vector<std::complex<double>>> axis(3, std::vector<std::complex<double>>(n));
  for (int ax = 0; ax < 3; ++ax) {
    double mid = (a * fa.center(ax) + b * fb.center(ax)) / (a + b);
    for (int i = 0; i < n; ++i) {
      double x = mid - half_width + i * h;
      double ga = std::exp(-a * (x - fa.center(ax)) * (x - fa.center(ax)));
      double gb = std::exp(-b * (x - fb.center(ax)) * (x - fb.center(ax)));
      axis[ax][i] = ga * gb * std::polar(1.0, k(ax) * x);
    }
  }
  std::complex<double> sum = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto xy = axis[0][i] * axis[1][j];
      for (int l = 0; l < n; ++l) sum += xy * axis[2][l];
    }
  return sum * h * h * h * na * nb;
}

} // namespace oracle
