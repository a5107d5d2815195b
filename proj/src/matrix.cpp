#include <nrep/error.h>
#include <nrep/matrix.h>

#include <cmath>
#include <fmt/core.h>

namespace nrep {

namespace {

double max_asymmetry(const Mat &m, double rel_floor, Index *bad_i,
                     Index *bad_j, double tol) {
  double worst = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = j + 1; i < m.rows(); ++i) {
      double dev = std::abs(m(i, j) - m(j, i));
      worst = std::max(worst, dev);
      double scale = std::max(rel_floor, std::abs(m(i, j)));
      if (bad_i && dev > tol * scale) {
        *bad_i = i;
        *bad_j = j;
        return dev;
      }
    }
  }
  return worst;
}

} // namespace

DenseSymMatrix::DenseSymMatrix(const Mat &m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("symmetric matrix must be square with dim >= 1, "
                            "got {}x{}",
                            m.rows(), m.cols()));
  }
  m_asymmetry = max_asymmetry(m, 1.0, nullptr, nullptr, 0.0);
  m_data = 0.5 * (m + m.transpose());
}

DenseSymMatrix DenseSymMatrix::checked(const Mat &m, double tol) {
  if (m.rows() == m.cols()) {
    Index i = -1, j = -1;
    double dev = max_asymmetry(m, 1.0, &i, &j, tol);
    if (i >= 0) {
      throw Error(ErrorKind::domain,
                  fmt::format("matrix is not symmetric: |A[{}][{}] - "
                              "A[{}][{}]| = {:.3e}",
                              i, j, j, i, dev));
    }
  }
  return DenseSymMatrix(m);
}

DenseSymMatrix DenseSymMatrix::identity(Index n) {
  return DenseSymMatrix(Mat::Identity(n, n));
}

DenseSymMatrix DenseSymMatrix::zero(Index n) {
  return DenseSymMatrix(Mat::Zero(n, n));
}

DenseSymMatrix DenseSymMatrix::diagonal(const Vec &d) {
  return DenseSymMatrix(Mat(d.asDiagonal()));
}

DenseSymMatrix DenseSymMatrix::operator+(const DenseSymMatrix &o) const {
  require_same_dim(dim(), o.dim(), "matrix sum");
  return DenseSymMatrix(m_data + o.m_data);
}

DenseSymMatrix DenseSymMatrix::operator-(const DenseSymMatrix &o) const {
  require_same_dim(dim(), o.dim(), "matrix difference");
  return DenseSymMatrix(m_data - o.m_data);
}

DenseSymMatrix DenseSymMatrix::operator*(double s) const {
  return DenseSymMatrix(m_data * s);
}

void require_same_dim(Index a, Index b, const char *what) {
  if (a != b) {
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("{}: dimension mismatch ({} vs {})", what, a, b));
  }
}

EigenDecomposition sym_eigendecompose(const DenseSymMatrix &a) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    // Eigen's tridiagonal QR gives up after 30*n sweeps.
    throw Error(ErrorKind::non_convergence,
                fmt::format("symmetric eigensolver did not converge within {} "
                            "iterations (dim {})",
                            30 * a.dim(), a.dim()));
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

DenseSymMatrix fractional_power(const DenseSymMatrix &s, double exponent) {
  if (exponent != 0.5 && exponent != -0.5) {
    throw Error(ErrorKind::domain,
                fmt::format("fractional_power supports exponents +-1/2, got {}",
                            exponent));
  }
  auto eig = sym_eigendecompose(s);
  double smallest = eig.eigenvalues(0);
  if (!(smallest > 1e-10)) {
    throw SingularOverlapError(smallest);
  }
  return spectral_map(eig, [exponent](double x) { return std::pow(x, exponent); });
}

double trace_product(const DenseSymMatrix &a, const DenseSymMatrix &b) {
  require_same_dim(a.dim(), b.dim(), "trace_product");
  // Both symmetric, so tr(AB) is the elementwise dot product.
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

double idempotency_residual(const DenseSymMatrix &p) {
  const Mat &m = p.matrix();
  return (m * m - m).norm();
}

} // namespace nrep
