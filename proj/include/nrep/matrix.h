#pragma once

#include <Eigen/Dense>

namespace nrep {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Index = Eigen::Index;

/// Real symmetric dense matrix. Every density matrix, overlap, observable and
/// Hamiltonian in the library is carried by this type.
///
/// Construction averages (A + A^T)/2 and keeps the largest pre-averaging
/// deviation |A_ij - A_ji| so callers can audit how symmetric the input was.
class DenseSymMatrix {
public:
  explicit DenseSymMatrix(const Mat &m);

  /// Rejects inputs whose asymmetry exceeds tol * max(1, |A_ij|).
  static DenseSymMatrix checked(const Mat &m, double tol = 1e-12);
  static DenseSymMatrix identity(Index n);
  static DenseSymMatrix zero(Index n);
  static DenseSymMatrix diagonal(const Vec &d);

  Index dim() const noexcept { return m_data.rows(); }
  const Mat &matrix() const noexcept { return m_data; }
  double operator()(Index i, Index j) const { return m_data(i, j); }
  double asymmetry() const noexcept { return m_asymmetry; }

  double trace() const { return m_data.trace(); }
  double frobenius_norm() const { return m_data.norm(); }

  DenseSymMatrix operator+(const DenseSymMatrix &o) const;
  DenseSymMatrix operator-(const DenseSymMatrix &o) const;
  DenseSymMatrix operator*(double s) const;

private:
  Mat m_data;
  double m_asymmetry{0.0};
};

inline DenseSymMatrix operator*(double s, const DenseSymMatrix &a) {
  return a * s;
}

struct EigenDecomposition {
  Vec eigenvalues;  // ascending
  Mat eigenvectors; // columns, orthonormal
};

EigenDecomposition sym_eigendecompose(const DenseSymMatrix &a);

/// S^{+1/2} or S^{-1/2} for symmetric positive definite S. Any eigenvalue at
/// or below 1e-10 raises SingularOverlapError.
DenseSymMatrix fractional_power(const DenseSymMatrix &s, double exponent);

/// tr(AB).
double trace_product(const DenseSymMatrix &a, const DenseSymMatrix &b);

/// ||P^2 - P||_F.
double idempotency_residual(const DenseSymMatrix &p);

/// Q diag(f(lambda)) Q^T.
template <typename F>
DenseSymMatrix spectral_map(const EigenDecomposition &eig, F &&f) {
  Vec mapped = eig.eigenvalues.unaryExpr(f);
  return DenseSymMatrix(eig.eigenvectors * mapped.asDiagonal() *
                        eig.eigenvectors.transpose());
}

void require_same_dim(Index a, Index b, const char *what);

} // namespace nrep
