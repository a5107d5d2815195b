#pragma once

#include <nrep/matrix.h>
#include <nrep/purification.h>

#include <optional>
#include <string>
#include <vector>

namespace nrep {

/// Single kernel i, or double kernel (i, j) with i < j.
struct KernelId {
  int first{0};
  int second{-1};

  bool is_double() const noexcept { return second >= 0; }
  std::string to_string() const;
  friend bool operator==(const KernelId &, const KernelId &) = default;
};

/// Partition of the full basis into disjoint single kernels. Double kernels
/// are all unions of two singles.
class FragmentScheme {
public:
  FragmentScheme(Index full_dim, std::vector<std::vector<Index>> singles);

  Index full_dim() const noexcept { return m_full_dim; }
  int n() const noexcept { return static_cast<int>(m_singles.size()); }
  const std::vector<std::vector<Index>> &singles() const noexcept {
    return m_singles;
  }
  /// Two kernels split nothing: the double kernel is the whole system.
  bool is_degenerate() const noexcept { return n() == 2; }

  /// Sorted basis indices of a kernel.
  std::vector<Index> indices(const KernelId &id) const;
  /// Doubles in (0,1), (0,2), ..., (n-2,n-1) order.
  std::vector<KernelId> double_ids() const;
  std::vector<KernelId> single_ids() const;

private:
  Index m_full_dim;
  std::vector<std::vector<Index>> m_singles;
};

struct KernelDensity {
  KernelId id;
  DenseSymMatrix local;
  std::vector<Index> index_map;
};

/// Per-kernel values of a scalar (length 1) or vector property.
struct KemProperty {
  std::vector<Vec> doubles;
  std::vector<Vec> singles;
  int n{0};
};

/// sum doubles - (n - 2) sum singles, componentwise.
Vec kem_combine(const KemProperty &prop);

/// Zero-padded embedding of a kernel matrix into the full dimension.
DenseSymMatrix augment(const KernelDensity &kernel, Index full_dim);

/// R_KEM = sum R_d^aug - (n - 2) sum R_s^aug.
DenseSymMatrix assemble_r_kem(const FragmentScheme &scheme,
                              const std::vector<KernelDensity> &doubles,
                              const std::vector<KernelDensity> &singles);

/// S^{1/2} R S^{1/2}.
DenseSymMatrix lowdin_initial_iterant(const DenseSymMatrix &r_kem,
                                      const DenseSymMatrix &s);

/// Purify the assembled iterant with the normalization constraint only.
Projector purify_assembled(const DenseSymMatrix &p0, double trace_target,
                           const PurificationOptions &opts = {});

/// E = 2 tr(P H) for a closed-shell projector.
double model_energy(const DenseSymMatrix &p, const DenseSymMatrix &h);

/// Projector onto the n_occ lowest eigenvectors of H.
DenseSymMatrix aufbau_projector(const DenseSymMatrix &h, Index n_occ);

/// Atomic-orbital density C_occ C_occ^T of the generalized problem
/// H C = S C e, so that R S R = R and S^{1/2} R S^{1/2} is a projector.
DenseSymMatrix aufbau_density(const DenseSymMatrix &h, const DenseSymMatrix &s,
                              Index n_occ);

struct ToyKernelSet {
  std::vector<KernelDensity> doubles;
  std::vector<KernelDensity> singles;
};

/// Kernel densities from the Aufbau densities of each kernel's block of H
/// (and S, if given). Singles carry occupations[i] orbitals, doubles the sum.
ToyKernelSet toy_kernel_densities(const FragmentScheme &scheme,
                                  const DenseSymMatrix &h,
                                  const std::optional<DenseSymMatrix> &s,
                                  const std::vector<Index> &occupations,
                                  int workers = 1);

/// Principal submatrix on the given sorted indices.
DenseSymMatrix principal_block(const DenseSymMatrix &a,
                               const std::vector<Index> &indices);

} // namespace nrep
