#pragma once

#include <nrep/kem.h>
#include <nrep/matrix.h>
#include <nrep/purification.h>

#include <string>
#include <vector>

namespace nrep {

/// A kernel matrix P' supported on one kernel's (index x index) block that
/// satisfies P' = P' P P' for the full-system projector P.
struct SubspaceKernel {
  KernelId id;
  DenseSymMatrix p_prime;     // full dim, exactly zero outside the block
  double trace_target{0.0};   // electrons carried: tr(P' P) at convergence
  double trace_value{0.0};    // tr(P')
  double electron_count{0.0}; // tr(P' P)
  double residual{0.0};       // tr((P' - P'PP')^2)
  double idempotency{0.0};    // ||P'^2 - P'||_F, informational
  int iterations{0};
  bool converged{false};
  std::string error;          // empty when converged
  std::vector<double> residual_trail;
};

/// P' P P'.
DenseSymMatrix triple_product(const DenseSymMatrix &p_prime,
                              const DenseSymMatrix &p);

/// tr((P' - P'PP')^2).
double subspace_residual(const DenseSymMatrix &p_prime, const DenseSymMatrix &p);

/// tr(P'^2 P P' + P' P P'^2 - (P'PP')^2): the value tr(P' P') must take when
/// P' = P'PP' holds.
double constraint_target(const DenseSymMatrix &p_prime, const DenseSymMatrix &p);

struct DecomposeSettings {
  int workers{1};
  /// Additionally require ||P'^2 - P'||_F <= idempotency tolerance.
  bool strict_idempotency{false};
};

/// Per-kernel solve of P' = P'PP' with a normalization and the trace-form
/// subspace constraint. Failures are reported on the kernel, never thrown.
std::vector<SubspaceKernel> decompose(const DenseSymMatrix &p,
                                      const FragmentScheme &scheme,
                                      const PurificationOptions &opts = {},
                                      const DecomposeSettings &settings = {});

/// ||P - (sum P'_d - (n - 2) sum P'_s)||_F.
double reassembly_residual(const DenseSymMatrix &p,
                           const std::vector<SubspaceKernel> &kernels, int n);

} // namespace nrep
