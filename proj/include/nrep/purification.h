#pragma once

#include <nrep/error.h>
#include <nrep/matrix.h>

#include <span>
#include <string>
#include <vector>

namespace nrep {

/// How the iteration enforces a constraint.
///
/// exact: tr(P O) = target is imposed after every step through the Gram
/// system of all exact constraints. The trace normalization is always exact.
///
/// least_squares: the constraint set is fitted in the least-squares sense on
/// the tangent space of the projector manifold (after one full-space anchoring
/// step). Used for redundant or noisy measurements that no projector can meet
/// exactly; the reported residual is then a misfit, not a tolerance check.
enum class ConstraintMode { exact, least_squares };

struct ObservableConstraint {
  DenseSymMatrix matrix;
  double target{0.0};
  std::string label;
  ConstraintMode mode{ConstraintMode::exact};
};

struct PurificationOptions {
  int max_iterations{500};
  double idempotency_tolerance{1e-10};
  double constraint_tolerance{1e-10};
  double multiplier_regularization{1e-12};

  void validate() const;
};

/// Converged output of the constrained purification.
struct Projector {
  DenseSymMatrix P;
  double trace_target{0.0};
  double residual_idempotency{0.0};
  /// |tr(P O_k) - target_k|, normalization first, then the extra constraints
  /// in the order supplied.
  std::vector<double> residual_constraints;
  std::vector<std::string> constraint_labels;
  int iterations_used{0};
  /// Norm of the last least-squares step (0 when no such constraints).
  double least_squares_step{0.0};
  std::vector<ResidualRecord> trajectory;
};

/// 3P^2 - 2P^3.
DenseSymMatrix mcweeny_step(const DenseSymMatrix &p);

/// Multipliers lambda with sum_k G_jk lambda_k = target_j - tr(T O_j), where
/// G_jk = tr(O_j O_k) + regularization * delta_jk.
Vec solve_multipliers(const DenseSymMatrix &t,
                      std::span<const ObservableConstraint> constraints,
                      double regularization);

/// Clinton iteration: P <- 3P^2 - 2P^3 + sum_k lambda_k O_k with the trace
/// normalization tr P = trace_target always included as constraint 0.
Projector clinton_iterate(const DenseSymMatrix &p0, double trace_target,
                          std::span<const ObservableConstraint> extra,
                          const PurificationOptions &opts = {});

/// Ascending eigenvalues of the projector.
Vec occupation_spectrum(const Projector &p);

} // namespace nrep
