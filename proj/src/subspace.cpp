#include <nrep/error.h>
#include <nrep/parallel.h>
#include <nrep/subspace.h>

#include <cmath>
#include <fmt/core.h>
#include <optional>
#include <span>

namespace nrep {

DenseSymMatrix triple_product(const DenseSymMatrix &p_prime,
                              const DenseSymMatrix &p) {
  require_same_dim(p_prime.dim(), p.dim(), "triple_product");
  const Mat &x = p_prime.matrix();
  return DenseSymMatrix(x * p.matrix() * x);
}

double subspace_residual(const DenseSymMatrix &p_prime, const DenseSymMatrix &p) {
  Mat d = p_prime.matrix() - triple_product(p_prime, p).matrix();
  return (d * d).trace();
}

double constraint_target(const DenseSymMatrix &p_prime, const DenseSymMatrix &p) {
  require_same_dim(p_prime.dim(), p.dim(), "constraint_target");
  const Mat &x = p_prime.matrix();
  Mat xpx = x * p.matrix() * x;
  return (x * x * p.matrix() * x).trace() + (x * p.matrix() * x * x).trace() -
         (xpx * xpx).trace();
}

namespace {

struct LocalSolve {
  Mat x;
  double target{0.0};
  double residual{0.0};
  double idempotency{0.0};
  int iterations{0};
  std::vector<double> trail;
  std::string error;
};

/// Works on the kernel block A = P_BB. The cubic step is taken in the metric
/// of A (3 XAX - 2 XAXAX), whose fixed points are exactly X = XAX; the plain
/// 3X^2 - 2X^3 step would drive X toward idempotency, which together with
/// X = XAX only admits X = 0 once the kernel couples to its surroundings.
LocalSolve solve_block(const DenseSymMatrix &a, const PurificationOptions &opts,
                       bool strict) {
  LocalSolve out;
  out.target = std::round(a.trace());
  out.x = a.matrix();
  if (out.target <= 0.0) {
    out.x.setZero();
    out.target = 0.0;
    return out;
  }

  for (int iter = 0;; ++iter) {
    DenseSymMatrix x(out.x);
    out.residual = subspace_residual(x, a);
    out.idempotency = idempotency_residual(x);
    out.iterations = iter;
    out.trail.push_back(out.residual);
    double norm_err = std::abs(trace_product(x, a) - out.target);
    if (out.residual <= opts.constraint_tolerance &&
        norm_err <= opts.constraint_tolerance &&
        (!strict || out.idempotency <= opts.idempotency_tolerance)) {
      return out;
    }
    if (iter >= opts.max_iterations) {
      out.error = fmt::format("no convergence in {} iterations (residual "
                              "{:.3e}, normalization error {:.3e})",
                              opts.max_iterations, out.residual, norm_err);
      return out;
    }

    const Mat &am = a.matrix();
    Mat xax = out.x * am * out.x;
    DenseSymMatrix t(3.0 * xax - 2.0 * xax * am * out.x);

    // Normalization: electrons carried, tr(X A) = target. Subspace
    // constraint: O = X with target from the trace form of X = XAX,
    // evaluated on the post-step iterate.
    std::vector<ObservableConstraint> cons{
        {a, out.target, "normalization", ConstraintMode::exact},
        {t, constraint_target(t, a), "subspace", ConstraintMode::exact}};
    // Normalization-only step; the metric cubic already has X = XAX as its
    // fixed points. The subspace constraint is added when it lowers the true
    // residual, which it does except where O = X is nearly parallel to A.
    Vec norm_only = solve_multipliers(t, std::span(cons).first(1),
                                      opts.multiplier_regularization);
    Mat plain = t.matrix() + norm_only(0) * am;
    out.x = plain;
    try {
      Vec lambda = solve_multipliers(t, cons, opts.multiplier_regularization);
      Mat both = t.matrix() + lambda(0) * am + lambda(1) * t.matrix();
      if (both.allFinite() &&
          subspace_residual(DenseSymMatrix(both), a) <=
              subspace_residual(DenseSymMatrix(plain), a)) {
        out.x = both;
      }
    } catch (const IllConditionedError &) {
    }

    double tr = out.x.trace();
    if (!std::isfinite(tr) || out.x.norm() > 1e8) {
      out.error = fmt::format("iteration diverged at step {}", iter + 1);
      out.iterations = iter + 1;
      return out;
    }
    if (tr < 1e-6) {
      out.error = fmt::format("collapsed to P' = 0 (trace {:.3e}) at step {} "
                              "with positive target {}",
                              tr, iter + 1, out.target);
      out.iterations = iter + 1;
      return out;
    }
  }
}

} // namespace

std::vector<SubspaceKernel> decompose(const DenseSymMatrix &p,
                                      const FragmentScheme &scheme,
                                      const PurificationOptions &opts,
                                      const DecomposeSettings &settings) {
  opts.validate();
  require_same_dim(p.dim(), scheme.full_dim(), "decompose");
  std::vector<KernelId> ids = scheme.double_ids();
  for (const auto &id : scheme.single_ids()) ids.push_back(id);

  std::vector<std::optional<SubspaceKernel>> slots(ids.size());
  parallel_for(ids.size(), settings.workers, [&](std::size_t k) {
    auto idx = scheme.indices(ids[k]);
    DenseSymMatrix a = principal_block(p, idx);
    LocalSolve local = solve_block(a, opts, settings.strict_idempotency);
    DenseSymMatrix full = augment({ids[k], DenseSymMatrix(local.x), idx}, p.dim());
    SubspaceKernel out{ids[k],
                       full,
                       local.target,
                       full.trace(),
                       trace_product(full, p),
                       subspace_residual(full, p),
                       local.idempotency,
                       local.iterations,
                       local.error.empty(),
                       local.error,
                       std::move(local.trail)};
    slots[k] = std::move(out);
  });

  std::vector<SubspaceKernel> out;
  out.reserve(slots.size());
  for (auto &s : slots) out.push_back(std::move(*s));
  return out;
}

double reassembly_residual(const DenseSymMatrix &p,
                           const std::vector<SubspaceKernel> &kernels, int n) {
  std::size_t doubles = 0, singles = 0;
  Mat sum_d = Mat::Zero(p.dim(), p.dim());
  Mat sum_s = Mat::Zero(p.dim(), p.dim());
  for (const auto &k : kernels) {
    require_same_dim(k.p_prime.dim(), p.dim(), "reassembly kernel");
    if (k.id.is_double()) {
      ++doubles;
      sum_d += k.p_prime.matrix();
    } else {
      ++singles;
      sum_s += k.p_prime.matrix();
    }
  }
  const auto nn = static_cast<std::size_t>(n);
  if (n < 2 || doubles != nn * (nn - 1) / 2 || singles != nn) {
    throw Error(ErrorKind::domain,
                fmt::format("incomplete kernel set for n = {}: {} doubles, {} "
                            "singles",
                            n, doubles, singles));
  }
  return (p.matrix() - (sum_d - static_cast<double>(n - 2) * sum_s)).norm();
}

} // namespace nrep
