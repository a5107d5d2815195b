#include <nrep/purification.h>

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>

namespace nrep {

namespace {

constexpr double gram_condition_limit = 1e12;
constexpr double pinv_rcond = 1e-10;
constexpr double half_band = 1e-8;
constexpr double basin_margin = 0.25;
constexpr int stagnation_window = 10;

Mat gram_matrix(std::span<const DenseSymMatrix> ops) {
  const Index m = static_cast<Index>(ops.size());
  Mat g(m, m);
  for (Index j = 0; j < m; ++j) {
    for (Index k = 0; k <= j; ++k) {
      g(j, k) = g(k, j) = trace_product(ops[j], ops[k]);
    }
  }
  return g;
}

/// Minimum-norm least-squares solution of G lambda = r.
Vec pseudo_inverse_solve(const Mat &g, const Vec &r) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(g);
  const Vec &w = eig.eigenvalues();
  const Mat &v = eig.eigenvectors();
  double cutoff = pinv_rcond * std::max(w.cwiseAbs().maxCoeff(), 0.0);
  Vec coeff = v.transpose() * r;
  for (Index i = 0; i < w.size(); ++i) {
    coeff(i) = w(i) > cutoff && w(i) > 0.0 ? coeff(i) / w(i) : 0.0;
  }
  return v * coeff;
}

/// Projection onto the tangent space of the projector manifold at E:
/// X -> E X Q + Q X E with Q = I - E.
DenseSymMatrix tangent_projection(const Mat &e, const DenseSymMatrix &x) {
  Mat q = Mat::Identity(e.rows(), e.cols()) - e;
  Mat exq = e * x.matrix() * q;
  return DenseSymMatrix(exq + exq.transpose());
}

Mat spectral_projector(const DenseSymMatrix &t) {
  auto eig = sym_eigendecompose(t);
  Mat e = Mat::Zero(t.dim(), t.dim());
  for (Index i = 0; i < eig.eigenvalues.size(); ++i) {
    if (eig.eigenvalues(i) > 0.5) {
      e += eig.eigenvectors.col(i) * eig.eigenvectors.col(i).transpose();
    }
  }
  return e;
}

} // namespace

void PurificationOptions::validate() const {
  if (max_iterations < 1) {
    throw Error(ErrorKind::domain, "max_iterations must be positive");
  }
  if (!(idempotency_tolerance > 0.0) || !(constraint_tolerance > 0.0) ||
      !(multiplier_regularization > 0.0)) {
    throw Error(ErrorKind::domain, "purification tolerances must be positive");
  }
}

DenseSymMatrix mcweeny_step(const DenseSymMatrix &p) {
  const Mat &m = p.matrix();
  Mat p2 = m * m;
  return DenseSymMatrix(3.0 * p2 - 2.0 * p2 * m);
}

Vec solve_multipliers(const DenseSymMatrix &t,
                      std::span<const ObservableConstraint> constraints,
                      double regularization) {
  if (constraints.empty()) {
    throw Error(ErrorKind::domain, "solve_multipliers needs at least one "
                                   "constraint");
  }
  const Index m = static_cast<Index>(constraints.size());
  std::vector<DenseSymMatrix> ops;
  ops.reserve(constraints.size());
  Vec rhs(m);
  for (Index j = 0; j < m; ++j) {
    const auto &c = constraints[j];
    require_same_dim(c.matrix.dim(), t.dim(), "constraint matrix");
    ops.push_back(c.matrix);
    rhs(j) = c.target - trace_product(t, c.matrix);
  }
  Mat g = gram_matrix(ops);
  g.diagonal().array() += regularization;

  Eigen::SelfAdjointEigenSolver<Mat> eig(g, Eigen::EigenvaluesOnly);
  double lo = eig.eigenvalues()(0);
  double hi = eig.eigenvalues()(m - 1);
  double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond <= gram_condition_limit)) {
    throw IllConditionedError(cond);
  }
  return g.ldlt().solve(rhs);
}

Projector clinton_iterate(const DenseSymMatrix &p0, double trace_target,
                          std::span<const ObservableConstraint> extra,
                          const PurificationOptions &opts) {
  opts.validate();
  const Index dim = p0.dim();
  if (!(trace_target > 0.0) || trace_target > static_cast<double>(dim)) {
    throw Error(ErrorKind::domain,
                fmt::format("trace target {} outside (0, {}]", trace_target,
                            dim));
  }

  std::vector<ObservableConstraint> exact;
  std::vector<ObservableConstraint> fitted;
  std::vector<const ObservableConstraint *> ordered;
  exact.push_back({DenseSymMatrix::identity(dim), trace_target,
                   "normalization", ConstraintMode::exact});
  for (const auto &c : extra) {
    require_same_dim(c.matrix.dim(), dim, "constraint matrix");
    (c.mode == ConstraintMode::exact ? exact : fitted).push_back(c);
  }
  ordered.push_back(&exact.front());
  {
    std::size_t ie = 1, iff = 0;
    for (const auto &c : extra) {
      ordered.push_back(c.mode == ConstraintMode::exact ? &exact[ie++]
                                                        : &fitted[iff++]);
    }
  }

  std::vector<ResidualRecord> trajectory;
  DenseSymMatrix p = p0;
  double ls_step = fitted.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  int near_half = 0;

  auto exact_residual = [&](const DenseSymMatrix &x) {
    double worst = 0.0;
    for (const auto &c : exact) {
      worst = std::max(worst, std::abs(trace_product(x, c.matrix) - c.target));
    }
    return worst;
  };

  auto apply_exact = [&](const Mat &t) {
    DenseSymMatrix ts(t);
    Vec lambda = solve_multipliers(ts, exact, opts.multiplier_regularization);
    Mat next = t;
    for (std::size_t k = 0; k < exact.size(); ++k) {
      next += lambda(static_cast<Index>(k)) * exact[k].matrix.matrix();
    }
    return DenseSymMatrix(next);
  };

  for (int iter = 0;; ++iter) {
    double idem = idempotency_residual(p);
    double cres = exact_residual(p);
    trajectory.push_back({idem, fitted.empty() ? cres : std::max(cres, ls_step)});

    if (idem <= opts.idempotency_tolerance &&
        cres <= opts.constraint_tolerance &&
        ls_step <= opts.constraint_tolerance) {
      Projector out{p, trace_target, idem, {}, {}, iter, fitted.empty() ? 0.0 : ls_step,
                    std::move(trajectory)};
      for (const auto *c : ordered) {
        out.residual_constraints.push_back(
            std::abs(trace_product(p, c->matrix) - c->target));
        out.constraint_labels.push_back(c->label);
      }
      return out;
    }
    if (iter >= opts.max_iterations) {
      std::string msg = fmt::format(
          "purification did not converge in {} iterations (idempotency "
          "residual {:.3e}, constraint residual {:.3e})",
          opts.max_iterations, idem, trajectory.back().constraint);
      throw ConvergenceError(ErrorKind::non_convergence, msg,
                             std::move(trajectory), iter);
    }

    auto eig = sym_eigendecompose(p);
    bool at_half = (eig.eigenvalues.array() - 0.5).abs().minCoeff() <= half_band;
    near_half = at_half ? near_half + 1 : 0;
    if (near_half >= stagnation_window) {
      throw ConvergenceError(
          ErrorKind::stagnation,
          fmt::format("an eigenvalue stayed within {:.0e} of 1/2 for {} "
                      "consecutive iterations; occupancy is undetermined",
                      half_band, stagnation_window),
          std::move(trajectory), iter);
    }

    DenseSymMatrix t = mcweeny_step(p);

    if (!fitted.empty()) {
      // The first step anchors the iterate to the data in the full space;
      // afterwards only tangent directions are fitted, the normal directions
      // being restored by the cubic step.
      std::vector<DenseSymMatrix> ops;
      ops.reserve(fitted.size());
      if (iter == 0) {
        for (const auto &c : fitted) ops.push_back(c.matrix);
      } else {
        Mat e = spectral_projector(t);
        for (const auto &c : fitted) ops.push_back(tangent_projection(e, c.matrix));
      }
      Vec rhs(static_cast<Index>(fitted.size()));
      for (std::size_t k = 0; k < fitted.size(); ++k) {
        rhs(k) = fitted[k].target - trace_product(t, fitted[k].matrix);
      }
      Vec lambda = pseudo_inverse_solve(gram_matrix(ops), rhs);
      Mat step = Mat::Zero(dim, dim);
      for (std::size_t k = 0; k < ops.size(); ++k) {
        step += lambda(static_cast<Index>(k)) * ops[k].matrix();
      }
      // A data step that throws eigenvalues far outside [0, 1] leaves the
      // basin of the cubic map; shorten it until the spectrum is tame.
      double scale = 1.0;
      for (int cut = 0; cut < 40; ++cut) {
        auto spec = sym_eigendecompose(apply_exact(t.matrix() + scale * step)).eigenvalues;
        if (spec(0) >= -basin_margin && spec(dim - 1) <= 1.0 + basin_margin) break;
        scale *= 0.5;
      }
      ls_step = step.norm();
      t = DenseSymMatrix(t.matrix() + scale * step);
    }

    Mat next = apply_exact(t.matrix()).matrix();
    p = DenseSymMatrix(next);

    double norm = p.frobenius_norm();
    if (!std::isfinite(norm) || norm > 10.0 * static_cast<double>(dim)) {
      trajectory.push_back({idempotency_residual(p), exact_residual(p)});
      throw ConvergenceError(
          ErrorKind::divergence,
          fmt::format("purification diverged at iteration {} (||P||_F = "
                      "{:.3e} > {})",
                      iter + 1, norm, 10 * dim),
          std::move(trajectory), iter + 1);
    }
  }
}

Vec occupation_spectrum(const Projector &p) {
  return sym_eigendecompose(p.P).eigenvalues;
}

} // namespace nrep
