#include <nrep/parallel.h>
#include <nrep/scattering.h>

#include <cmath>
#include <fmt/core.h>
#include <numbers>
#include <random>

namespace nrep {

GaussianBasis::GaussianBasis(std::vector<GaussianFunction> functions,
                             std::string label)
    : m_functions(std::move(functions)), m_label(std::move(label)) {
  if (m_functions.empty()) {
    throw Error(ErrorKind::domain, "Gaussian basis needs at least one function");
  }
  for (std::size_t i = 0; i < m_functions.size(); ++i) {
    if (!(m_functions[i].exponent > 0.0) ||
        !std::isfinite(m_functions[i].exponent)) {
      throw Error(ErrorKind::domain,
                  fmt::format("basis function {} has non-positive exponent {}",
                              i, m_functions[i].exponent));
    }
  }
}

Vec GaussianBasis::values_at(const Vec3 &r) const {
  Vec out(size());
  for (Index i = 0; i < size(); ++i) {
    const auto &g = m_functions[static_cast<std::size_t>(i)];
    double norm = std::pow(2.0 * g.exponent / std::numbers::pi, 0.75);
    out(i) = norm * std::exp(-g.exponent * (r - g.center).squaredNorm());
  }
  return out;
}

void ScatteringDataset::validate() const {
  for (std::size_t i = 0; i < reflections.size(); ++i) {
    if (!(reflections[i].sigma >= 0.0)) {
      throw Error(ErrorKind::domain,
                  fmt::format("reflection {} has negative sigma", i));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (reflections[i].k == reflections[j].k) {
        throw Error(ErrorKind::domain,
                    fmt::format("reflections {} and {} share the same K", j, i));
      }
    }
  }
}

namespace {

struct PairTerms {
  double overlap;
  double p;
  Vec3 center;
};

PairTerms gaussian_pair(const GaussianFunction &a, const GaussianFunction &b) {
  double p = a.exponent + b.exponent;
  double mu = a.exponent * b.exponent / p;
  double d2 = (a.center - b.center).squaredNorm();
  double s = std::pow(4.0 * mu / p, 0.75) * std::exp(-mu * d2);
  return {s, p, (a.exponent * a.center + b.exponent * b.center) / p};
}

} // namespace

DenseSymMatrix overlap_matrix(const GaussianBasis &basis) {
  const Index n = basis.size();
  const auto &fs = basis.functions();
  Mat s(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      s(i, j) = s(j, i) = gaussian_pair(fs[i], fs[j]).overlap;
    }
  }
  return DenseSymMatrix(s);
}

FormFactorMatrix form_factor_matrix(const GaussianBasis &basis, const Vec3 &k) {
  const Index n = basis.size();
  const auto &fs = basis.functions();
  Mat re(n, n), im(n, n);
  const double k2 = k.squaredNorm();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      auto t = gaussian_pair(fs[i], fs[j]);
      double damp = t.overlap * std::exp(-k2 / (4.0 * t.p));
      double phase = k.dot(t.center);
      re(i, j) = re(j, i) = damp * std::cos(phase);
      im(i, j) = im(j, i) = damp * std::sin(phase);
    }
  }
  return {DenseSymMatrix(re), DenseSymMatrix(im), k};
}

FormFactorMatrix to_orthonormal(const FormFactorMatrix &f,
                                const DenseSymMatrix &s_inv_sqrt) {
  require_same_dim(f.real_part.dim(), s_inv_sqrt.dim(), "to_orthonormal");
  const Mat &x = s_inv_sqrt.matrix();
  return {DenseSymMatrix(x * f.real_part.matrix() * x),
          DenseSymMatrix(x * f.imag_part.matrix() * x), f.k};
}

std::vector<FormFactorMatrix>
orthonormal_form_factors(const GaussianBasis &basis, std::span<const Vec3> ks,
                         int workers) {
  DenseSymMatrix s_inv_sqrt = fractional_power(overlap_matrix(basis), -0.5);
  std::vector<std::optional<FormFactorMatrix>> slots(ks.size());
  parallel_for(ks.size(), workers, [&](std::size_t i) {
    slots[i] = to_orthonormal(form_factor_matrix(basis, ks[i]), s_inv_sqrt);
  });
  std::vector<FormFactorMatrix> out;
  out.reserve(ks.size());
  for (auto &s : slots) out.push_back(std::move(*s));
  return out;
}

Complex structure_factor(const DenseSymMatrix &p, const FormFactorMatrix &f) {
  require_same_dim(p.dim(), f.real_part.dim(), "structure_factor");
  return {2.0 * trace_product(p, f.real_part),
          2.0 * trace_product(p, f.imag_part)};
}

double r_factor(std::span<const Complex> observed,
                std::span<const Complex> calculated) {
  if (observed.empty()) {
    throw Error(ErrorKind::domain, "r_factor: no reflections");
  }
  if (observed.size() != calculated.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("r_factor: {} observed vs {} calculated",
                            observed.size(), calculated.size()));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    num += std::abs(std::abs(observed[i]) - std::abs(calculated[i]));
    den += std::abs(observed[i]);
  }
  if (!(den > 0.0)) {
    throw Error(ErrorKind::domain, "r_factor: all observed amplitudes are zero");
  }
  return num / den;
}

ScatteringDataset synthesize_dataset(const DenseSymMatrix &p_ref,
                                     const GaussianBasis &basis,
                                     std::span<const Vec3> ks,
                                     double noise_sigma, std::uint64_t seed,
                                     int workers) {
  if (!(noise_sigma >= 0.0)) {
    throw Error(ErrorKind::domain, "noise sigma must be non-negative");
  }
  require_same_dim(p_ref.dim(), basis.size(), "synthesize_dataset");
  auto ffs = orthonormal_form_factors(basis, ks, workers);
  ScatteringDataset out;
  out.basis_label = basis.label();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    Complex f = structure_factor(p_ref, ffs[i]);
    if (noise_sigma > 0.0) {
      // Draw order (re, im) per reflection keeps output seed-stable.
      double dre = noise_sigma * noise(rng);
      double dimag = noise_sigma * noise(rng);
      f += Complex(dre, dimag);
    }
    out.reflections.push_back({ks[i], f, noise_sigma});
  }
  return out;
}

FitResult fit_projector(const ScatteringDataset &dataset,
                        const GaussianBasis &basis, double trace_target,
                        const std::optional<DenseSymMatrix> &p0,
                        const PurificationOptions &opts, int workers) {
  dataset.validate();
  const Index dim = basis.size();
  std::vector<Vec3> ks;
  ks.reserve(dataset.reflections.size());
  for (const auto &r : dataset.reflections) ks.push_back(r.k);
  auto ffs = orthonormal_form_factors(basis, ks, workers);

  std::vector<ObservableConstraint> constraints;
  for (std::size_t i = 0; i < ffs.size(); ++i) {
    const auto &refl = dataset.reflections[i];
    auto add = [&](const DenseSymMatrix &part, double target, const char *tag) {
      DenseSymMatrix op = 2.0 * part;
      // Im f(0) and other vanishing operators carry no information.
      if (op.frobenius_norm() < 1e-14) return;
      constraints.push_back({op, target, fmt::format("{}F[{}]", tag, i),
                             ConstraintMode::least_squares});
    };
    add(ffs[i].real_part, refl.f.real(), "Re");
    add(ffs[i].imag_part, refl.f.imag(), "Im");
  }

  FitResult result{
      Projector{DenseSymMatrix::zero(dim), trace_target, 0.0, {}, {}, 0, 0.0, {}},
      0.0, {}, 0, dim * (dim + 1) / 2, {}};

  // Numerical rank of {I} + data operators in the Frobenius inner product.
  {
    const Index m = static_cast<Index>(constraints.size()) + 1;
    Mat g(m, m);
    std::vector<const DenseSymMatrix *> ops;
    DenseSymMatrix id = DenseSymMatrix::identity(dim);
    ops.push_back(&id);
    for (const auto &c : constraints) ops.push_back(&c.matrix);
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k <= j; ++k)
        g(j, k) = g(k, j) = trace_product(*ops[j], *ops[k]);
    Eigen::SelfAdjointEigenSolver<Mat> eig(g, Eigen::EigenvaluesOnly);
    double cutoff = 1e-10 * eig.eigenvalues().cwiseAbs().maxCoeff();
    result.independent_constraints = (eig.eigenvalues().array() > cutoff).count();
  }
  if (result.independent_constraints < result.free_parameters) {
    result.warnings.push_back(fmt::format(
        "under-determined: {} independent constraints for {} free density "
        "matrix parameters; the data cannot fix P uniquely",
        result.independent_constraints, result.free_parameters));
  }

  DenseSymMatrix start =
      p0 ? *p0 : DenseSymMatrix::identity(dim) * (trace_target / static_cast<double>(dim));
  require_same_dim(start.dim(), dim, "fit initial matrix");
  result.projector = clinton_iterate(start, trace_target, constraints, opts);

  std::vector<Complex> observed;
  for (std::size_t i = 0; i < ffs.size(); ++i) {
    observed.push_back(dataset.reflections[i].f);
    result.calculated.push_back(structure_factor(result.projector.P, ffs[i]));
  }
  result.r_factor = r_factor(observed, result.calculated);
  return result;
}

std::vector<double> density_on_grid(const DenseSymMatrix &p,
                                    const GaussianBasis &basis,
                                    const DenseSymMatrix &s_inv_sqrt,
                                    std::span<const Vec3> grid) {
  require_same_dim(p.dim(), basis.size(), "density_on_grid");
  require_same_dim(s_inv_sqrt.dim(), basis.size(), "density_on_grid");
  std::vector<double> rho;
  rho.reserve(grid.size());
  for (const auto &r : grid) {
    Vec chi = s_inv_sqrt.matrix() * basis.values_at(r);
    rho.push_back(2.0 * chi.dot(p.matrix() * chi));
  }
  return rho;
}

} // namespace nrep
