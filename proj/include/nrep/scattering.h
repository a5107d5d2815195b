#pragma once

#include <nrep/matrix.h>
#include <nrep/purification.h>

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nrep {

using Complex = std::complex<double>;

/// Normalized s-type Gaussian (2a/pi)^{3/4} exp(-a |r - c|^2). Bohr units.
struct GaussianFunction {
  Vec3 center{Vec3::Zero()};
  double exponent{1.0};
};

class GaussianBasis {
public:
  GaussianBasis() = default;
  explicit GaussianBasis(std::vector<GaussianFunction> functions,
                         std::string label = "");

  Index size() const noexcept { return static_cast<Index>(m_functions.size()); }
  const std::vector<GaussianFunction> &functions() const noexcept {
    return m_functions;
  }
  const std::string &label() const noexcept { return m_label; }

  /// Values of every basis function at r.
  Vec values_at(const Vec3 &r) const;

private:
  std::vector<GaussianFunction> m_functions;
  std::string m_label;
};

struct Reflection {
  Vec3 k{Vec3::Zero()}; // bohr^-1
  Complex f;
  double sigma{0.0};
};

struct ScatteringDataset {
  std::vector<Reflection> reflections;
  std::string basis_label;

  void validate() const;
};

/// f_{mu nu}(K) = int phi_mu(r) e^{iK.r} phi_nu(r) dr. Both parts are
/// symmetric for real basis functions.
struct FormFactorMatrix {
  DenseSymMatrix real_part;
  DenseSymMatrix imag_part;
  Vec3 k;
};

DenseSymMatrix overlap_matrix(const GaussianBasis &basis);

FormFactorMatrix form_factor_matrix(const GaussianBasis &basis, const Vec3 &k);

/// f -> S^{-1/2} f S^{-1/2}.
FormFactorMatrix to_orthonormal(const FormFactorMatrix &f,
                                const DenseSymMatrix &s_inv_sqrt);

/// Form factors for a list of K in the Loewdin-orthonormal basis. Independent
/// per K; `workers` > 1 spreads them over threads, order is preserved.
std::vector<FormFactorMatrix>
orthonormal_form_factors(const GaussianBasis &basis, std::span<const Vec3> ks,
                         int workers = 1);

/// F(K) = 2 tr(P f(K)).
Complex structure_factor(const DenseSymMatrix &p, const FormFactorMatrix &f);

/// sum | |F_obs| - |F_calc| | / sum |F_obs|.
double r_factor(std::span<const Complex> observed,
                std::span<const Complex> calculated);

/// Structure factors of an orthonormal-basis projector, plus independent
/// N(0, noise_sigma) noise on real and imaginary parts.
ScatteringDataset synthesize_dataset(const DenseSymMatrix &p_ref,
                                     const GaussianBasis &basis,
                                     std::span<const Vec3> ks,
                                     double noise_sigma, std::uint64_t seed,
                                     int workers = 1);

struct FitResult {
  Projector projector;
  double r_factor{0.0};
  std::vector<Complex> calculated;
  Index independent_constraints{0};
  Index free_parameters{0};
  std::vector<std::string> warnings;
};

/// Fit an orthonormal-basis projector to the reflections. Each reflection
/// contributes Re and Im constraints 2 tr(P f_Omega(K)) = F(K), fitted in the
/// least-squares sense so redundant or noisy data still yield a projector.
FitResult fit_projector(const ScatteringDataset &dataset,
                        const GaussianBasis &basis, double trace_target,
                        const std::optional<DenseSymMatrix> &p0,
                        const PurificationOptions &opts = {}, int workers = 1);

/// rho(r) = 2 chi(r)^T P chi(r), chi(r) = S^{-1/2} phi(r).
std::vector<double> density_on_grid(const DenseSymMatrix &p,
                                    const GaussianBasis &basis,
                                    const DenseSymMatrix &s_inv_sqrt,
                                    std::span<const Vec3> grid);

} // namespace nrep
