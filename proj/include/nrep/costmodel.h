#pragma once

#include <string>
#include <vector>

namespace nrep::cost {

/// Idealized KEM problem: m equal single kernels of mu basis functions each,
/// method cost scaling as (basis size)^alpha.
struct CostQuery {
  int m{3};
  int mu{1};
  double alpha{3.0};

  void validate() const;
};

/// (2^{alpha-1} (m - 1) + 1) / m^{alpha-1}; independent of mu.
double relative_time(int m, double alpha);

/// (m mu^alpha + ((m^2 - m)/2) (2 mu)^alpha) / (m mu)^alpha.
double relative_time_general(const CostQuery &q);

/// M^alpha.
double absolute_cost(double basis_size, double alpha);

/// m mu^alpha + ((m^2 - m)/2) (2 mu)^alpha, divided by `workers` for an
/// ideally parallel run.
double kem_absolute_cost(const CostQuery &q, int workers = 1);

struct CostTable {
  std::vector<int> m_values;
  std::vector<double> alpha_values;
  std::vector<std::vector<double>> t_rel; // [m index][alpha index]

  /// Header `m,alpha=...`, m ascending rows.
  std::string to_csv() const;
  /// `alpha,m,t_rel` lines, one curve per alpha.
  std::string to_plot_data() const;
};

CostTable table_sweep(std::vector<int> m_values, std::vector<double> alpha_values);

/// Value rounded to one significant figure, as (mantissa, decimal exponent).
struct OneSigFig {
  int mantissa{0};
  int exponent{0};
  friend bool operator==(const OneSigFig &, const OneSigFig &) = default;
};

OneSigFig round_one_sig_fig(double value);

} // namespace nrep::cost
