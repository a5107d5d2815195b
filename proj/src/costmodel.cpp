#include <nrep/costmodel.h>
#include <nrep/error.h>

#include <algorithm>
#include <cmath>
#include <fmt/core.h>

namespace nrep::cost {

namespace {

void check_domain(int m, double alpha) {
  if (m < 2) {
    throw Error(ErrorKind::domain,
                fmt::format("number of single kernels must be >= 2, got {}", m));
  }
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::domain,
                fmt::format("scaling exponent must be >= 1, got {}", alpha));
  }
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

} // namespace

void CostQuery::validate() const {
  check_domain(m, alpha);
  if (mu < 1) {
    throw Error(ErrorKind::domain,
                fmt::format("basis functions per kernel must be >= 1, got {}", mu));
  }
}

double relative_time(int m, double alpha) {
  check_domain(m, alpha);
  const double md = m;
  return (std::pow(2.0, alpha - 1.0) * (md - 1.0) + 1.0) /
         std::pow(md, alpha - 1.0);
}

double relative_time_general(const CostQuery &q) {
  q.validate();
  return kem_absolute_cost(q) /
         absolute_cost(static_cast<double>(q.m) * q.mu, q.alpha);
}

double absolute_cost(double basis_size, double alpha) {
  if (!(basis_size >= 1.0)) {
    throw Error(ErrorKind::domain,
                fmt::format("basis size must be >= 1, got {}", basis_size));
  }
  return std::pow(basis_size, alpha);
}

double kem_absolute_cost(const CostQuery &q, int workers) {
  q.validate();
  if (workers < 1) {
    throw Error(ErrorKind::domain, "worker count must be >= 1");
  }
  const double m = q.m, mu = q.mu;
  double singles = m * std::pow(mu, q.alpha);
  double doubles = (m * m - m) / 2.0 * std::pow(2.0 * mu, q.alpha);
  return (singles + doubles) / workers;
}

CostTable table_sweep(std::vector<int> m_values, std::vector<double> alpha_values) {
  std::sort(m_values.begin(), m_values.end());
  std::sort(alpha_values.begin(), alpha_values.end());
  CostTable table{m_values, alpha_values, {}};
  for (int m : m_values) {
    auto &row = table.t_rel.emplace_back();
    for (double a : alpha_values) row.push_back(relative_time(m, a));
  }
  return table;
}

std::string CostTable::to_csv() const {
  std::string out = "m";
  for (double a : alpha_values) out += fmt::format(",alpha={}", a);
  out += '\n';
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    out += fmt::format("{}", m_values[i]);
    for (double v : t_rel[i]) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

std::string CostTable::to_plot_data() const {
  std::string out = "alpha,m,t_rel\n";
  for (std::size_t j = 0; j < alpha_values.size(); ++j) {
    for (std::size_t i = 0; i < m_values.size(); ++i) {
      out += fmt::format("{},{},{}\n", alpha_values[j], m_values[i],
                         format_double(t_rel[i][j]));
    }
  }
  return out;
}

OneSigFig round_one_sig_fig(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::domain, "one-significant-figure rounding needs a "
                                   "positive finite value");
  }
  int e = static_cast<int>(std::floor(std::log10(value)));
  int mant = static_cast<int>(std::lround(value / std::pow(10.0, e)));
  if (mant >= 10) {
    mant = 1;
    ++e;
  } else if (mant < 1) {
    mant = static_cast<int>(std::lround(value / std::pow(10.0, e - 1)));
    --e;
  }
  return {mant, e};
}

} // namespace nrep::cost
