#include <nrep/error.h>
#include <nrep/kem.h>
#include <nrep/parallel.h>

#include <algorithm>
#include <fmt/core.h>
#include <fmt/ranges.h>

namespace nrep {

std::string KernelId::to_string() const {
  return is_double() ? fmt::format("double({},{})", first, second)
                     : fmt::format("single({})", first);
}

FragmentScheme::FragmentScheme(Index full_dim,
                               std::vector<std::vector<Index>> singles)
    : m_full_dim(full_dim), m_singles(std::move(singles)) {
  if (m_full_dim < 1) {
    throw Error(ErrorKind::domain, "fragment scheme needs full_dim >= 1");
  }
  if (m_singles.size() < 2) {
    throw Error(ErrorKind::domain,
                fmt::format("fragment scheme needs at least 2 single kernels, "
                            "got {}",
                            m_singles.size()));
  }
  std::vector<int> owner(static_cast<std::size_t>(m_full_dim), -1);
  for (std::size_t k = 0; k < m_singles.size(); ++k) {
    auto &set = m_singles[k];
    if (set.empty()) {
      throw Error(ErrorKind::domain, fmt::format("single kernel {} is empty", k));
    }
    std::sort(set.begin(), set.end());
    for (Index idx : set) {
      if (idx < 0 || idx >= m_full_dim) {
        throw Error(ErrorKind::domain,
                    fmt::format("single kernel {} index {} outside [0, {})", k,
                                idx, m_full_dim));
      }
      auto &o = owner[static_cast<std::size_t>(idx)];
      if (o >= 0) {
        throw Error(ErrorKind::domain,
                    fmt::format("index {} appears in kernels {} and {}", idx, o,
                                k));
      }
      o = static_cast<int>(k);
    }
  }
  auto missing = std::find(owner.begin(), owner.end(), -1);
  if (missing != owner.end()) {
    throw Error(ErrorKind::domain,
                fmt::format("index {} is not covered by any single kernel",
                            missing - owner.begin()));
  }
}

std::vector<Index> FragmentScheme::indices(const KernelId &id) const {
  auto check = [&](int k) {
    if (k < 0 || k >= n()) {
      throw Error(ErrorKind::domain,
                  fmt::format("kernel {} refers to missing single {}",
                              id.to_string(), k));
    }
  };
  check(id.first);
  std::vector<Index> out = m_singles[static_cast<std::size_t>(id.first)];
  if (id.is_double()) {
    check(id.second);
    if (id.second <= id.first) {
      throw Error(ErrorKind::domain,
                  fmt::format("double kernel {} must have i < j", id.to_string()));
    }
    const auto &b = m_singles[static_cast<std::size_t>(id.second)];
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
  }
  return out;
}

std::vector<KernelId> FragmentScheme::double_ids() const {
  std::vector<KernelId> out;
  for (int i = 0; i < n(); ++i)
    for (int j = i + 1; j < n(); ++j) out.push_back({i, j});
  return out;
}

std::vector<KernelId> FragmentScheme::single_ids() const {
  std::vector<KernelId> out;
  for (int i = 0; i < n(); ++i) out.push_back({i, -1});
  return out;
}

Vec kem_combine(const KemProperty &prop) {
  const auto n = static_cast<std::size_t>(prop.n);
  if (prop.n < 2 || prop.singles.size() != n ||
      prop.doubles.size() != n * (n - 1) / 2) {
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("KEM property for n = {} needs {} doubles and {} "
                            "singles, got {} and {}",
                            prop.n, prop.n * (prop.n - 1) / 2, prop.n,
                            prop.doubles.size(), prop.singles.size()));
  }
  const Index len = prop.singles.front().size();
  Vec sum_d = Vec::Zero(len), sum_s = Vec::Zero(len);
  for (const auto &d : prop.doubles) {
    require_same_dim(d.size(), len, "KEM property length");
    sum_d += d;
  }
  for (const auto &s : prop.singles) {
    require_same_dim(s.size(), len, "KEM property length");
    sum_s += s;
  }
  return sum_d - static_cast<double>(prop.n - 2) * sum_s;
}

DenseSymMatrix augment(const KernelDensity &kernel, Index full_dim) {
  const auto &map = kernel.index_map;
  require_same_dim(kernel.local.dim(), static_cast<Index>(map.size()),
                   "kernel index map");
  Mat out = Mat::Zero(full_dim, full_dim);
  for (std::size_t a = 0; a < map.size(); ++a) {
    if (map[a] < 0 || map[a] >= full_dim) {
      throw Error(ErrorKind::domain,
                  fmt::format("kernel {} index {} outside [0, {})",
                              kernel.id.to_string(), map[a], full_dim));
    }
    for (std::size_t b = 0; b < map.size(); ++b) {
      out(map[a], map[b]) = kernel.local(static_cast<Index>(a), static_cast<Index>(b));
    }
  }
  return DenseSymMatrix(out);
}

namespace {

void check_kernel_set(const FragmentScheme &scheme,
                      const std::vector<KernelDensity> &kernels,
                      const std::vector<KernelId> &expected, const char *what) {
  if (kernels.size() != expected.size()) {
    throw Error(ErrorKind::domain,
                fmt::format("expected {} {} kernels, got {}", expected.size(),
                            what, kernels.size()));
  }
  for (const auto &id : expected) {
    auto count = std::count_if(kernels.begin(), kernels.end(),
                               [&](const auto &k) { return k.id == id; });
    if (count != 1) {
      throw Error(ErrorKind::domain,
                  fmt::format("kernel {} appears {} times", id.to_string(), count));
    }
  }
  for (const auto &k : kernels) {
    if (k.index_map != scheme.indices(k.id)) {
      throw Error(ErrorKind::domain,
                  fmt::format("kernel {} index map {} does not match the scheme",
                              k.id.to_string(), k.index_map));
    }
  }
}

} // namespace

DenseSymMatrix assemble_r_kem(const FragmentScheme &scheme,
                              const std::vector<KernelDensity> &doubles,
                              const std::vector<KernelDensity> &singles) {
  check_kernel_set(scheme, doubles, scheme.double_ids(), "double");
  check_kernel_set(scheme, singles, scheme.single_ids(), "single");
  const Index dim = scheme.full_dim();
  Mat r = Mat::Zero(dim, dim);
  for (const auto &d : doubles) r += augment(d, dim).matrix();
  Mat s = Mat::Zero(dim, dim);
  for (const auto &k : singles) s += augment(k, dim).matrix();
  return DenseSymMatrix(r - static_cast<double>(scheme.n() - 2) * s);
}

DenseSymMatrix lowdin_initial_iterant(const DenseSymMatrix &r_kem,
                                      const DenseSymMatrix &s) {
  require_same_dim(r_kem.dim(), s.dim(), "lowdin_initial_iterant");
  DenseSymMatrix half = fractional_power(s, 0.5);
  return DenseSymMatrix(half.matrix() * r_kem.matrix() * half.matrix());
}

Projector purify_assembled(const DenseSymMatrix &p0, double trace_target,
                           const PurificationOptions &opts) {
  return clinton_iterate(p0, trace_target, {}, opts);
}

double model_energy(const DenseSymMatrix &p, const DenseSymMatrix &h) {
  return 2.0 * trace_product(p, h);
}

DenseSymMatrix aufbau_projector(const DenseSymMatrix &h, Index n_occ) {
  if (n_occ < 0 || n_occ > h.dim()) {
    throw Error(ErrorKind::domain,
                fmt::format("cannot occupy {} of {} orbitals", n_occ, h.dim()));
  }
  auto eig = sym_eigendecompose(h);
  auto occ = eig.eigenvectors.leftCols(n_occ);
  return DenseSymMatrix(occ * occ.transpose());
}

DenseSymMatrix aufbau_density(const DenseSymMatrix &h, const DenseSymMatrix &s,
                              Index n_occ) {
  require_same_dim(h.dim(), s.dim(), "aufbau_density");
  if (n_occ < 0 || n_occ > h.dim()) {
    throw Error(ErrorKind::domain,
                fmt::format("cannot occupy {} of {} orbitals", n_occ, h.dim()));
  }
  // S^{-1/2} H S^{-1/2} in the orthonormal basis, then back-transform.
  DenseSymMatrix x = fractional_power(s, -0.5);
  DenseSymMatrix h_ortho(x.matrix() * h.matrix() * x.matrix());
  DenseSymMatrix p = aufbau_projector(h_ortho, n_occ);
  return DenseSymMatrix(x.matrix() * p.matrix() * x.matrix());
}

DenseSymMatrix principal_block(const DenseSymMatrix &a,
                               const std::vector<Index> &indices) {
  const Index m = static_cast<Index>(indices.size());
  Mat out(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      out(i, j) = a(indices[static_cast<std::size_t>(i)],
                    indices[static_cast<std::size_t>(j)]);
  return DenseSymMatrix(out);
}

ToyKernelSet toy_kernel_densities(const FragmentScheme &scheme,
                                  const DenseSymMatrix &h,
                                  const std::optional<DenseSymMatrix> &s,
                                  const std::vector<Index> &occupations,
                                  int workers) {
  require_same_dim(h.dim(), scheme.full_dim(), "toy kernel Hamiltonian");
  if (static_cast<int>(occupations.size()) != scheme.n()) {
    throw Error(ErrorKind::domain,
                fmt::format("need {} single-kernel occupations, got {}",
                            scheme.n(), occupations.size()));
  }
  std::vector<KernelId> ids = scheme.double_ids();
  const std::size_t n_doubles = ids.size();
  for (const auto &id : scheme.single_ids()) ids.push_back(id);

  std::vector<std::optional<KernelDensity>> slots(ids.size());
  parallel_for(ids.size(), workers, [&](std::size_t k) {
    const KernelId &id = ids[k];
    auto idx = scheme.indices(id);
    Index occ = occupations[static_cast<std::size_t>(id.first)];
    if (id.is_double()) occ += occupations[static_cast<std::size_t>(id.second)];
    DenseSymMatrix hb = principal_block(h, idx);
    DenseSymMatrix r = s ? aufbau_density(hb, principal_block(*s, idx), occ)
                         : aufbau_projector(hb, occ);
    slots[k] = KernelDensity{id, r, idx};
  });

  ToyKernelSet out;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    (k < n_doubles ? out.doubles : out.singles).push_back(std::move(*slots[k]));
  }
  return out;
}

} // namespace nrep
