#pragma once

#include <nrep/kem.h>
#include <nrep/matrix.h>
#include <nrep/scattering.h>

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nrep::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

// DSM v1: `dsm 1 <dim>` then dim rows of dim values, full matrix.

DenseSymMatrix parse_matrix(std::istream &in);
DenseSymMatrix read_matrix(const fs::path &path);
std::string format_matrix(const DenseSymMatrix &m);
void write_matrix(const fs::path &path, const DenseSymMatrix &m);

// Basis: {"units": "bohr", "label": ..., "functions": [{"center": [x,y,z],
// "exponent": a}]}; a bare list of functions is also accepted.

GaussianBasis basis_from_json(const json &j);
json basis_to_json(const GaussianBasis &basis);
GaussianBasis read_basis(const fs::path &path);

// Dataset: {"units": "bohr^-1", "basis_label": ..., "reflections":
// [{"k": [x,y,z], "f_re": .., "f_im": .., "sigma": ..}]}.

ScatteringDataset dataset_from_json(const json &j);
json dataset_to_json(const ScatteringDataset &ds);
ScatteringDataset read_dataset(const fs::path &path);

/// {"points": [[x,y,z], ...]} or a bare list of triples.
std::vector<Vec3> read_vectors(const fs::path &path);
json vectors_to_json(const std::vector<Vec3> &vs, const std::string &units);

/// Fragment manifest: {"full_dim": d, "singles": [[indices]], "kernels":
/// [{"kind": "single"|"double", "members": [i] | [i, j], "matrix_file":
/// path}]}. Matrix paths are relative to the manifest. "kernels" may be
/// omitted when only the scheme is needed.
struct FragmentManifest {
  FragmentScheme scheme;
  std::vector<KernelDensity> doubles;
  std::vector<KernelDensity> singles;
};

FragmentManifest read_fragment_manifest(const fs::path &path,
                                        bool load_kernels = true);
json scheme_to_json(const FragmentScheme &scheme);

json read_json(const fs::path &path);
/// Pretty-printed with sorted keys and a trailing newline.
void write_json(const fs::path &path, const json &j);
void write_text(const fs::path &path, const std::string &text);

} // namespace nrep::io
