#include <nrep/error.h>
#include <nrep/io.h>

#include <charconv>
#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <sstream>

namespace nrep::io {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_number(std::string_view tok, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError(fmt::format("'{}' is not a finite decimal number", tok), line);
  }
  return v;
}

std::ifstream open_in(const fs::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::io, fmt::format("cannot open '{}'", path.string()));
  }
  return in;
}

Vec3 vec3_from_json(const json &j, const char *what) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(fmt::format("{} must be a 3-element array", what));
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) {
      throw ParseError(fmt::format("{} must contain numbers", what));
    }
    v(i) = j[i].get<double>();
  }
  return v;
}

json vec3_to_json(const Vec3 &v) { return json::array({v(0), v(1), v(2)}); }

template <typename T>
T field(const json &j, const char *key, const char *ctx) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(fmt::format("{}: missing field '{}'", ctx, key));
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ParseError(fmt::format("{}: field '{}': {}", ctx, key, e.what()));
  }
}

} // namespace

DenseSymMatrix parse_matrix(std::istream &in) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!split_ws(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("empty input, expected 'dsm 1 <dim>'", 1);
  auto header = split_ws(line);
  if (header.size() != 3 || header[0] != "dsm" || header[1] != "1") {
    throw ParseError("malformed header, expected 'dsm 1 <dim>'", lineno);
  }
  long dim = 0;
  {
    auto tok = header[2];
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), dim);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || dim < 1) {
      throw ParseError(fmt::format("invalid dimension '{}'", tok), lineno);
    }
  }
  Mat m(dim, dim);
  std::vector<int> row_line(static_cast<std::size_t>(dim));
  for (long i = 0; i < dim; ++i) {
    if (!next_line()) {
      throw ParseError(fmt::format("expected {} rows, found {}", dim, i), lineno + 1);
    }
    auto toks = split_ws(line);
    if (static_cast<long>(toks.size()) != dim) {
      throw ParseError(fmt::format("row {} has {} values, expected {}", i,
                                   toks.size(), dim),
                       lineno);
    }
    for (long j = 0; j < dim; ++j) m(i, j) = parse_number(toks[j], lineno);
    row_line[static_cast<std::size_t>(i)] = lineno;
  }
  if (next_line()) throw ParseError("unexpected trailing content", lineno);

  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < i; ++j) {
      double dev = std::abs(m(i, j) - m(j, i));
      if (dev > 1e-9 * std::max(1.0, std::abs(m(i, j)))) {
        throw ParseError(fmt::format("matrix not symmetric: entry [{}][{}] = "
                                     "{} but [{}][{}] = {}",
                                     i, j, m(i, j), j, i, m(j, i)),
                         row_line[static_cast<std::size_t>(i)]);
      }
    }
  }
  return DenseSymMatrix(m);
}

DenseSymMatrix read_matrix(const fs::path &path) {
  auto in = open_in(path);
  try {
    return parse_matrix(in);
  } catch (const ParseError &e) {
    throw e.located(path.string());
  }
}

std::string format_matrix(const DenseSymMatrix &m) {
  std::string out = fmt::format("dsm 1 {}\n", m.dim());
  for (Index i = 0; i < m.dim(); ++i) {
    for (Index j = 0; j < m.dim(); ++j) {
      if (j) out += ' ';
      out += fmt::format("{:.17g}", m(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::io, fmt::format("cannot write '{}'", path.string()));
  }
  out << text;
}

void write_matrix(const fs::path &path, const DenseSymMatrix &m) {
  write_text(path, format_matrix(m));
}

json read_json(const fs::path &path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json(const fs::path &path, const json &j) {
  write_text(path, j.dump(2) + "\n");
}

GaussianBasis basis_from_json(const json &j) {
  const json *list = &j;
  std::string label;
  if (j.is_object()) {
    if (j.contains("units") && j["units"] != "bohr") {
      throw ParseError("basis units must be 'bohr'");
    }
    if (j.contains("label")) label = field<std::string>(j, "label", "basis");
    if (!j.contains("functions")) throw ParseError("basis: missing 'functions'");
    list = &j["functions"];
  }
  if (!list->is_array()) throw ParseError("basis functions must be a list");
  std::vector<GaussianFunction> fs;
  for (const auto &f : *list) {
    if (!f.contains("center")) throw ParseError("basis function: missing 'center'");
    fs.push_back({vec3_from_json(f["center"], "center"),
                  field<double>(f, "exponent", "basis function")});
  }
  try {
    return GaussianBasis(std::move(fs), label);
  } catch (const Error &e) {
    throw ParseError(e.what());
  }
}

json basis_to_json(const GaussianBasis &basis) {
  json fs = json::array();
  for (const auto &f : basis.functions()) {
    fs.push_back({{"center", vec3_to_json(f.center)}, {"exponent", f.exponent}});
  }
  return {{"units", "bohr"}, {"label", basis.label()}, {"functions", fs}};
}

GaussianBasis read_basis(const fs::path &path) {
  return basis_from_json(read_json(path));
}

ScatteringDataset dataset_from_json(const json &j) {
  if (!j.is_object()) throw ParseError("dataset must be a JSON object");
  if (j.contains("units") && j["units"] != "bohr^-1") {
    throw ParseError("dataset units must be 'bohr^-1'");
  }
  ScatteringDataset ds;
  if (j.contains("basis_label")) {
    ds.basis_label = field<std::string>(j, "basis_label", "dataset");
  }
  if (!j.contains("reflections") || !j["reflections"].is_array()) {
    throw ParseError("dataset: 'reflections' must be a list");
  }
  for (const auto &r : j["reflections"]) {
    if (!r.contains("k")) throw ParseError("reflection: missing 'k'");
    Reflection refl{vec3_from_json(r["k"], "k"),
                    {field<double>(r, "f_re", "reflection"),
                     field<double>(r, "f_im", "reflection")},
                    r.contains("sigma") ? field<double>(r, "sigma", "reflection")
                                        : 0.0};
    ds.reflections.push_back(refl);
  }
  try {
    ds.validate();
  } catch (const Error &e) {
    throw ParseError(e.what());
  }
  return ds;
}

json dataset_to_json(const ScatteringDataset &ds) {
  json refl = json::array();
  for (const auto &r : ds.reflections) {
    refl.push_back({{"k", vec3_to_json(r.k)},
                    {"f_re", r.f.real()},
                    {"f_im", r.f.imag()},
                    {"sigma", r.sigma}});
  }
  return {{"units", "bohr^-1"},
          {"basis_label", ds.basis_label},
          {"reflections", refl}};
}

ScatteringDataset read_dataset(const fs::path &path) {
  return dataset_from_json(read_json(path));
}

std::vector<Vec3> read_vectors(const fs::path &path) {
  json j = read_json(path);
  const json *list = j.is_object() && j.contains("points") ? &j["points"] : &j;
  if (!list->is_array()) throw ParseError("expected a list of 3-vectors");
  std::vector<Vec3> out;
  for (const auto &v : *list) out.push_back(vec3_from_json(v, "vector"));
  return out;
}

json vectors_to_json(const std::vector<Vec3> &vs, const std::string &units) {
  json pts = json::array();
  for (const auto &v : vs) pts.push_back(vec3_to_json(v));
  return {{"units", units}, {"points", pts}};
}

FragmentManifest read_fragment_manifest(const fs::path &path, bool load_kernels) {
  json j = read_json(path);
  auto full_dim = field<long>(j, "full_dim", "fragment manifest");
  auto singles =
      field<std::vector<std::vector<Index>>>(j, "singles", "fragment manifest");
  FragmentManifest out{FragmentScheme(full_dim, std::move(singles)), {}, {}};
  if (!load_kernels) return out;
  if (!j.contains("kernels") || !j["kernels"].is_array()) {
    throw ParseError("fragment manifest: 'kernels' must be a list");
  }
  for (const auto &k : j["kernels"]) {
    auto kind = field<std::string>(k, "kind", "kernel");
    auto members = field<std::vector<int>>(k, "members", "kernel");
    KernelId id;
    if (kind == "single" && members.size() == 1) {
      id = {members[0], -1};
    } else if (kind == "double" && members.size() == 2) {
      id = {std::min(members[0], members[1]), std::max(members[0], members[1])};
    } else {
      throw ParseError(fmt::format("kernel of kind '{}' with {} members", kind,
                                   members.size()));
    }
    auto file = path.parent_path() / field<std::string>(k, "matrix_file", "kernel");
    DenseSymMatrix local = read_matrix(file);
    auto idx = out.scheme.indices(id);
    if (local.dim() != static_cast<Index>(idx.size())) {
      throw ParseError(fmt::format("kernel {} matrix has dim {}, expected {}",
                                   id.to_string(), local.dim(), idx.size()));
    }
    (id.is_double() ? out.doubles : out.singles)
        .push_back({id, local, std::move(idx)});
  }
  return out;
}

json scheme_to_json(const FragmentScheme &scheme) {
  return {{"full_dim", scheme.full_dim()}, {"singles", scheme.singles()}};
}

} // namespace nrep::io
