#include <catch_amalgamated.hpp>

#include <nrep/error.h>
#include <nrep/io.h>
#include <nrep/kem.h>

#include "oracles.h"

#include <fstream>
#include <sstream>

using namespace nrep;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / "nrep_test_io";
  fs::create_directories(dir);
  return dir / name;
}

ParseError parse_failure(const std::string &text) {
  std::istringstream in(text);
  try {
    io::parse_matrix(in);
  } catch (const ParseError &e) {
    return e;
  }
  FAIL("expected a parse error for:\n" << text);
  throw std::logic_error("unreachable");
}

} // namespace

TEST_CASE("one by one matrix") {
  std::istringstream in("dsm 1 1\n0.5\n");
  auto m = io::parse_matrix(in);
  CHECK(m.dim() == 1);
  CHECK(m(0, 0) == 0.5);
}

TEST_CASE("write then read is lossless") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(1, 9);
  for (int trial = 0; trial < 50; ++trial) {
    Mat a = oracle::random_symmetric(rng, dim(rng), 1e3);
    a(0, 0) = 1e-300 * (trial + 1);
    DenseSymMatrix m(a);
    std::istringstream in(io::format_matrix(m));
    auto back = io::parse_matrix(in);
    CHECK(back.matrix() == m.matrix());
  }
  std::mt19937_64 rng2(78);
  DenseSymMatrix m(oracle::random_symmetric(rng2, 4));
  auto file = scratch("m.dsm");
  io::write_matrix(file, m);
  CHECK(io::read_matrix(file).matrix() == m.matrix());
}

TEST_CASE("malformed matrices") {
  CHECK(parse_failure("").line() == 1);
  CHECK(parse_failure("dsm 2 2\n1 0\n0 1\n").line() == 1);
  CHECK(parse_failure("dsm 1 0\n").line() == 1);
  CHECK(parse_failure("dsm 1 x\n").line() == 1);
  CHECK(parse_failure("dsm 1 2\n1 0\n").line() == 3);
  CHECK(parse_failure("dsm 1 2\n1 0 3\n0 1\n").line() == 2);
  CHECK(parse_failure("dsm 1 2\n1 abc\n0 1\n").line() == 2);
  CHECK(parse_failure("dsm 1 2\n1 0\n0 1\n7\n").line() == 4);

  auto e = parse_failure("dsm 1 2\n1 0.25\n0.5 1\n");
  CHECK(std::string(e.what()).find("[0][1]") != std::string::npos);
  CHECK_THROWS_AS(io::read_matrix(scratch("does_not_exist.dsm")), Error);
}

TEST_CASE("basis json") {
  auto j = io::json::parse(R"({"units":"bohr","label":"h2",
    "functions":[{"center":[0,0,0],"exponent":1.2},{"center":[0,0,1.4],"exponent":0.8}]})");
  auto b = io::basis_from_json(j);
  CHECK(b.size() == 2);
  CHECK(b.label() == "h2");
  CHECK(b.functions()[1].center(2) == 1.4);
  auto again = io::basis_from_json(io::basis_to_json(b));
  CHECK(again.functions()[0].exponent == 1.2);

  auto bare = io::json::parse(R"([{"center":[1,2,3],"exponent":2}])");
  CHECK(io::basis_from_json(bare).size() == 1);

  CHECK_THROWS_AS(io::basis_from_json(io::json::parse(R"({"units":"angstrom","functions":[]})")),
                  ParseError);
  CHECK_THROWS_AS(io::basis_from_json(io::json::parse(R"([{"center":[1,2],"exponent":2}])")),
                  ParseError);
  CHECK_THROWS_AS(io::basis_from_json(io::json::parse(R"([{"center":[1,2,3]}])")), ParseError);
}

TEST_CASE("dataset json") {
  ScatteringDataset ds;
  ds.basis_label = "b";
  ds.reflections = {{Vec3(0.1, 0.2, 0.3), {1.5, -0.25}, 0.01},
                    {Vec3(0, 0, 1.0 / 3.0), {0.1, 0.0}, 0.0}};
  auto back = io::dataset_from_json(io::dataset_to_json(ds));
  REQUIRE(back.reflections.size() == 2);
  CHECK(back.basis_label == "b");
  CHECK(back.reflections[1].k(2) == 1.0 / 3.0);
  CHECK(back.reflections[0].f == Complex(1.5, -0.25));
  CHECK(back.reflections[0].sigma == 0.01);

  auto j = io::dataset_to_json(ds);
  j["reflections"][1]["k"] = j["reflections"][0]["k"];
  CHECK_THROWS_AS(io::dataset_from_json(j), Error);
}

TEST_CASE("fragment manifest") {
  auto dir = scratch("frag").parent_path() / "frag";
  fs::create_directories(dir);
  io::write_matrix(dir / "s0.dsm", DenseSymMatrix::identity(2));
  io::write_matrix(dir / "s1.dsm", DenseSymMatrix::identity(1));
  io::write_matrix(dir / "d01.dsm", DenseSymMatrix::identity(3));
  io::write_json(dir / "manifest.json",
                 io::json::parse(R"({"full_dim":3,"singles":[[0,2],[1]],"kernels":[
      {"kind":"single","members":[0],"matrix_file":"s0.dsm"},
      {"kind":"single","members":[1],"matrix_file":"s1.dsm"},
      {"kind":"double","members":[1,0],"matrix_file":"d01.dsm"}]})"));
  auto m = io::read_fragment_manifest(dir / "manifest.json");
  CHECK(m.scheme.n() == 2);
  CHECK(m.doubles.size() == 1);
  CHECK(m.doubles[0].id == KernelId{0, 1});
  CHECK(m.singles[0].index_map == std::vector<Index>{0, 2});
  CHECK(io::scheme_to_json(m.scheme)["singles"][0][1] == 2);

  io::write_json(dir / "bad.json", io::json::parse(R"({"full_dim":3,"singles":[[0,2],[1]],
      "kernels":[{"kind":"single","members":[0],"matrix_file":"s1.dsm"}]})"));
  CHECK_THROWS_AS(io::read_fragment_manifest(dir / "bad.json"), ParseError);
}

TEST_CASE("vector lists") {
  auto file = scratch("pts.json");
  std::vector<Vec3> pts{Vec3(1, 2, 3), Vec3(-0.5, 0, 1e-3)};
  io::write_json(file, io::vectors_to_json(pts, "bohr"));
  auto back = io::read_vectors(file);
  REQUIRE(back.size() == 2);
  CHECK(back[1] == pts[1]);
  std::ofstream(file) << "[[0,0,0],[1,1,1]]";
  CHECK(io::read_vectors(file).size() == 2);
  std::ofstream(file) << "{not json";
  CHECK_THROWS_AS(io::read_vectors(file), ParseError);
}
