#include <catch_amalgamated.hpp>

#include <nrep/costmodel.h>
#include <nrep/error.h>

#include <cmath>

using namespace nrep::cost;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Relative times to one significant figure.
// Rows m = 3..384, columns alpha = 3, 4, 5.
const int table_m[8] = {3, 6, 12, 24, 48, 96, 192, 384};
const OneSigFig table_values[8][3] = {
    {{1, 0}, {6, -1}, {4, -1}},  {{6, -1}, {2, -1}, {6, -2}},
    {{3, -1}, {5, -2}, {9, -3}}, {{2, -1}, {1, -2}, {1, -3}},
    {{8, -2}, {3, -3}, {1, -4}}, {{4, -2}, {9, -4}, {2, -5}},
    {{2, -2}, {2, -4}, {2, -6}}, {{1, -2}, {5, -5}, {3, -7}},
};

} // namespace

TEST_CASE("relative time examples") {
  CHECK(relative_time(3, 3.0) == 1.0);
  CHECK(round_one_sig_fig(relative_time(96, 3.0)) == OneSigFig{4, -2});
  CHECK_THAT(relative_time(96, 3.0), WithinRel((4.0 * 95 + 1) / (96.0 * 96.0), 1e-15));
  CHECK(round_one_sig_fig(relative_time(384, 5.0)) == OneSigFig{3, -7});
}

TEST_CASE("mu drops out") {
  CHECK_THAT(relative_time_general({3, 17, 3.0}), WithinRel(1.0, 1e-14));
  for (int mu : {1, 10, 100}) {
    CHECK(round_one_sig_fig(relative_time_general({6, mu, 4.0})) == OneSigFig{2, -1});
  }
  for (int m = 2; m <= 1000; m += 37)
    for (double alpha = 1.0; alpha <= 6.0; alpha += 0.7)
      for (int mu : {1, 3, 50, 10000}) {
        CHECK_THAT(relative_time_general({m, mu, alpha}),
                   WithinRel(relative_time(m, alpha), 1e-12));
      }
}

TEST_CASE("threshold") {
  for (int m = 4; m < 60; ++m)
    for (double alpha : {3.0, 3.5, 4.0, 5.0}) CHECK(relative_time(m, alpha) < 1.0);
}

TEST_CASE("absolute costs of the peptide example") {
  CHECK_THAT(absolute_cost(20000, 3.0), WithinRel(8e12, 1e-15));
  CostQuery q{100, 200, 3.0};
  double kem = kem_absolute_cost(q);
  CHECK_THAT(kem, WithinRel(100 * std::pow(200.0, 3) + 4950 * std::pow(400.0, 3), 1e-15));
  CHECK(std::abs(kem - 3e11) <= 0.1 * 3e11);
  double ratio = kem / absolute_cost(20000, 3.0);
  CHECK(round_one_sig_fig(ratio) == OneSigFig{4, -2});
  CHECK(kem_absolute_cost(q, 100) == kem / 100);
}

TEST_CASE("reference table of relative times") {
  std::vector<int> ms(table_m, table_m + 8);
  auto t = table_sweep(ms, {5.0, 3.0, 4.0});
  REQUIRE(t.alpha_values == std::vector<double>{3.0, 4.0, 5.0});
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 3; ++j) {
      INFO("m=" << table_m[i] << " alpha=" << t.alpha_values[j]);
      CHECK(round_one_sig_fig(t.t_rel[i][j]) == table_values[i][j]);
      CHECK(t.t_rel[i][j] == relative_time(table_m[i], t.alpha_values[j]));
    }
  for (int i = 1; i < 8; ++i) CHECK(t.t_rel[i][0] < t.t_rel[i - 1][0]);

  auto csv = t.to_csv();
  CHECK(csv.rfind("m,alpha=3,alpha=4,alpha=5\n3,1,", 0) == 0);
  auto plot = table_sweep({2, 3}, {3.0}).to_plot_data();
  CHECK(plot.rfind("alpha,m,t_rel\n", 0) == 0);
}

TEST_CASE("one significant figure rounding") {
  CHECK(round_one_sig_fig(0.63) == OneSigFig{6, -1});
  CHECK(round_one_sig_fig(0.0096) == OneSigFig{1, -2});
  CHECK(round_one_sig_fig(1.0) == OneSigFig{1, 0});
  CHECK(round_one_sig_fig(94.9) == OneSigFig{9, 1});
  CHECK(round_one_sig_fig(95.1) == OneSigFig{1, 2});
}

TEST_CASE("domain checks") {
  CHECK_THROWS_AS(relative_time(1, 3.0), nrep::Error);
  CHECK_THROWS_AS(relative_time(4, 0.5), nrep::Error);
  CHECK_THROWS_AS(relative_time_general({4, 0, 3.0}), nrep::Error);
  CHECK_THROWS_AS(kem_absolute_cost({4, 2, 3.0}, 0), nrep::Error);
}
