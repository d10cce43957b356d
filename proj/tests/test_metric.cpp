#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "finsler/metric.hpp"

using namespace finsler;

TEST_CASE("evaluate_F on the fixtures") {
  auto euc = make_fixture("FIX-EUC", 3);
  auto s = make_sample(euc, {0.0, 0.0, 0.0}, {3.0, 4.0, 0.0});
  CHECK(evaluate_F(euc, s) == doctest::Approx(5.0));

  auto rr = make_fixture("FIX-MINK-RANDERS", 3);
  auto s2 = make_sample(rr, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0});
  CHECK(evaluate_F(rr, s2) == doctest::Approx(1.3));

  auto kr = make_fixture("FIX-KROPINA", 3);
  TangentSample s3;
  s3.x = {0.0, 0.0, 0.0};
  s3.y = {1.0, 0.0, 0.0};
  s3.s = 0.5;
  CHECK(evaluate_F(kr, s3) == doctest::Approx(2.0));
}

TEST_CASE("evaluate_F error paths") {
  auto kr = make_fixture("FIX-KROPINA", 3);
  TangentSample s;
  s.x = {0.0, 0.0, 0.0};
  s.y = {0.0, 1.0, 0.0};  // s = 0, Kropina pole
  CHECK_THROWS_AS(evaluate_F(kr, s), InadmissibleSample);
  TangentSample z;
  z.x = {0.0, 0.0, 0.0};
  z.y = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(evaluate_F(kr, z), InadmissibleSample);
}

TEST_CASE("admissibility_check verdicts") {
  auto kr = make_fixture("FIX-KROPINA", 3);
  auto v = admissibility_check(kr, make_sample(kr, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}));
  CHECK_FALSE(v.s_in_range);
  CHECK_FALSE(v.admissible());

  auto euc = make_fixture("FIX-EUC", 3);
  auto v2 = admissibility_check(euc, make_sample(euc, {0.1, 0.1, 0.1}, {0.0, -1.0, 2.0}));
  CHECK(v2.admissible());

  auto rr = make_fixture("FIX-MINK-RANDERS", 3);
  auto v3 = admissibility_check(rr, make_sample(rr, {0.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}));
  CHECK(v3.admissible());
  CHECK(v3.g_positive_definite);
}

TEST_CASE("admissibility_check is pure") {
  auto rr = make_fixture("FIX-MINK-RANDERS", 3);
  auto s = make_sample(rr, {0.2, -0.1, 0.0}, {0.5, 0.5, -0.7});
  auto a = admissibility_check(rr, s);
  auto b = admissibility_check(rr, s);
  CHECK(a.s_in_range == b.s_in_range);
  CHECK(a.alpha_positive == b.alpha_positive);
  CHECK(a.g_positive_definite == b.g_positive_definite);
}

TEST_CASE("sample_lattice on FIX-EUC gives full cross product") {
  auto euc = make_fixture("FIX-EUC", 3);  // grid 2^3
  auto samples = sample_lattice(euc, 12, 42);
  CHECK(samples.size() == 96);
}

TEST_CASE("sample_lattice on FIX-KROPINA keeps only in-window directions") {
  auto kr = make_fixture("FIX-KROPINA", 3);
  // the 12 fixed symmetric dirs: +-e_i have s in {0, +-0.5}, diagonals with
  // first component have s = 0.5/sqrt(2) ~ 0.354; exactly 4 dirs land in
  // [0.2, 0.49]
  auto dirs = unit_directions(3, 12, 42);
  int expect = 0;
  for (const auto& d : dirs) {
    double s = 0.5 * d[0];
    if (s >= 0.2 && s <= 0.49) ++expect;
  }
  CHECK(expect == 4);
  auto samples = sample_lattice(kr, 12, 42);
  CHECK(samples.size() == static_cast<size_t>(8 * expect));
}

TEST_CASE("sample_lattice determinism") {
  auto rr = make_fixture("FIX-RANDERS-VAR", 3);
  auto a = sample_lattice(rr, 20, 7);
  auto b = sample_lattice(rr, 20, 7);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(a[i].x[k] == b[i].x[k]);
      CHECK(a[i].y[k] == b[i].y[k]);
    }
  }
}

TEST_CASE("homogeneity of F at sampled points") {
  for (const char* name :
       {"FIX-EUC", "FIX-MINK-RANDERS", "FIX-RANDERS-VAR", "FIX-SPHERE",
        "FIX-KROPINA"}) {
    auto spec = make_fixture(name, 3);
    auto samples = sample_lattice(spec, 12, 11);
    int checked = 0;
    for (const auto& s : samples) {
      if (checked >= 8) break;
      ++checked;
      double f = evaluate_F(spec, s);
      for (double lam : {0.5, 2.0, 7.0}) {
        TangentSample t = s;
        for (double& v : t.y) v *= lam;
        double fl = evaluate_F(spec, t);
        CHECK(std::abs(fl - lam * f) <= 1e-12 * lam * f);
      }
    }
  }
}

TEST_CASE("FIX-SPHERE conformal factor positive definite on the box") {
  auto sp = make_fixture("FIX-SPHERE", 3, 1.0);
  CHECK_NOTHROW(sp.validate());
  for (const auto& x : sp.chart.grid_points()) {
    std::vector<double> a;
    sp.alpha.eval(std::span<const double>(x), a);
    for (int i = 0; i < 3; ++i) CHECK(a[i * 3 + i] > 0.0);
  }
}

TEST_CASE("spec validation rejects an oversized one-form") {
  auto rr = make_fixture("FIX-MINK-RANDERS", 3);
  rr.beta.b_const[0] = 1.2;  // ||b|| >= b0
  CHECK_THROWS_AS(rr.validate(), SpecError);
}

TEST_CASE("chart validation") {
  ChartSpec c;
  c.dim = 1;
  c.box = {{0.0, 1.0}};
  c.grid = {2};
  CHECK_THROWS_AS(c.validate(), SpecError);
  c.dim = 2;
  c.box = {{0.0, 1.0}, {1.0, 1.0}};
  c.grid = {2, 2};
  CHECK_THROWS_AS(c.validate(), SpecError);
}
