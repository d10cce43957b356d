#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "finsler/curvature.hpp"

using namespace finsler;

TEST_CASE("FIX-EUC is flat") {
  auto spec = make_fixture("FIX-EUC", 3);
  auto s = make_sample(spec, {0.1, -0.2, 0.3}, {0.4, 0.7, -0.1});
  auto G = spray_coefficients(spec, s);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(G(i)) < 1e-12);
  auto sc = riemann_curvature(spec, s);
  CHECK(sc.Rmk.cwiseAbs().maxCoeff() < 1e-11);
  CHECK(std::abs(sc.Ric) < 1e-11);
  auto rr = ricci_tensor_and_rho(spec, s);
  CHECK(rr.Ric_ij.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(rr.rho) < 1e-8);
  CHECK(rr.rho_i.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("FIX-MINK-RANDERS has vanishing spray and curvature") {
  auto spec = make_fixture("FIX-MINK-RANDERS", 3);
  auto s = make_sample(spec, {0.2, 0.1, -0.3}, {0.6, 0.7, 0.2});
  auto G = spray_coefficients(spec, s);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(G(i)) < 1e-11);
  auto sc = riemann_curvature(spec, s);
  CHECK(std::abs(sc.Ric) < 1e-10);
}

TEST_CASE("FIX-SPHERE spray matches the Christoffel oracle") {
  auto spec = make_fixture("FIX-SPHERE", 3, 1.0);
  auto samples = sample_lattice(spec, 6, 3);
  int checked = 0;
  for (const auto& s : samples) {
    if (checked >= 4) break;
    ++checked;
    auto G = spray_coefficients(spec, s);
    auto gamma = christoffel_fd(spec, s.x);
    double scale = std::max(1e-3, G.cwiseAbs().maxCoeff());
    for (int i = 0; i < 3; ++i) {
      double gi = 0.0;
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          gi += 0.5 * gamma(i, j, k) * s.y[j] * s.y[k];
      CHECK(std::abs(G(i) - gi) <= 1e-7 * scale);
    }
  }
}

TEST_CASE("FIX-SPHERE has Rnorm = n-1 and classical Ricci reduction") {
  auto spec = make_fixture("FIX-SPHERE", 3, 1.0);
  auto samples = sample_lattice(spec, 6, 5);
  int checked = 0;
  for (const auto& s : samples) {
    if (checked >= 4) break;
    ++checked;
    auto sc = riemann_curvature(spec, s);
    CHECK(sc.Rnorm == doctest::Approx(2.0).epsilon(1e-5));
    Mat rica = classical_ricci_fd(spec, s.x);
    double quad = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) quad += rica(i, j) * s.y[i] * s.y[j];
    CHECK(std::abs(sc.Ric - quad) <= 1e-5 * std::abs(sc.Ric));
  }
}

TEST_CASE("FIX-SPHERE Ricci tensor and rho against the conformal identity") {
  auto spec = make_fixture("FIX-SPHERE", 3, 1.0);
  auto s = make_sample(spec, {0.2, -0.1, 0.3}, {0.5, 0.4, -0.6});
  auto rr = ricci_tensor_and_rho(spec, s);
  Mat a = metric_a(spec, s.x);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(rr.Ric_ij(i, j) - 2.0 * a(i, j)) <=
            1e-4 * a.cwiseAbs().maxCoeff());
  CHECK(rr.rho == doctest::Approx(6.0).epsilon(1e-4));
  // rho is constant here, so rho_i ~ 0 and the degree-0 contraction vanishes
  CHECK(rr.rho_i.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("homogeneity ladder in y") {
  for (const char* name : {"FIX-SPHERE", "FIX-RANDERS-VAR"}) {
    auto spec = make_fixture(name, 3);
    auto s = make_sample(spec, {0.3, -0.2, 0.1}, {0.7, 0.3, -0.4});
    auto sc = riemann_curvature(spec, s);
    for (double lam : {0.5, 2.0}) {
      TangentSample t = s;
      for (double& v : t.y) v *= lam;
      auto scl = riemann_curvature(spec, make_sample(spec, t.x, t.y));
      double l2 = lam * lam;
      for (int i = 0; i < 3; ++i)
        CHECK(std::abs(scl.G(i) - l2 * sc.G(i)) <=
              1e-8 * (std::abs(sc.G(i)) + 1.0));
      CHECK(std::abs(scl.Ric - l2 * sc.Ric) <= 1e-8 * (std::abs(sc.Ric) + 1.0));
      CHECK(std::abs(scl.Rnorm - sc.Rnorm) <= 1e-8 * (std::abs(sc.Rnorm) + 1.0));
      for (int i = 0; i < 9; ++i)
        CHECK(std::abs(scl.Rmk(i / 3, i % 3) - l2 * sc.Rmk(i / 3, i % 3)) <=
              1e-8 * (std::abs(sc.Rmk(i / 3, i % 3)) + 1.0));
    }
  }
}

TEST_CASE("Euler consistency of the Ricci tensor") {
  for (const char* name : {"FIX-SPHERE", "FIX-RANDERS-VAR"}) {
    auto spec = make_fixture(name, 3);
    auto s = make_sample(spec, {0.2, 0.2, -0.2}, {0.5, -0.3, 0.6});
    auto sc = riemann_curvature(spec, s);
    auto rr = ricci_tensor_and_rho(spec, s);
    double quad = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) quad += rr.Ric_ij(i, j) * s.y[i] * s.y[j];
    double rhs = sc.F2 * sc.Rnorm;
    CHECK(std::abs(quad - rhs) <= 1e-6 * (std::abs(rhs) + 1.0));
    // degree-0 trace: y^i rho_i ~ 0 at FD tolerance
    double yr = 0.0;
    for (int i = 0; i < 3; ++i) yr += s.y[i] * rr.rho_i(i);
    CHECK(std::abs(yr) <= 1e-3 * (std::abs(rr.rho) + 1.0));
  }
}

TEST_CASE("curvature bundle vertical derivatives of Rnorm") {
  auto spec = make_fixture("FIX-SPHERE", 3, 1.0);
  auto s = make_sample(spec, {0.1, 0.2, -0.1}, {0.6, -0.4, 0.5});
  auto cb = curvature_bundle(spec, s);
  // Rnorm is constant 2 on the sphere: all vertical derivatives vanish
  CHECK(cb.Rnorm == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(cb.R_der1.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(cb.R_der2.cwiseAbs().maxCoeff() < 1e-5);
  for (double v : cb.R_der3.v) CHECK(std::abs(v) < 1e-4);
}

TEST_CASE("einstein diagnostic separates fixtures") {
  auto sph = make_fixture("FIX-SPHERE", 3, 1.0);
  auto rep = einstein_diagnostic(sph, sample_lattice(sph, 6, 17));
  CHECK(rep.max_rel_deviation <= 1e-5);
  CHECK(rep.einstein);

  auto euc = make_fixture("FIX-EUC", 3);
  auto re = einstein_diagnostic(euc, sample_lattice(euc, 6, 17));
  CHECK(re.einstein);

  auto rv = make_fixture("FIX-RANDERS-VAR", 3);
  auto rr = einstein_diagnostic(rv, sample_lattice(rv, 6, 17));
  CHECK(rr.max_rel_deviation > 1e-2);
  CHECK_FALSE(rr.einstein);
}

TEST_CASE("einstein diagnostic needs n+1 directions per point") {
  auto sph = make_fixture("FIX-SPHERE", 3, 1.0);
  auto samples = sample_lattice(sph, 6, 17);
  samples.resize(2);  // starve one base point of directions
  CHECK_THROWS_AS(einstein_diagnostic(sph, samples), SpecError);
}
