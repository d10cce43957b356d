#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "finsler/fd.hpp"
#include "finsler/jet.hpp"
#include "finsler/jets_api.hpp"
#include "finsler/metric.hpp"

using namespace finsler;

TEST_CASE("jet arithmetic reproduces polynomial derivatives") {
  auto sp = JetSpace::get(2, 3);
  Jet x = Jet::variable(sp, 0, 2.0);
  Jet y = Jet::variable(sp, 1, -1.0);
  // f = x^2 y + 3 x y - y^3
  Jet f = x * x * y + 3.0 * x * y - y * y * y;
  CHECK(f.value() == doctest::Approx(4.0 * -1.0 + 3.0 * -2.0 + 1.0));
  std::vector<int> mu{1, 0};
  CHECK(f.deriv(mu) == doctest::Approx(2.0 * 2.0 * -1.0 + 3.0 * -1.0));
  mu = {0, 1};
  CHECK(f.deriv(mu) == doctest::Approx(4.0 + 6.0 - 3.0));
  mu = {1, 1};
  CHECK(f.deriv(mu) == doctest::Approx(2.0 * 2.0 + 3.0));
  mu = {0, 3};
  CHECK(f.deriv(mu) == doctest::Approx(-6.0));
}

TEST_CASE("jet division and sqrt match closed forms") {
  auto sp = JetSpace::get(1, 4);
  Jet x = Jet::variable(sp, 0, 1.5);
  Jet g = sqrt(x * x + 1.0);
  double v = std::sqrt(1.5 * 1.5 + 1.0);
  std::vector<int> mu{1};
  CHECK(g.value() == doctest::Approx(v));
  CHECK(g.deriv(mu) == doctest::Approx(1.5 / v));
  Jet h = 1.0 / x;
  mu = {2};
  CHECK(h.deriv(mu) == doctest::Approx(2.0 / std::pow(1.5, 3)));
  Jet l = log(x);
  mu = {3};
  CHECK(l.deriv(mu) == doctest::Approx(2.0 / std::pow(1.5, 3)));
}

TEST_CASE("derivative_jet shifts Taylor coefficients") {
  auto sp = JetSpace::get(2, 4);
  Jet x = Jet::variable(sp, 0, 0.7);
  Jet y = Jet::variable(sp, 1, 0.3);
  Jet f = x * x * x * y + y * y;
  std::vector<int> nu{1, 0};
  Jet df = derivative_jet(f, nu);  // 3 x^2 y
  CHECK(df.value() == doctest::Approx(3.0 * 0.49 * 0.3));
  std::vector<int> mu{1, 1};
  CHECK(df.deriv(mu) == doctest::Approx(6.0 * 0.7));
}

TEST_CASE("fd_derivative basics") {
  auto f = [](std::span<const double> p) {
    return p[0] * p[0] + std::sin(p[1]);
  };
  std::vector<double> pt{0.4, 1.1};
  std::vector<int> mu{2, 0};
  auto r = fd_derivative(f, pt, mu, 1e-3, 2);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
  mu = {0, 1};
  r = fd_derivative(f, pt, mu, 1e-3, 2);
  CHECK(r.value == doctest::Approx(std::cos(1.1)).epsilon(1e-10));
}

TEST_CASE("fd_oracle examples") {
  auto spec = make_fixture("FIX-EUC", 3);
  F2Field f2(spec);
  auto s = make_sample(spec, {0.1, 0.2, -0.3}, {0.5, -0.4, 0.7});
  // d^2 |y|^2 / dy1^2 = 2
  std::vector<int> mu{0, 0, 0, 2, 0, 0};
  auto r = fd_oracle(f2, s, mu);
  CHECK(std::abs(r.value - 2.0) < 1e-9);

  // F on FIX-MINK-RANDERS: dF/dy1 at y=(1,0,0) equals 1 + b1 = 1.3
  auto rspec = make_fixture("FIX-MINK-RANDERS", 3);
  struct FField : ScalarFieldTM {
    const FinslerMetricSpec* spec;
    double eval(std::span<const double> x,
                std::span<const double> y) const override {
      std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
      return std::sqrt(eval_F2<double>(*spec, xv, yv));
    }
  } ff;
  ff.spec = &rspec;
  auto rs = make_sample(rspec, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0});
  std::vector<int> mu1{0, 0, 0, 1, 0, 0};
  auto rf = fd_oracle(ff, rs, mu1);
  CHECK(rf.value == doctest::Approx(1.3).epsilon(1e-8));
}

TEST_CASE("richardson level 2 shrinks the error estimate") {
  auto spec = make_fixture("FIX-MINK-RANDERS", 3);
  F2Field f2(spec);
  auto s = make_sample(spec, {0.0, 0.0, 0.0}, {0.8, 0.5, 0.3});
  std::vector<int> mu{0, 0, 0, 2, 1, 0};
  FDConfig c1;
  c1.richardson_levels = 1;
  FDConfig c2;
  c2.richardson_levels = 2;
  auto r1 = fd_oracle(f2, s, mu, c1);
  auto r2 = fd_oracle(f2, s, mu, c2);
  CHECK(r2.error_estimate < r1.error_estimate);
}

TEST_CASE("vertical jets of F^2 on FIX-EUC") {
  auto spec = make_fixture("FIX-EUC", 3);
  F2Field f2(spec);
  auto s = make_sample(spec, {0.2, -0.1, 0.4}, {0.3, 0.9, -0.2});
  auto d2 = vertical_jet(f2, s, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(d2.hess(i, j) == doctest::Approx(i == j ? 2.0 : 0.0).epsilon(1e-13));
  auto d3 = vertical_jet(f2, s, 3);
  for (double v : d3.third.v) CHECK(std::abs(v) < 1e-13);
}

TEST_CASE("taylor and FD vertical jets agree on FIX-MINK-RANDERS") {
  auto spec = make_fixture("FIX-MINK-RANDERS", 3);
  F2Field f2(spec);
  auto s = make_sample(spec, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0});
  JetConfig fd_cfg;
  fd_cfg.mode = JetMode::FiniteDifference;
  auto t = vertical_jet(f2, s, 2);
  auto f = vertical_jet(f2, s, 2, fd_cfg);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double denom = std::abs(t.hess(i, j)) + 1e-3;
      CHECK(std::abs(t.hess(i, j) - f.hess(i, j)) / denom < 1e-7);
    }
}

TEST_CASE("horizontal jets: homogeneous spaces have no x dependence") {
  auto spec = make_fixture("FIX-EUC", 3);
  F2Field f2(spec);
  auto s = make_sample(spec, {0.3, 0.3, -0.3}, {0.5, 0.2, 0.9});
  auto hx = horizontal_jet(f2, s, 2);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(hx.grad(i)) < 1e-14);

  auto sphere = make_fixture("FIX-SPHERE", 3, 1.0);
  F2Field fs(sphere);
  auto s0 = make_sample(sphere, {0.0, 0.0, 0.0}, {0.4, -0.1, 0.6});
  auto g0 = horizontal_jet(fs, s0, 1);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(g0.grad(i)) < 1e-12);
}

TEST_CASE("taylor vs FD across fixtures to mixed order (dual-path property)") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const char* name :
       {"FIX-EUC", "FIX-MINK-RANDERS", "FIX-RANDERS-VAR", "FIX-SPHERE"}) {
    auto spec = make_fixture(name, 3);
    F2Field f2(spec);
    auto samples = sample_lattice(spec, 8, 99);
    int checked = 0;
    for (const auto& s : samples) {
      if (checked >= 10) break;
      ++checked;
      JetConfig fd_cfg;
      fd_cfg.mode = JetMode::FiniteDifference;
      auto tv = vertical_jet(f2, s, 3);
      auto fv = vertical_jet(f2, s, 3, fd_cfg);
      // relative at tensor scale; 3rd-order central FD bottoms out around
      // 2e-8 absolute for function values of this size
      auto close = [](double a, double b, double scale) {
        return std::abs(a - b) <= std::max(1e-6 * scale, 1e-8);
      };
      double s3 = std::max(1.0, tv.hess.cwiseAbs().maxCoeff());
      for (double v : tv.third.v) s3 = std::max(s3, std::abs(v));
      for (int i = 0; i < 3; ++i)
        CHECK(close(tv.grad(i), fv.grad(i), tv.grad.cwiseAbs().maxCoeff()));
      for (int i = 0; i < 9; ++i)
        CHECK(close(tv.hess(i / 3, i % 3), fv.hess(i / 3, i % 3),
                    std::max(1.0, tv.hess.cwiseAbs().maxCoeff())));
      for (size_t i = 0; i < tv.third.v.size(); ++i)
        CHECK(close(tv.third.v[i], fv.third.v[i], s3));
      auto th = horizontal_jet(f2, s, 2);
      auto fh = horizontal_jet(f2, s, 2, fd_cfg);
      double sg = std::max(1.0, th.grad.cwiseAbs().maxCoeff());
      double sh = std::max(1.0, th.hess.cwiseAbs().maxCoeff());
      for (int i = 0; i < 3; ++i) CHECK(close(th.grad(i), fh.grad(i), sg));
      for (int i = 0; i < 9; ++i)
        CHECK(close(th.hess(i / 3, i % 3), fh.hess(i / 3, i % 3), sh));
    }
  }
}

TEST_CASE("Euler homogeneity of F^2 jets") {
  for (const char* name : {"FIX-MINK-RANDERS", "FIX-RANDERS-VAR", "FIX-KROPINA"}) {
    auto spec = make_fixture(name, 3);
    F2Field f2(spec);
    auto samples = sample_lattice(spec, 12, 4);
    int checked = 0;
    for (const auto& s : samples) {
      if (checked >= 6) break;
      ++checked;
      auto d = vertical_jet(f2, s, 3);
      double f2v = d.value;
      double e1 = 0.0;
      for (int i = 0; i < 3; ++i) e1 += s.y[i] * d.grad(i);
      CHECK(std::abs(e1 - 2.0 * f2v) <= 1e-9 * std::abs(f2v));
      for (int i = 0; i < 3; ++i) {
        double e2 = 0.0;
        for (int j = 0; j < 3; ++j) e2 += s.y[j] * d.hess(i, j);
        CHECK(std::abs(e2 - d.grad(i)) <= 1e-9 * (std::abs(d.grad(i)) + 1.0));
      }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double e3 = 0.0;
          for (int k = 0; k < 3; ++k) e3 += s.y[k] * d.third(i, j, k);
          CHECK(std::abs(e3) <= 1e-9 * (std::abs(d.hess(i, j)) + 1.0));
        }
    }
  }
}
