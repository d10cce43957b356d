#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "finsler/flow.hpp"

using namespace finsler;

namespace {

FinslerMetricSpec small_sphere() {
  auto spec = make_fixture("FIX-SPHERE", 3, 1.0);
  spec.chart.grid.assign(3, 1);  // R is constant; one base point is enough
  return spec;
}

}  // namespace

TEST_CASE("scalar_flow_rhs on the fixtures") {
  auto euc = make_fixture("FIX-EUC", 3);
  auto se = make_sample(euc, {0.1, 0.2, -0.1}, {0.4, -0.3, 0.8});
  CHECK(std::abs(scalar_flow_rhs(euc, se, FlowMode::Unnormalized)) < 1e-10);

  auto sph = make_fixture("FIX-SPHERE", 3, 1.0);
  auto ss = make_sample(sph, {0.2, -0.1, 0.3}, {0.5, 0.6, -0.2});
  CHECK(scalar_flow_rhs(sph, ss, FlowMode::Unnormalized) ==
        doctest::Approx(-2.0).epsilon(1e-8));
  SMQuadratureSpec quad;
  double smR = sm_average(
      sph, [&](const TangentSample& s) { return riemann_curvature(sph, s).Rnorm; },
      quad);
  CHECK(std::abs(scalar_flow_rhs(sph, ss, FlowMode::Normalized, smR)) < 1e-7);
}

TEST_CASE("sm_average basics") {
  auto sph = make_fixture("FIX-SPHERE", 3, 1.0);
  SMQuadratureSpec quad;
  CHECK(sm_average(sph, [](const TangentSample&) { return 1.0; }, quad) ==
        doctest::Approx(1.0).epsilon(1e-15));
  double smR = sm_average(
      sph, [&](const TangentSample& s) { return riemann_curvature(sph, s).Rnorm; },
      quad);
  CHECK(smR == doctest::Approx(2.0).epsilon(1e-5));
  // F is 1-homogeneous, not 0-homogeneous
  CHECK_THROWS_AS(
      sm_average(sph, [&](const TangentSample& s) { return evaluate_F(sph, s); },
                 quad),
      NotHomogeneous);
}

TEST_CASE("sm_average weight choices both work") {
  auto rv = make_fixture("FIX-RANDERS-VAR", 3);
  auto R = [&](const TangentSample& s) {
    return riemann_curvature(rv, s).Rnorm;
  };
  SMQuadratureSpec qu;
  qu.weight = SMQuadratureSpec::Weight::Uniform;
  SMQuadratureSpec qd;
  qd.weight = SMQuadratureSpec::Weight::DetG;
  double au = sm_average(rv, R, qu);
  double ad = sm_average(rv, R, qd);
  CHECK(std::isfinite(au));
  CHECK(std::isfinite(ad));
  MESSAGE("uniform vs det_g <R>: ", au, " ", ad);
}

TEST_CASE("tensor_flow_rhs examples and scalar consistency") {
  auto euc = make_fixture("FIX-EUC", 3);
  auto se = make_sample(euc, {0.0, 0.1, 0.0}, {0.3, 0.5, -0.4});
  CHECK(tensor_flow_rhs(euc, se, FlowMode::Unnormalized).cwiseAbs().maxCoeff() <
        1e-7);

  auto sph = make_fixture("FIX-SPHERE", 3, 1.0);
  auto ss = make_sample(sph, {0.2, -0.1, 0.3}, {0.5, 0.6, -0.2});
  Mat a = metric_a(sph, ss.x);
  Mat rhs = tensor_flow_rhs(sph, ss, FlowMode::Unnormalized);
  CHECK((rhs + 4.0 * a).cwiseAbs().maxCoeff() <= 1e-4 * a.cwiseAbs().maxCoeff());
  Mat rhs_n = tensor_flow_rhs(sph, ss, FlowMode::Normalized, 2.0);
  CHECK(rhs_n.cwiseAbs().maxCoeff() <= 1e-4 * a.cwiseAbs().maxCoeff());

  for (const char* name : {"FIX-SPHERE", "FIX-RANDERS-VAR"}) {
    auto spec = make_fixture(name, 3);
    auto s = make_sample(spec, {0.2, 0.1, -0.2}, {0.7, -0.3, 0.5});
    auto sc = riemann_curvature(spec, s);
    for (FlowMode mode : {FlowMode::Unnormalized, FlowMode::Normalized}) {
      double smR = 1.7;  // arbitrary; consistency must hold for any value
      Mat m = tensor_flow_rhs(spec, s, mode, smR);
      double quad = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) quad += m(i, j) * s.y[i] * s.y[j];
      double expect = -2.0 * sc.F2 * sc.Rnorm;
      if (mode == FlowMode::Normalized) expect += 2.0 * smR * sc.F2;
      CHECK(std::abs(quad - expect) <= 1e-6 * (std::abs(expect) + 1.0));
    }
  }
}

TEST_CASE("constant_curvature_oracle closed form") {
  CHECK(constant_curvature_oracle(3, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(constant_curvature_oracle(3, 1.0, 0.1) == doctest::Approx(0.6));
  CHECK_THROWS_AS(constant_curvature_oracle(3, 1.0, 0.25), Extinct);
  CHECK_THROWS_AS(constant_curvature_oracle(3, 1.0, 0.3), Extinct);
}

TEST_CASE("conformal flow on the sphere matches the oracle") {
  auto fam = ParametricFamily::conformal(small_sphere());
  FlowConfig cfg;
  cfg.mode = FlowMode::Unnormalized;
  cfg.dt = 1e-3;
  cfg.steps = 100;
  cfg.integrator = Integrator::RK4;
  cfg.quad.directions_per_fiber = 4;
  double theta0[] = {1.0};
  auto trace = integrate_flow(fam, theta0, cfg);
  REQUIRE(trace.rows.size() == 101);
  const auto& last = trace.rows.back();
  CHECK(last.t == doctest::Approx(0.1));
  CHECK(last.theta[0] == doctest::Approx(0.6).epsilon(1e-6));
  for (const auto& row : trace.rows) CHECK(row.projection_residual <= 1e-8);
  CHECK_FALSE(trace.extinct);
}

TEST_CASE("conformal flow on FIX-EUC is stationary") {
  auto fam = ParametricFamily::conformal(make_fixture("FIX-EUC", 3));
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.steps = 5;
  cfg.quad.directions_per_fiber = 4;
  double theta0[] = {1.0};
  auto trace = integrate_flow(fam, theta0, cfg);
  for (const auto& row : trace.rows)
    CHECK(row.theta[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalized flow fixes the sphere") {
  auto fam = ParametricFamily::conformal(small_sphere());
  FlowConfig cfg;
  cfg.mode = FlowMode::Normalized;
  cfg.dt = 1e-2;
  cfg.steps = 10;
  cfg.quad.directions_per_fiber = 4;
  double theta0[] = {1.0};
  auto trace = integrate_flow(fam, theta0, cfg);
  for (const auto& row : trace.rows) {
    CHECK(std::abs(row.theta[0] - 1.0) <= 1e-8);
    CHECK(row.projection_residual <= 1e-6);
  }
}

TEST_CASE("normalized rhs averages to zero") {
  auto sph = small_sphere();
  SMQuadratureSpec quad;
  auto R = [&](const TangentSample& s) {
    return riemann_curvature(sph, s).Rnorm;
  };
  double smR = sm_average(sph, R, quad);
  double avg = sm_average(
      sph,
      [&](const TangentSample& s) {
        return scalar_flow_rhs(sph, s, FlowMode::Normalized, smR);
      },
      quad);
  CHECK(std::abs(avg) <= 1e-12);
}

TEST_CASE("integrator order on the conformal-log family") {
  auto base = small_sphere();
  double exact = std::log(0.6);  // u(0.1) for n=3, r0=1
  auto run = [&](Integrator integ, double dt) {
    auto fam = ParametricFamily::conformal_log(base);
    FlowConfig cfg;
    cfg.dt = dt;
    cfg.steps = static_cast<int>(std::lround(0.1 / dt));
    cfg.integrator = integ;
    cfg.quad.directions_per_fiber = 4;
    double theta0[] = {0.0};
    auto trace = integrate_flow(fam, theta0, cfg);
    return std::abs(trace.rows.back().theta[0] - exact);
  };
  for (Integrator integ : {Integrator::Euler, Integrator::RK4}) {
    double e1 = run(integ, 4e-3), e2 = run(integ, 2e-3), e3 = run(integ, 1e-3);
    // least-squares slope of log e against log dt over the three runs
    double lx[3] = {std::log(4e-3), std::log(2e-3), std::log(1e-3)};
    double ly[3] = {std::log(e1), std::log(e2), std::log(e3)};
    double mx = (lx[0] + lx[1] + lx[2]) / 3.0, my = (ly[0] + ly[1] + ly[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
      num += (lx[i] - mx) * (ly[i] - my);
      den += (lx[i] - mx) * (lx[i] - mx);
    }
    double order = num / den;
    double expect = integ == Integrator::Euler ? 1.0 : 4.0;
    MESSAGE("observed order: ", order);
    CHECK(std::abs(order - expect) <= 0.3);
  }
}

TEST_CASE("extinction guard and extrapolated extinction time") {
  auto fam = ParametricFamily::conformal(small_sphere());
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 400;
  cfg.integrator = Integrator::RK4;
  cfg.quad.directions_per_fiber = 4;
  double theta0[] = {1.0};
  auto trace = integrate_flow(fam, theta0, cfg);
  CHECK(trace.extinct);
  CHECK(trace.extinction_estimate == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("flow error paths") {
  // zero one-form: randers-scale Jacobian vanishes identically
  auto fam = ParametricFamily::randers_scale(make_fixture("FIX-EUC", 3));
  FlowConfig cfg;
  cfg.quad.directions_per_fiber = 4;
  double theta0[] = {0.5};
  CHECK_THROWS_AS(parametric_flow_step(fam, theta0, cfg, 0.0), RankDeficient);

  auto tight = ParametricFamily::conformal(small_sphere(), 0.9999, 1.1);
  FlowConfig c2;
  c2.dt = 1e-3;
  c2.integrator = Integrator::Euler;
  c2.quad.directions_per_fiber = 4;
  double th[] = {1.0};
  CHECK_THROWS_AS(parametric_flow_step(tight, th, c2, 0.0), BoundsExceeded);
}
