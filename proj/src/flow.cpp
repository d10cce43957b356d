#include "finsler/flow.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

FinslerMetricSpec ParametricFamily::at(std::span<const double> theta) const {
  if (theta.size() != params.size())
    throw SpecError("family: wrong parameter count");
  for (size_t k = 0; k < params.size(); ++k)
    if (theta[k] < params[k].lo || theta[k] > params[k].hi)
      throw BoundsExceeded("family: parameter outside bounds: " +
                           params[k].name);
  FinslerMetricSpec spec = base;
  switch (kind) {
    case Kind::Conformal: {
      double c = theta[0];
      spec.alpha.scale = base.alpha.scale * c;
      spec.beta.scale = base.beta.scale * std::sqrt(c);
      break;
    }
    case Kind::ConformalLog: {
      double c = std::exp(theta[0]);
      spec.alpha.scale = base.alpha.scale * c;
      spec.beta.scale = base.beta.scale * std::sqrt(c);
      break;
    }
    case Kind::RandersScale:
      spec.beta.scale = base.beta.scale * theta[0];
      break;
  }
  return spec;
}

ParametricFamily ParametricFamily::conformal(FinslerMetricSpec base, double lo,
                                             double hi) {
  ParametricFamily f;
  f.kind = Kind::Conformal;
  f.base = std::move(base);
  f.params = {{"c", lo, hi}};
  return f;
}

ParametricFamily ParametricFamily::conformal_log(FinslerMetricSpec base,
                                                 double lo, double hi) {
  ParametricFamily f;
  f.kind = Kind::ConformalLog;
  f.base = std::move(base);
  f.params = {{"u", lo, hi}};
  return f;
}

ParametricFamily ParametricFamily::randers_scale(FinslerMetricSpec base,
                                                 double lo, double hi) {
  ParametricFamily f;
  f.kind = Kind::RandersScale;
  f.base = std::move(base);
  f.params = {{"tau", lo, hi}};
  return f;
}

double scalar_flow_rhs(const FinslerMetricSpec& spec,
                       const TangentSample& sample, FlowMode mode,
                       double sm_average_R) {
  double r = riemann_curvature(spec, sample).Rnorm;
  return mode == FlowMode::Normalized ? -r + sm_average_R : -r;
}

namespace {

std::vector<double> quad_weights(const FinslerMetricSpec& spec,
                                 std::span<const TangentSample> samples,
                                 const SMQuadratureSpec& quad) {
  std::vector<double> w(samples.size(), 1.0);
  if (quad.weight == SMQuadratureSpec::Weight::DetG) {
    F2Field f2(spec);
    for (size_t i = 0; i < samples.size(); ++i) {
      Mat g = 0.5 * vertical_jet(f2, samples[i], 2).hess;
      w[i] = std::sqrt(std::max(g.determinant(), 0.0));
    }
  }
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) throw SpecError("sm_average: degenerate weights");
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

double sm_average(const FinslerMetricSpec& spec,
                  const std::function<double(const TangentSample&)>& quantity,
                  const SMQuadratureSpec& quad) {
  auto samples =
      sample_lattice(spec, quad.directions_per_fiber, quad.seed);
  // 0-homogeneity spot check on the first sample
  {
    const auto& s = samples.front();
    std::vector<double> y2 = s.y;
    for (double& v : y2) v *= 2.0;
    double q1 = quantity(s);
    double q2 = quantity(make_sample(spec, s.x, y2));
    if (std::abs(q1 - q2) > 1e-6 * (std::abs(q1) + 1.0))
      throw NotHomogeneous("sm_average: quantity is not 0-homogeneous in y");
  }
  auto w = quad_weights(spec, samples, quad);
  double acc = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) acc += w[i] * quantity(samples[i]);
  return acc;
}

Mat tensor_flow_rhs(const FinslerMetricSpec& spec, const TangentSample& sample,
                    FlowMode mode, double sm_average_R) {
  Mat ricij = ricci_vertical_hessian(spec, sample);
  Mat rhs = -2.0 * ricij;
  if (mode == FlowMode::Normalized) {
    F2Field f2(spec);
    Mat g = 0.5 * vertical_jet(f2, sample, 2).hess;
    rhs += 2.0 * sm_average_R * g;
  }
  return rhs;
}

namespace {

struct RhsStats {
  Vec theta_dot;
  double residual = 0.0;
  double mean_R = 0.0;
  double min_R = 0.0;
  double max_R = 0.0;
};

RhsStats projected_rhs(const ParametricFamily& family,
                       std::span<const double> theta,
                       const FlowConfig& config) {
  const int p = static_cast<int>(family.params.size());
  auto spec = family.at(theta);
  auto samples =
      sample_lattice(spec, config.quad.directions_per_fiber, config.quad.seed);
  const int m = static_cast<int>(samples.size());

  std::vector<double> R(m);
  for (int s = 0; s < m; ++s)
    R[s] = riemann_curvature(spec, samples[s]).Rnorm;
  auto w = quad_weights(spec, samples, config.quad);
  double smR = 0.0;
  for (int s = 0; s < m; ++s) smR += w[s] * R[s];

  Vec r(m);
  for (int s = 0; s < m; ++s)
    r(s) = config.mode == FlowMode::Normalized ? -R[s] + smR : -R[s];

  // family Jacobian d log F / d theta_k over the lattice, central FD
  Mat J(m, p);
  std::vector<double> th(theta.begin(), theta.end());
  for (int k = 0; k < p; ++k) {
    double dth = 1e-6 * (1.0 + std::abs(theta[k]));
    th[k] = theta[k] + dth;
    auto sp = family.at(th);
    std::vector<double> fp(m);
    for (int s = 0; s < m; ++s) fp[s] = std::log(evaluate_F(sp, samples[s]));
    th[k] = theta[k] - dth;
    sp = family.at(th);
    for (int s = 0; s < m; ++s)
      J(s, k) = (fp[s] - std::log(evaluate_F(sp, samples[s]))) / (2.0 * dth);
    th[k] = theta[k];
  }

  Eigen::ColPivHouseholderQR<Mat> qr(J);
  if (qr.rank() < p)
    throw RankDeficient("parametric_flow_step: family Jacobian rank deficient");

  RhsStats out;
  out.theta_dot = qr.solve(r);
  Vec res = r - J * out.theta_dot;
  out.residual = std::sqrt(res.squaredNorm() / m);
  out.mean_R = smR;
  out.min_R = *std::min_element(R.begin(), R.end());
  out.max_R = *std::max_element(R.begin(), R.end());
  return out;
}

Vec theta_dot_only(const ParametricFamily& family, const Vec& theta,
                   const FlowConfig& config) {
  std::vector<double> th(theta.data(), theta.data() + theta.size());
  return projected_rhs(family, th, config).theta_dot;
}

Vec advance(const ParametricFamily& family, const Vec& theta, const Vec& k1,
            const FlowConfig& config) {
  const double dt = config.dt;
  if (config.integrator == Integrator::Euler) return theta + dt * k1;
  Vec k2 = theta_dot_only(family, theta + 0.5 * dt * k1, config);
  Vec k3 = theta_dot_only(family, theta + 0.5 * dt * k2, config);
  Vec k4 = theta_dot_only(family, theta + dt * k3, config);
  return theta + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

FlowStepResult parametric_flow_step(const ParametricFamily& family,
                                    std::span<const double> theta,
                                    const FlowConfig& config, double /*t*/) {
  auto st = projected_rhs(family, theta, config);
  Vec th(static_cast<int>(theta.size()));
  for (size_t i = 0; i < theta.size(); ++i) th(static_cast<int>(i)) = theta[i];
  Vec next = advance(family, th, st.theta_dot, config);
  FlowStepResult out;
  out.theta_next.assign(next.data(), next.data() + next.size());
  out.projection_residual = st.residual;
  family.at(out.theta_next);  // bounds check, throws BoundsExceeded
  return out;
}

double constant_curvature_oracle(int n, double r0, double t) {
  double rate = 2.0 * (n - 1) / (r0 * r0);
  double c = 1.0 - rate * t;
  if (!(c > 0.0)) throw Extinct("constant_curvature_oracle: t beyond t*");
  return c;
}

namespace {

double conformal_factor_of(const ParametricFamily& family, const Vec& theta) {
  switch (family.kind) {
    case ParametricFamily::Kind::Conformal:
      return theta(0);
    case ParametricFamily::Kind::ConformalLog:
      return std::exp(theta(0));
    default:
      return 1.0;  // guard not applicable
  }
}

}  // namespace

FlowTrace integrate_flow(const ParametricFamily& family,
                         std::span<const double> theta0,
                         const FlowConfig& config) {
  FlowTrace trace;
  Vec theta(static_cast<int>(theta0.size()));
  for (size_t i = 0; i < theta0.size(); ++i)
    theta(static_cast<int>(i)) = theta0[i];
  double t = 0.0;
  for (int step = 0; step <= config.steps; ++step) {
    std::vector<double> th(theta.data(), theta.data() + theta.size());
    auto st = projected_rhs(family, th, config);
    trace.rows.push_back(
        {t, th, st.residual, st.mean_R, st.min_R, st.max_R});
    if (step == config.steps) break;

    double c = conformal_factor_of(family, theta);
    double cdot = family.kind == ParametricFamily::Kind::ConformalLog
                      ? c * st.theta_dot(0)
                      : st.theta_dot(0);
    if (family.kind != ParametricFamily::Kind::RandersScale &&
        c < config.extinction_guard) {
      trace.extinct = true;
      trace.extinction_estimate =
          cdot < 0.0 ? t + c / std::abs(cdot) : t;
      break;
    }
    theta = advance(family, theta, st.theta_dot, config);
    t += config.dt;
  }
  return trace;
}

}  // namespace finsler
