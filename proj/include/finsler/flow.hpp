#pragma once

#include <functional>
#include <limits>

#include "finsler/curvature.hpp"

namespace finsler {

struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BoundsExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotHomogeneous : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Extinct : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

/// One-parameter deformations of a base metric. conformal: F = sqrt(c) F0
/// (a -> c a, b -> sqrt(c) b). conformal-log drives the same family through
/// u = log c, which makes the projected sphere ODE genuinely nonlinear and
/// suitable for integrator-order measurements. randers-scale: b -> tau b.
struct ParametricFamily {
  enum class Kind { Conformal, ConformalLog, RandersScale };
  Kind kind = Kind::Conformal;
  FinslerMetricSpec base;
  std::vector<ParamSpec> params;

  FinslerMetricSpec at(std::span<const double> theta) const;

  static ParametricFamily conformal(FinslerMetricSpec base, double lo = 0.01,
                                    double hi = 100.0);
  static ParametricFamily conformal_log(FinslerMetricSpec base,
                                        double lo = -5.0, double hi = 5.0);
  static ParametricFamily randers_scale(FinslerMetricSpec base, double lo = 0.0,
                                        double hi = 1.0);
};

struct SMQuadratureSpec {
  int directions_per_fiber = 8;
  enum class Weight { Uniform, DetG } weight = Weight::Uniform;
  uint64_t seed = 12345;
};

enum class FlowMode { Unnormalized, Normalized };
enum class Integrator { Euler, RK4 };

struct FlowConfig {
  FlowMode mode = FlowMode::Unnormalized;
  double dt = 1e-3;
  int steps = 1;
  Integrator integrator = Integrator::RK4;
  SMQuadratureSpec quad;
  double extinction_guard = 0.05;  // on the conformal factor c
};

/// d(log F)/dt at the sample: -R, or -R + <R> when normalized.
double scalar_flow_rhs(const FinslerMetricSpec& spec,
                       const TangentSample& sample, FlowMode mode,
                       double sm_average_R = 0.0);

/// Normalized positive quadrature over the sample lattice; exact on
/// constants. The quantity must be 0-homogeneous in y (spot-checked).
double sm_average(const FinslerMetricSpec& spec,
                  const std::function<double(const TangentSample&)>& quantity,
                  const SMQuadratureSpec& quad);

/// -2 Ric_ij, plus 2 <R> g_ij when normalized.
Mat tensor_flow_rhs(const FinslerMetricSpec& spec, const TangentSample& sample,
                    FlowMode mode, double sm_average_R = 0.0);

struct FlowStepResult {
  std::vector<double> theta_next;
  double projection_residual = 0.0;
};

/// Least-squares projection of the pointwise d log F onto the family
/// Jacobian over the lattice, then one euler or rk4 step.
FlowStepResult parametric_flow_step(const ParametricFamily& family,
                                    std::span<const double> theta,
                                    const FlowConfig& config, double t);

/// c(t) = 1 - 2(n-1) t / r0^2 for the shrinking round sphere; throws
/// Extinct at and beyond t* = r0^2 / (2(n-1)).
double constant_curvature_oracle(int n, double r0, double t);

struct FlowTrace {
  struct Row {
    double t = 0.0;
    std::vector<double> theta;
    double projection_residual = 0.0;
    double mean_R = 0.0;
    double min_R = 0.0;
    double max_R = 0.0;
  };
  std::vector<Row> rows;
  bool extinct = false;
  double extinction_estimate = std::numeric_limits<double>::quiet_NaN();
};

FlowTrace integrate_flow(const ParametricFamily& family,
                         std::span<const double> theta0,
                         const FlowConfig& config);

}  // namespace finsler
