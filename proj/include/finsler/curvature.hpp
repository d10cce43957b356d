#pragma once

#include "finsler/tensors.hpp"

namespace finsler {

/// Fast path: spray and Riemann curvature from one order-4 jet pass.
struct SprayCurvature {
  Vec G;              // spray coefficients
  Mat Rmk;            // R^i_k
  double Ric = 0.0;   // R^k_k
  double F2 = 0.0;
  double Rnorm = 0.0;  // Ric / F^2
};

struct RicciRho {
  Mat Ric_ij;  // 1/2 (F^2 Rnorm)_{y^i y^j}
  double rho = 0.0;   // g^{jk} Ric_jk
  Vec rho_i;          // d rho / d y^i
};

struct CurvatureBundle {
  Vec G;
  Mat Rmk;
  double Ric = 0.0;
  double F2 = 0.0;
  double Rnorm = 0.0;
  Mat Ric_ij;
  double rho = 0.0;
  Vec rho_i;
  Vec R_der1;      // Rnorm_{,i}
  Mat R_der2;      // Rnorm_{,i,j}
  Tensor3 R_der3;  // Rnorm_{,i,j,k}
};

Vec spray_coefficients(const FinslerMetricSpec& spec,
                       const TangentSample& sample);

SprayCurvature riemann_curvature(const FinslerMetricSpec& spec,
                                 const TangentSample& sample);

/// Ric_ij = 1/2 (Ric)_{y^i y^j} by FD over the curvature pipeline.
Mat ricci_vertical_hessian(const FinslerMetricSpec& spec,
                           const TangentSample& sample,
                           const FDConfig& cfg = {});

/// Vertical FD over the curvature pipeline; steps per derivative order from
/// the FDConfig calibration.
RicciRho ricci_tensor_and_rho(const FinslerMetricSpec& spec,
                              const TangentSample& sample,
                              const FDConfig& cfg = {});

CurvatureBundle curvature_bundle(const FinslerMetricSpec& spec,
                                 const TangentSample& sample,
                                 const FDConfig& cfg = {});

struct DiagnosticReport {
  struct Row {
    std::vector<double> x;
    double mean_R = 0.0;
    double deviation = 0.0;  // max |R - mean| / (|mean| + eps) at this x
  };
  std::vector<Row> rows;
  double max_rel_deviation = 0.0;
  bool einstein = false;
};

/// Groups samples by base point; requires >= n+1 directions per point.
DiagnosticReport einstein_diagnostic(const FinslerMetricSpec& spec,
                                     std::span<const TangentSample> samples,
                                     double tol_einstein = 1e-4);

inline constexpr const char* kCurvatureConvention =
    "R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k"
    " - dG^i/dy^j dG^j/dy^k; Ric = R^k_k";

// --- classical Riemannian oracle ---------------------------------------
// Brute-force path over a_ij only, central differences throughout; kept
// free of the jet machinery on purpose.

Mat metric_a(const FinslerMetricSpec& spec, std::span<const double> x);

/// Christoffel symbols gamma^i_{jk} of a_ij at x.
Tensor3 christoffel_fd(const FinslerMetricSpec& spec, std::span<const double> x,
                       double h = 1e-4);

/// Classical Ricci tensor of a_ij at x.
Mat classical_ricci_fd(const FinslerMetricSpec& spec, std::span<const double> x,
                       double h = 1e-3);

}  // namespace finsler
