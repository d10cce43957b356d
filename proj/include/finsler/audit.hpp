#pragma once

#include "finsler/flow.hpp"

namespace finsler {

struct ProbeStepInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AuditOptions {
  double flow_sign = 1.0;   // +1: g' = -2 Ric; -1 flips the substitution
  double tau = 1e-6;        // deformation FD step for exact tensor paths
  double tau_field = 1e-2;  // deformation FD step for the re-derived field path
  double dt_probe = 1e-4;   // q' probe step
  double eps_I = kEpsI;
  FlowMode mode = FlowMode::Unnormalized;
  SMQuadratureSpec quad;  // used to obtain <R> in normalized mode
  FDConfig fd;
};

struct ResidualReport {
  std::string id;
  std::vector<double> residuals;  // one per audited sample
  double max_residual = 0.0;
  double median_residual = 0.0;
  double lhs_norm = 0.0;  // max over samples of the side's max-norm
  double rhs_norm = 0.0;
  double tolerance = 1e-3;
  std::string rung;  // "1e-4" | "1e-3" | "5e-3"
  bool pass = false;
  bool trivially_satisfied = false;
  std::string notes;
};

/// Per-sample time-0 data the audits consume; smR is 0 in un-normalized
/// mode.
struct AuditContext {
  TensorBundle b;
  CurvatureBundle c;
  Tensor3 T;  // Ric_{ij,k}, the symmetric vertical derivative of Ric_ij
  TangentSample sample;
  double smR = 0.0;
  double sigma = 1.0;
  bool normalized = false;
};

AuditContext make_audit_context(const FinslerMetricSpec& spec,
                                const TangentSample& sample,
                                const AuditOptions& opts, double smR = 0.0);

/// Tensors of the exactly-deformed metric data at flow time t (the flow
/// substitution applied linearly to g, C, F^2, then everything downstream
/// recomputed).
struct DeformedBundle {
  Mat g, g_inv, h;
  Tensor3 C;
  double F2 = 0.0, F = 0.0, I_normsq = 0.0;
  Vec I, I_up, y_low, ell;
};

DeformedBundle deformed_bundle(const AuditContext& ctx, double t);

/// All identity case ids, in report order.
const std::vector<std::string>& audit_case_ids();

/// True for cases contracted against I (gated on n >= 3 and ||I||).
bool audit_case_needs_semi_c(const std::string& id);

/// One case over a set of samples (inadmissible samples are skipped).
ResidualReport audit_case(const std::string& id, const FinslerMetricSpec& spec,
                          std::span<const TangentSample> samples,
                          const AuditOptions& opts = {});

/// A chosen subset of cases, sharing per-sample context.
std::vector<ResidualReport> audit_selected(
    const std::vector<std::string>& ids, const FinslerMetricSpec& spec,
    std::span<const TangentSample> samples, const AuditOptions& opts = {});

std::vector<ResidualReport> audit_all(const FinslerMetricSpec& spec,
                                      std::span<const TangentSample> samples,
                                      const AuditOptions& opts = {});

// Spec'd per-identity entry points (single sample).
ResidualReport audit_eq_R(const FinslerMetricSpec& spec,
                          const TangentSample& sample,
                          const AuditOptions& opts = {});
std::vector<ResidualReport> audit_eq_Ric1_and_Ric(
    const FinslerMetricSpec& spec, const TangentSample& sample,
    const AuditOptions& opts = {});
ResidualReport audit_eq_C_coefficient(const FinslerMetricSpec& spec,
                                      const TangentSample& sample,
                                      const AuditOptions& opts = {});
std::vector<ResidualReport> audit_lemma2_chain(const FinslerMetricSpec& spec,
                                               const TangentSample& sample,
                                               const AuditOptions& opts = {});
ResidualReport audit_lemma2_final(const FinslerMetricSpec& spec,
                                  const TangentSample& sample,
                                  double dt_probe = 1e-4,
                                  const AuditOptions& opts = {});
std::vector<ResidualReport> audit_sec5_normalized(
    const FinslerMetricSpec& spec, const TangentSample& sample,
    const SMQuadratureSpec& quad, AuditOptions opts = {});

/// q' of the least-squares semi-C fit under the substituted flow, by a
/// central probe in deformation time.
double q_prime_probe(const AuditContext& ctx, double dt_probe);

}  // namespace finsler
