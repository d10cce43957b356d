#include "finsler/audit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace finsler {

namespace {

constexpr double kEps = 1e-14;
constexpr double kScaleFloor = 0.1;  // see rel_residual below

struct CaseMeta {
  double tol;
  const char* rung;
  bool needs_I;
};

const std::map<std::string, CaseMeta>& case_meta() {
  static const std::map<std::string, CaseMeta> m = {
      {"eq-R", {1e-4, "1e-4", false}},
      {"eq-Ric1", {1e-3, "1e-3", false}},
      {"eq-Ric", {1e-3, "1e-3", true}},
      {"eq-C", {1e-4, "1e-4", true}},
      {"eq-Car", {5e-3, "5e-3", false}},
      {"lemma2-gprime", {1e-4, "1e-4", false}},
      {"lemma2-yprime", {1e-4, "1e-4", false}},
      {"lemma2-Iprime", {1e-3, "1e-3", false}},
      {"lemma2-Iprime-up", {1e-3, "1e-3", false}},
      {"lemma2-hprime", {1e-4, "1e-4", false}},
      {"lemma2-eq1", {1e-3, "1e-3", true}},
      {"lemma2-eq3", {1e-3, "1e-3", true}},
      {"lemma2-eq4", {1e-4, "1e-4", true}},
      {"lemma2-final", {5e-3, "5e-3", true}},
      {"sec5-Iprime", {1e-3, "1e-3", false}},
      {"sec5-Cprime", {1e-3, "1e-3", true}},
      {"sec5-Omega", {1e-3, "1e-3", true}},
  };
  return m;
}

bool is_sec5(const std::string& id) { return id.rfind("sec5-", 0) == 0; }

double maxabs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }
double maxabs(const Vec& v) { return v.cwiseAbs().maxCoeff(); }
double maxabs(const Tensor3& t) {
  double m = 0.0;
  for (double x : t.v) m = std::max(m, std::abs(x));
  return m;
}

Tensor3 t3_scaled(const Tensor3& a, double s) {
  Tensor3 out = a;
  for (double& x : out.v) x *= s;
  return out;
}

Tensor3 t3_diff(const Tensor3& a, const Tensor3& b, double s) {
  Tensor3 out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = (out.v[i] - b.v[i]) * s;
  return out;
}

Tensor3 outer3(const Vec& a) {
  const int n = static_cast<int>(a.size());
  Tensor3 t(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) t(i, j, k) = a(i) * a(j) * a(k);
  return t;
}

/// Relative residual with a characteristic-scale floor: a pure
/// |l|+|r| denominator turns FD noise on an identically-zero side into a
/// spurious O(1) residual, so identities whose both sides vanish on a
/// fixture (e.g. I' = -rho_i on constant curvature) get the sample's
/// curvature scale added, damped so it never masks a real mismatch.
double rel_residual(double maxdiff, double lnorm, double rnorm, double s0) {
  return maxdiff / (lnorm + rnorm + kScaleFloor * s0 + kEps);
}

struct CaseResult {
  double residual = 0.0;
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
  bool trivial = false;
  std::string tag;   // coefficient/form that matched, when applicable
  std::string note;  // static per-case annotation (first sample wins)
  double witness = 0.0;
};

/// Everything the case evaluators share at one sample, for one flow mode.
struct Pre {
  const AuditContext* ctx = nullptr;
  double sigma = 1.0, smR = 0.0;
  Vec yv;
  DeformedBundle Dp, Dm;
  double inv2tau = 0.0;
  Mat Ricup, Lam;
  Vec rho_up, Ip_low, Ip_up;
  double rhoI = 0.0, RicII = 0.0, S = 0.0, Omega = 0.0;
  double curv = 0.0;
  bool degen = true;
  Tensor3 Q0, W0, Csub;  // q-structure, angular block, substituted C'
};

DeformedBundle deform(const TensorBundle& b, const CurvatureBundle& c,
                      const Tensor3& T, double sigma, double smR, double t) {
  const int n = b.dim();
  DeformedBundle d;
  Mat A = 2.0 * sigma * (c.Ric_ij - smR * b.g);
  d.g = b.g - t * A;
  d.C = t3_scaled(b.C, 1.0 + 2.0 * sigma * t * smR);
  d.C.axpy(-sigma * t, T);
  d.F2 = b.F2 * (1.0 - 2.0 * sigma * t * (c.Rnorm - smR));
  d.g_inv = d.g.inverse();
  d.I = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) acc += d.g_inv(j, k) * d.C(i, j, k);
    d.I(i) = acc;
  }
  d.I_up = d.g_inv * d.I;
  d.I_normsq = d.I.dot(d.I_up);
  d.F = std::sqrt(d.F2);
  return d;
}

void finish_deform(DeformedBundle& d, const Vec& yv) {
  d.y_low = d.g * yv;
  d.ell = d.y_low / d.F;
  d.h = d.g - d.ell * d.ell.transpose();
}

Pre make_pre(const AuditContext& ctx, const AuditOptions& opts,
             bool normalized, double smR) {
  Pre p;
  p.ctx = &ctx;
  p.sigma = ctx.sigma;
  p.smR = normalized ? smR : 0.0;
  const auto& b = ctx.b;
  const auto& c = ctx.c;
  const int n = b.dim();
  p.yv = Vec::Zero(n);
  for (int i = 0; i < n; ++i) p.yv(i) = ctx.sample.y[i];

  const double tau = opts.tau;
  p.Dp = deform(b, c, ctx.T, p.sigma, p.smR, tau);
  p.Dm = deform(b, c, ctx.T, p.sigma, p.smR, -tau);
  finish_deform(p.Dp, p.yv);
  finish_deform(p.Dm, p.yv);
  p.inv2tau = 1.0 / (2.0 * tau);

  p.Ricup = b.g_inv * c.Ric_ij * b.g_inv;
  p.rho_up = b.g_inv * c.rho_i;
  Vec lup = p.yv / b.F;
  Vec v = c.Ric_ij * lup;
  p.Lam = v * b.ell.transpose() + b.ell * v.transpose();
  p.rhoI = c.rho_i.dot(b.I_up);
  p.RicII = b.I_up.dot(c.Ric_ij * b.I_up);
  p.Ip_low = -p.sigma * c.rho_i;
  p.Ip_up =
      2.0 * p.sigma * (p.Ricup * b.I - p.smR * b.I_up) - p.sigma * p.rho_up;
  p.S = p.Ip_up.dot(b.I) + b.I_up.dot(p.Ip_low);
  p.curv = std::max({std::abs(c.Rnorm), maxabs(c.Ric_ij), std::abs(c.rho)});
  p.degen = b.I_normsq <= opts.eps_I;
  if (!p.degen) {
    p.Omega = -p.S / b.I_normsq;
    p.Q0 = t3_scaled(outer3(b.I), 1.0 / b.I_normsq);
  }
  p.W0 = angular_block(b.h, b.I);
  p.Csub = t3_scaled(b.C, 2.0 * p.sigma * p.smR);
  p.Csub.axpy(-p.sigma, ctx.T);
  return p;
}

/// F^2 of the flowed metric as a plain scalar field on TM; used to re-derive
/// the Cartan variation through the full vertical-derivative pipeline.
struct DeformedF2Field : ScalarFieldTM {
  const FinslerMetricSpec* spec;
  double t, sigma, smR;
  DeformedF2Field(const FinslerMetricSpec& s, double t_, double sig, double sm)
      : spec(&s), t(t_), sigma(sig), smR(sm) {}
  double eval(std::span<const double> x,
              std::span<const double> y) const override {
    TangentSample s;
    s.x.assign(x.begin(), x.end());
    s.y.assign(y.begin(), y.end());
    s.admissible = true;
    auto sc = riemann_curvature(*spec, s);
    return sc.F2 - 2.0 * t * sigma * (sc.Ric - smR * sc.F2);
  }
};

Tensor3 cartan_of_field(const ScalarFieldTM& f, const TangentSample& sample) {
  JetConfig jc;
  jc.mode = JetMode::FiniteDifference;
  jc.fd.richardson_levels = 1;
  jc.fd.base_step = 3e-3;
  auto vd = vertical_jet(f, sample, 3, jc);
  return t3_scaled(vd.third, 0.25);
}

// --- the case evaluators -------------------------------------------------

CaseResult eval_eq_R(const Pre& p) {
  const auto& b = p.ctx->b;
  const auto& c = p.ctx->c;
  const int n = b.dim();
  Mat base = c.Rnorm * b.g + 0.5 * b.F2 * c.R_der2;
  Mat rhs = base + c.R_der1 * b.y_low.transpose() +
            b.y_low * c.R_der1.transpose();
  Mat rhs_disp = base;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rhs_disp(i, j) += c.R_der1(i) * b.y_low(j) + c.R_der1(i) * b.y_low(i);
  double s0 = p.curv * std::max(1.0, maxabs(b.g));
  double rs = rel_residual(maxabs(Mat(c.Ric_ij - rhs)), maxabs(c.Ric_ij),
                           maxabs(rhs), s0);
  double rp = rel_residual(maxabs(Mat(c.Ric_ij - rhs_disp)),
                           maxabs(c.Ric_ij), maxabs(rhs_disp), s0);
  CaseResult out;
  out.residual = rs;
  out.lhs_norm = maxabs(c.Ric_ij);
  out.rhs_norm = maxabs(rhs);
  out.tag = rs <= rp ? "symmetric" : "display-literal";
  std::ostringstream os;
  os << "last term audited as R_,i y_j + R_,j y_i; displayed form residual="
     << rp;
  out.note = os.str();
  return out;
}

Tensor3 eq_ric1_rhs(const Pre& p) {
  const auto& b = p.ctx->b;
  const auto& c = p.ctx->c;
  const int n = b.dim();
  Tensor3 rhs = t3_scaled(b.C, 2.0 * c.Rnorm);
  rhs.axpy(0.5 * b.F2, c.R_der3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        rhs(i, j, k) += b.g(j, k) * c.R_der1(i) + b.g(i, j) * c.R_der1(k) +
                        b.g(k, i) * c.R_der1(j) + c.R_der2(j, k) * b.y_low(i) +
                        c.R_der2(i, j) * b.y_low(k) +
                        c.R_der2(k, i) * b.y_low(j);
  return rhs;
}

CaseResult eval_eq_Ric1(const Pre& p) {
  Tensor3 rhs = eq_ric1_rhs(p);
  const Tensor3& lhs = p.ctx->T;
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  out.residual = rel_residual(maxabs(t3_diff(lhs, rhs, 1.0)), out.lhs_norm,
                              out.rhs_norm, p.curv);
  return out;
}

CaseResult eval_eq_Ric(const Pre& p) {
  const auto& b = p.ctx->b;
  const auto& c = p.ctx->c;
  double lhs = contract3(p.ctx->T, b.I_up, b.I_up, b.I_up);
  double rhs = 2.0 * c.Rnorm * contract3(b.C, b.I_up, b.I_up, b.I_up) +
               0.5 * b.F2 * contract3(c.R_der3, b.I_up, b.I_up, b.I_up) +
               3.0 * b.I_normsq * c.R_der1.dot(b.I_up);
  CaseResult out;
  out.lhs_norm = std::abs(lhs);
  out.rhs_norm = std::abs(rhs);
  double s0 = p.curv * b.I_normsq * std::sqrt(b.I_normsq);
  out.residual = rel_residual(std::abs(lhs - rhs), out.lhs_norm, out.rhs_norm, s0);
  return out;
}

CaseResult eval_eq_C(const Pre& p) {
  const auto& b = p.ctx->b;
  const int n = b.dim();
  double I4 = b.I_normsq * b.I_normsq;
  double kappa = contract3(b.C, b.I_up, b.I_up, b.I_up) / I4;
  auto fit = semi_c_fit_least_squares(b, n);
  double direct = (3.0 * fit.p + (1.0 + n) * fit.q) / (1.0 + n);
  double disp = (1.0 + n * fit.q) / (1.0 + n);
  double s0 = 1.0;
  double rd = rel_residual(std::abs(kappa - direct), std::abs(kappa),
                           std::abs(direct), s0);
  double rp = rel_residual(std::abs(kappa - disp), std::abs(kappa),
                           std::abs(disp), s0);
  CaseResult out;
  out.residual = rd;
  out.lhs_norm = std::abs(kappa);
  out.rhs_norm = std::abs(direct);
  out.tag = rd <= rp ? "direct" : "display";
  std::ostringstream os;
  os << "kappa=" << kappa << " direct=(3p+(1+n)q)/(1+n)=" << direct
     << " display=(1+nq)/(1+n)=" << disp << " q=" << fit.q;
  out.note = os.str();
  return out;
}

CaseResult eval_eq_Car(const Pre& p, const FinslerMetricSpec& spec,
                       const AuditOptions& opts) {
  const double tf = opts.tau_field;
  DeformedF2Field fp(spec, tf, p.sigma, p.smR);
  DeformedF2Field fm(spec, -tf, p.sigma, p.smR);
  Tensor3 lhs = t3_diff(cartan_of_field(fp, p.ctx->sample),
                        cartan_of_field(fm, p.ctx->sample), 1.0 / (2.0 * tf));
  const Tensor3& rhs = p.Csub;
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  out.residual = rel_residual(maxabs(t3_diff(lhs, rhs, 1.0)), out.lhs_norm,
                              out.rhs_norm, p.curv);
  out.note = "C' re-derived through the vertical FD pipeline of the deformed"
             " F^2 field";
  return out;
}

CaseResult eval_gprime(const Pre& p) {
  Mat lhs = (p.Dp.g_inv - p.Dm.g_inv) * p.inv2tau;
  Mat rhs = 2.0 * p.sigma * (p.Ricup - p.smR * p.ctx->b.g_inv);
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  double s0 = p.curv * std::max(1.0, maxabs(p.ctx->b.g_inv));
  out.residual =
      rel_residual(maxabs(Mat(lhs - rhs)), out.lhs_norm, out.rhs_norm, s0);
  return out;
}

CaseResult eval_yprime(const Pre& p) {
  Vec lhs = (p.Dp.y_low - p.Dm.y_low) * p.inv2tau;
  Vec rhs = -2.0 * p.sigma *
            (p.ctx->c.Ric_ij * p.yv - p.smR * p.ctx->b.y_low);
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  out.residual = rel_residual(maxabs(Vec(lhs - rhs)), out.lhs_norm,
                              out.rhs_norm, p.curv);
  return out;
}

CaseResult eval_Iprime(const Pre& p) {
  Vec lhs = (p.Dp.I - p.Dm.I) * p.inv2tau;
  Vec rhs = p.Ip_low;
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  out.residual = rel_residual(maxabs(Vec(lhs - rhs)), out.lhs_norm,
                              out.rhs_norm, p.curv);
  return out;
}

CaseResult eval_Iprime_up(const Pre& p) {
  Vec lhs = (p.Dp.I_up - p.Dm.I_up) * p.inv2tau;
  const Vec& rhs = p.Ip_up;
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  out.residual = rel_residual(maxabs(Vec(lhs - rhs)), out.lhs_norm,
                              out.rhs_norm, p.curv);
  return out;
}

CaseResult eval_hprime(const Pre& p) {
  const auto& b = p.ctx->b;
  const auto& c = p.ctx->c;
  Mat lhs = (p.Dp.h - p.Dm.h) * p.inv2tau;
  Mat rhs = p.sigma * (2.0 * c.Rnorm * b.h - 2.0 * c.Rnorm * b.g -
                       2.0 * c.Ric_ij + 2.0 * p.Lam) +
            2.0 * p.sigma * p.smR * b.h;
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  out.residual = rel_residual(maxabs(Mat(lhs - rhs)), out.lhs_norm,
                              out.rhs_norm, p.curv);
  return out;
}

Tensor3 q_structure(const DeformedBundle& d) {
  return t3_scaled(outer3(d.I), 1.0 / d.I_normsq);
}

CaseResult eval_eq1(const Pre& p) {
  const auto& b = p.ctx->b;
  Tensor3 lhs =
      t3_diff(q_structure(p.Dp), q_structure(p.Dm), p.inv2tau);
  Mat II = b.I * b.I.transpose();
  Tensor3 rho_part = t3_scaled(angular_block(II, p.Ip_low), 1.0 / b.I_normsq);
  Tensor3 rhs = t3_scaled(p.Q0, -p.S / b.I_normsq);
  rhs.axpy(1.0, rho_part);
  Tensor3 rhs_disp = t3_scaled(b.C, -p.S / b.I_normsq);
  rhs_disp.axpy(1.0, rho_part);
  double s0 = p.curv * std::sqrt(b.I_normsq);
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  out.residual = rel_residual(maxabs(t3_diff(lhs, rhs, 1.0)), out.lhs_norm,
                              out.rhs_norm, s0);
  double rp = rel_residual(maxabs(t3_diff(lhs, rhs_disp, 1.0)), out.lhs_norm,
                           maxabs(rhs_disp), s0);
  out.tag = out.residual <= rp ? "q-structure" : "display-literal";
  std::ostringstream os;
  os << "displayed form (C_ijk in the leading term) residual=" << rp;
  out.note = os.str();
  return out;
}

CaseResult eval_eq3(const Pre& p) {
  const auto& b = p.ctx->b;
  const auto& c = p.ctx->c;
  Tensor3 Wp = angular_block(p.Dp.h, p.Dp.I);
  Tensor3 Wm = angular_block(p.Dm.h, p.Dm.I);
  double lhs = (contract3(Wp, b.I_up, b.I_up, b.I_up) -
                contract3(Wm, b.I_up, b.I_up, b.I_up)) *
               p.inv2tau;
  double I4 = b.I_normsq * b.I_normsq;
  double rhs = -3.0 * p.sigma * (p.rhoI + 2.0 * p.RicII) * b.I_normsq +
               6.0 * p.sigma * p.smR * I4;
  // full-tensor Eq. (2) alongside the displayed contraction
  Tensor3 lhs2 = t3_diff(Wp, Wm, p.inv2tau);
  Tensor3 rhs2 = t3_scaled(angular_block(b.h, c.rho_i), -p.sigma);
  rhs2.axpy(-2.0 * p.sigma * c.Rnorm, angular_block(b.g, b.I));
  rhs2.axpy(-2.0 * p.sigma, angular_block(c.Ric_ij, b.I));
  rhs2.axpy(2.0 * p.sigma * c.Rnorm, angular_block(b.h, b.I));
  rhs2.axpy(2.0 * p.sigma, angular_block(p.Lam, b.I));
  rhs2.axpy(2.0 * p.sigma * p.smR, p.W0);
  double s0 = p.curv * b.I_normsq * std::sqrt(b.I_normsq);
  double r2 = rel_residual(maxabs(t3_diff(lhs2, rhs2, 1.0)), maxabs(lhs2),
                           maxabs(rhs2), p.curv * std::sqrt(b.I_normsq));
  CaseResult out;
  out.lhs_norm = std::abs(lhs);
  out.rhs_norm = std::abs(rhs);
  out.residual = std::max(
      rel_residual(std::abs(lhs - rhs), out.lhs_norm, out.rhs_norm, s0), r2);
  std::ostringstream os;
  os << "full-tensor Eq.(2) residual=" << r2;
  out.note = os.str();
  return out;
}

CaseResult eval_eq4(const Pre& p) {
  const auto& b = p.ctx->b;
  const int n = b.dim();
  double I4 = b.I_normsq * b.I_normsq;
  Tensor3 III = outer3(b.I);
  CaseResult out;
  for (double qp : {1.0, -0.7}) {
    double pp = -qp;  // p' + q' = 0
    Tensor3 M = t3_scaled(p.W0, pp / (1.0 + n));
    M.axpy(qp / b.I_normsq, III);
    double lhs = contract3(M, b.I_up, b.I_up, b.I_up);
    double rhs = (n - 2.0) * qp / (n + 1.0) * I4;
    double rhs_disp = n * qp / (n + 1.0) * I4;
    double r = rel_residual(std::abs(lhs - rhs), std::abs(lhs), std::abs(rhs),
                            I4);
    double rp = rel_residual(std::abs(lhs - rhs_disp), std::abs(lhs),
                             std::abs(rhs_disp), I4);
    if (r > out.residual) {
      out.residual = r;
      out.lhs_norm = std::abs(lhs);
      out.rhs_norm = std::abs(rhs);
    }
    if (out.note.empty()) {
      std::ostringstream os;
      os << "coefficient (n-2)/(n+1) audited; displayed n/(n+1) residual="
         << rp << " at q'=" << qp;
      out.note = os.str();
      out.tag = r <= rp ? "(n-2)/(n+1)" : "n/(n+1)";
    }
  }
  return out;
}

CaseResult eval_final(const Pre& p, const AuditOptions& opts) {
  const auto& b = p.ctx->b;
  const auto& c = p.ctx->c;
  const int n = b.dim();
  double I2 = b.I_normsq;
  double I4 = I2 * I2;
  double lhs = (contract3(p.Dp.C, b.I_up, b.I_up, b.I_up) -
                contract3(p.Dm.C, b.I_up, b.I_up, b.I_up)) *
               p.inv2tau;
  auto fit = semi_c_fit_least_squares(b, n);
  double qp = q_prime_probe(*p.ctx, opts.dt_probe);
  double Wc = -3.0 * p.sigma * (p.rhoI + 2.0 * p.RicII) * I2 +
              6.0 * p.sigma * p.smR * I4;
  double Qc = I2 * (-p.S - 3.0 * p.sigma * p.rhoI);
  double rhs = (n - 2.0) * qp / (n + 1.0) * I4 + fit.p / (1.0 + n) * Wc +
               fit.q * Qc;
  // the displayed final line, with its inherited coefficients, for the record
  double term2 = fit.q * (2.0 * (n * fit.q + 1.0) * (p.rhoI - p.RicII) /
                              ((n + 1.0) * I2) * I2 -
                          3.0 * p.rhoI * I2) * p.sigma;
  double rhs_disp = n * qp / (n + 1.0) * I4 - term2 -
                     3.0 * p.sigma * fit.p / (n + 1.0) *
                         (p.rhoI + 2.0 * p.RicII) * I2;
  double s0 = p.curv * I2 * std::sqrt(I2);
  CaseResult out;
  out.lhs_norm = std::abs(lhs);
  out.rhs_norm = std::abs(rhs);
  out.residual =
      rel_residual(std::abs(lhs - rhs), out.lhs_norm, out.rhs_norm, s0);
  double rp = rel_residual(std::abs(lhs - rhs_disp), out.lhs_norm,
                           std::abs(rhs_disp), s0);
  out.tag = out.residual <= rp ? "derived" : "display-literal";
  out.witness = std::abs(lhs) / I2;  // divisibility: C'I^3 / ||I||^2
  std::ostringstream os;
  os << "q'=" << qp << "; displayed-coefficient residual=" << rp;
  out.note = os.str();
  return out;
}

CaseResult eval_sec5_Iprime(const Pre& p, const AuditOptions& opts) {
  CaseResult out = eval_Iprime(p);
  // <R>-cancellation: the un-normalized variation must give the same I'
  DeformedBundle up = deform(p.ctx->b, p.ctx->c, p.ctx->T, p.sigma, 0.0, opts.tau);
  DeformedBundle um = deform(p.ctx->b, p.ctx->c, p.ctx->T, p.sigma, 0.0, -opts.tau);
  Vec lhs_n = (p.Dp.I - p.Dm.I) * p.inv2tau;
  Vec lhs_u = (up.I - um.I) * p.inv2tau;
  double cancel = rel_residual(maxabs(Vec(lhs_n - lhs_u)), maxabs(lhs_n),
                               maxabs(lhs_u), p.curv);
  out.residual = std::max(out.residual, cancel);
  std::ostringstream os;
  os << "normalized-vs-unnormalized cancellation residual=" << cancel;
  out.note = os.str();
  return out;
}

CaseResult eval_sec5_Cprime(const Pre& p) {
  const auto& b = p.ctx->b;
  Tensor3 lhs = t3_diff(q_structure(p.Dp), q_structure(p.Dm), p.inv2tau);
  Mat II = b.I * b.I.transpose();
  Tensor3 rho_part = t3_scaled(angular_block(II, p.Ip_low), 1.0 / b.I_normsq);
  Tensor3 rhs = t3_scaled(p.Q0, p.Omega);
  rhs.axpy(1.0, rho_part);
  double s0 = p.curv * std::sqrt(b.I_normsq);
  CaseResult out;
  out.lhs_norm = maxabs(lhs);
  out.rhs_norm = maxabs(rhs);
  out.residual = rel_residual(maxabs(t3_diff(lhs, rhs, 1.0)), out.lhs_norm,
                              out.rhs_norm, s0);
  // the same display applied to the full Cartan variation
  Tensor3 rhsC = t3_scaled(b.C, p.Omega);
  rhsC.axpy(1.0, rho_part);
  double rg = rel_residual(maxabs(t3_diff(p.Csub, rhsC, 1.0)), maxabs(p.Csub),
                           maxabs(rhsC), s0);
  std::ostringstream os;
  os << "display audited on the q-structure variation; general-C residual="
     << rg;
  out.note = os.str();
  out.tag = "q-structure";
  return out;
}

CaseResult eval_sec5_Omega(const Pre& p) {
  const auto& b = p.ctx->b;
  double I2 = b.I_normsq;
  double lhs = (contract3(q_structure(p.Dp), b.I_up, b.I_up, b.I_up) -
                contract3(q_structure(p.Dm), b.I_up, b.I_up, b.I_up)) *
               p.inv2tau;
  double rhs = (p.Omega * I2 - 3.0 * p.sigma * p.rhoI) * I2;
  // Omega's two displayed expressions must agree
  double omega2 = p.sigma * (2.0 * p.rhoI - 2.0 * p.RicII) / I2 +
                  2.0 * p.sigma * p.smR;
  double s0 = p.curv * I2 * std::sqrt(I2);
  CaseResult out;
  out.lhs_norm = std::abs(lhs);
  out.rhs_norm = std::abs(rhs);
  out.residual =
      rel_residual(std::abs(lhs - rhs), out.lhs_norm, out.rhs_norm, s0);
  // the same display applied to the full Cartan variation C' I^3
  double lhs_g = contract3(p.Csub, b.I_up, b.I_up, b.I_up);
  double rg = rel_residual(std::abs(lhs_g - rhs), std::abs(lhs_g),
                           std::abs(rhs), s0);
  std::ostringstream os;
  os << "Omega=" << p.Omega << " alt-form delta=" << std::abs(p.Omega - omega2)
     << "; display audited on the q-structure variation; general-C residual="
     << rg;
  out.note = os.str();
  out.tag = "q-structure";
  return out;
}

CaseResult eval_case(const std::string& id, const Pre& p,
                     const FinslerMetricSpec& spec, const AuditOptions& opts) {
  if (id == "eq-R") return eval_eq_R(p);
  if (id == "eq-Ric1") return eval_eq_Ric1(p);
  if (id == "eq-Ric") return eval_eq_Ric(p);
  if (id == "eq-C") return eval_eq_C(p);
  if (id == "eq-Car") return eval_eq_Car(p, spec, opts);
  if (id == "lemma2-gprime") return eval_gprime(p);
  if (id == "lemma2-yprime") return eval_yprime(p);
  if (id == "lemma2-Iprime") return eval_Iprime(p);
  if (id == "lemma2-Iprime-up") return eval_Iprime_up(p);
  if (id == "lemma2-hprime") return eval_hprime(p);
  if (id == "lemma2-eq1") return eval_eq1(p);
  if (id == "lemma2-eq3") return eval_eq3(p);
  if (id == "lemma2-eq4") return eval_eq4(p);
  if (id == "lemma2-final") return eval_final(p, opts);
  if (id == "sec5-Iprime") return eval_sec5_Iprime(p, opts);
  if (id == "sec5-Cprime") return eval_sec5_Cprime(p);
  if (id == "sec5-Omega") return eval_sec5_Omega(p);
  throw SpecError("unknown audit case: " + id);
}

std::vector<ResidualReport> run_cases(const std::vector<std::string>& ids,
                                      const FinslerMetricSpec& spec,
                                      std::span<const TangentSample> samples,
                                      const AuditOptions& opts,
                                      std::optional<double> smR_pre) {
  bool any_norm = opts.mode == FlowMode::Normalized;
  for (const auto& id : ids) any_norm = any_norm || is_sec5(id);
  double smR = 0.0;
  if (any_norm) {
    if (smR_pre) {
      smR = *smR_pre;
    } else {
      smR = sm_average(
          spec,
          [&](const TangentSample& s) {
            return riemann_curvature(spec, s).Rnorm;
          },
          opts.quad);
    }
  }

  struct PerCase {
    std::vector<double> residuals;
    double lhs_norm = 0.0, rhs_norm = 0.0, witness = 0.0;
    std::map<std::string, int> tags;
    std::string note;
    int trivial = 0, evaluated = 0;
  };
  std::vector<PerCase> acc(ids.size());

  for (const auto& sample : samples) {
    if (!sample.admissible) continue;
    AuditContext ctx = make_audit_context(spec, sample, opts, smR);
    std::optional<Pre> pre_u, pre_n;
    for (size_t k = 0; k < ids.size(); ++k) {
      const auto& id = ids[k];
      const auto& meta = case_meta().at(id);
      bool norm = is_sec5(id) || opts.mode == FlowMode::Normalized;
      auto& pre = norm ? pre_n : pre_u;
      if (!pre) pre = make_pre(ctx, opts, norm, smR);
      auto& a = acc[k];
      if (meta.needs_I && pre->degen) {
        a.residuals.push_back(0.0);
        ++a.trivial;
        ++a.evaluated;
        continue;
      }
      CaseResult r = eval_case(id, *pre, spec, opts);
      a.residuals.push_back(r.residual);
      a.lhs_norm = std::max(a.lhs_norm, r.lhs_norm);
      a.rhs_norm = std::max(a.rhs_norm, r.rhs_norm);
      a.witness = std::max(a.witness, r.witness);
      if (!r.tag.empty()) ++a.tags[r.tag];
      if (a.note.empty()) a.note = r.note;
      ++a.evaluated;
    }
  }

  std::vector<ResidualReport> out;
  for (size_t k = 0; k < ids.size(); ++k) {
    const auto& id = ids[k];
    const auto& meta = case_meta().at(id);
    auto& a = acc[k];
    ResidualReport rep;
    rep.id = id;
    rep.residuals = a.residuals;
    rep.tolerance = meta.tol;
    rep.rung = meta.rung;
    rep.lhs_norm = a.lhs_norm;
    rep.rhs_norm = a.rhs_norm;
    if (!a.residuals.empty()) {
      rep.max_residual =
          *std::max_element(a.residuals.begin(), a.residuals.end());
      std::vector<double> sorted = a.residuals;
      std::sort(sorted.begin(), sorted.end());
      rep.median_residual = sorted[sorted.size() / 2];
    }
    rep.trivially_satisfied = a.evaluated > 0 && a.trivial == a.evaluated;
    rep.pass = rep.trivially_satisfied || rep.max_residual <= rep.tolerance;
    std::ostringstream os;
    if (rep.trivially_satisfied) os << "trivially satisfied (||I|| below gate)";
    if (!a.note.empty()) {
      if (os.tellp() > 0) os << "; ";
      os << a.note;
    }
    for (const auto& [tag, count] : a.tags) {
      os << "; matched " << tag << " on " << count << "/" << a.evaluated
         << " samples";
    }
    if (id == "lemma2-final" && !rep.trivially_satisfied)
      os << "; divisibility witness max |C'I^3|/||I||^2 = " << a.witness;
    rep.notes = os.str();
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace

AuditContext make_audit_context(const FinslerMetricSpec& spec,
                                const TangentSample& sample,
                                const AuditOptions& opts, double smR) {
  AuditContext ctx;
  ctx.sample = sample;
  ctx.b = compute_bundle(spec, sample);
  ctx.c = curvature_bundle(spec, sample, opts.fd);
  ctx.sigma = opts.flow_sign;
  ctx.normalized = opts.mode == FlowMode::Normalized;
  ctx.smR = ctx.normalized ? smR : 0.0;

  const int n = ctx.b.dim();
  double ynorm = 0.0;
  for (double v : sample.y) ynorm += v * v;
  double h = opts.fd.step_order3 * (1.0 + std::sqrt(ynorm));
  auto ric = [&](std::span<const double> y) {
    TangentSample s;
    s.x = sample.x;
    s.y.assign(y.begin(), y.end());
    s.admissible = true;
    return riemann_curvature(spec, s).Ric;
  };
  ctx.T = Tensor3(n);
  std::vector<int> mu(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        std::fill(mu.begin(), mu.end(), 0);
        mu[i] += 1;
        mu[j] += 1;
        mu[k] += 1;
        double v = 0.5 * fd_derivative(ric, sample.y, mu, h, 1).value;
        ctx.T(i, j, k) = ctx.T(i, k, j) = ctx.T(j, i, k) = v;
        ctx.T(j, k, i) = ctx.T(k, i, j) = ctx.T(k, j, i) = v;
      }
  return ctx;
}

DeformedBundle deformed_bundle(const AuditContext& ctx, double t) {
  DeformedBundle d = deform(ctx.b, ctx.c, ctx.T, ctx.sigma, ctx.smR, t);
  Vec yv = Vec::Zero(ctx.b.dim());
  for (int i = 0; i < ctx.b.dim(); ++i) yv(i) = ctx.sample.y[i];
  finish_deform(d, yv);
  return d;
}

double q_prime_probe(const AuditContext& ctx, double dt_probe) {
  const int n = ctx.b.dim();
  auto fit_at = [&](double t) {
    DeformedBundle d = deformed_bundle(ctx, t);
    Eigen::SelfAdjointEigenSolver<Mat> es(d.g);
    if (es.eigenvalues().minCoeff() <= 0.0 || !(d.F2 > 0.0))
      throw ProbeStepInvalid("q_prime_probe: deformed sample inadmissible");
    TensorBundle tb;
    tb.F2 = d.F2;
    tb.F = d.F;
    tb.g = d.g;
    tb.g_inv = d.g_inv;
    tb.C = d.C;
    tb.I = d.I;
    tb.I_up = d.I_up;
    tb.I_normsq = d.I_normsq;
    tb.y_low = d.y_low;
    tb.ell = d.ell;
    tb.h = d.h;
    return semi_c_fit_least_squares(tb, n).q;
  };
  return (fit_at(dt_probe) - fit_at(-dt_probe)) / (2.0 * dt_probe);
}

const std::vector<std::string>& audit_case_ids() {
  static const std::vector<std::string> ids = {
      "eq-R",          "eq-Ric1",          "eq-Ric",
      "eq-C",          "eq-Car",           "lemma2-gprime",
      "lemma2-yprime", "lemma2-Iprime",    "lemma2-Iprime-up",
      "lemma2-hprime", "lemma2-eq1",       "lemma2-eq3",
      "lemma2-eq4",    "lemma2-final",     "sec5-Iprime",
      "sec5-Cprime",   "sec5-Omega"};
  return ids;
}

bool audit_case_needs_semi_c(const std::string& id) {
  auto it = case_meta().find(id);
  if (it == case_meta().end()) throw SpecError("unknown audit case: " + id);
  return it->second.needs_I;
}

ResidualReport audit_case(const std::string& id, const FinslerMetricSpec& spec,
                          std::span<const TangentSample> samples,
                          const AuditOptions& opts) {
  return run_cases({id}, spec, samples, opts, std::nullopt).front();
}

std::vector<ResidualReport> audit_selected(
    const std::vector<std::string>& ids, const FinslerMetricSpec& spec,
    std::span<const TangentSample> samples, const AuditOptions& opts) {
  return run_cases(ids, spec, samples, opts, std::nullopt);
}

std::vector<ResidualReport> audit_all(const FinslerMetricSpec& spec,
                                      std::span<const TangentSample> samples,
                                      const AuditOptions& opts) {
  return run_cases(audit_case_ids(), spec, samples, opts, std::nullopt);
}

ResidualReport audit_eq_R(const FinslerMetricSpec& spec,
                          const TangentSample& sample,
                          const AuditOptions& opts) {
  return audit_case("eq-R", spec, {&sample, 1}, opts);
}

std::vector<ResidualReport> audit_eq_Ric1_and_Ric(
    const FinslerMetricSpec& spec, const TangentSample& sample,
    const AuditOptions& opts) {
  return run_cases({"eq-Ric1", "eq-Ric"}, spec, {&sample, 1}, opts,
                   std::nullopt);
}

ResidualReport audit_eq_C_coefficient(const FinslerMetricSpec& spec,
                                      const TangentSample& sample,
                                      const AuditOptions& opts) {
  return audit_case("eq-C", spec, {&sample, 1}, opts);
}

std::vector<ResidualReport> audit_lemma2_chain(const FinslerMetricSpec& spec,
                                               const TangentSample& sample,
                                               const AuditOptions& opts) {
  return run_cases({"lemma2-gprime", "lemma2-yprime", "lemma2-Iprime",
                    "lemma2-Iprime-up", "lemma2-hprime", "lemma2-eq1",
                    "lemma2-eq3", "lemma2-eq4"},
                   spec, {&sample, 1}, opts, std::nullopt);
}

ResidualReport audit_lemma2_final(const FinslerMetricSpec& spec,
                                  const TangentSample& sample, double dt_probe,
                                  const AuditOptions& opts) {
  AuditOptions o = opts;
  o.dt_probe = dt_probe;
  return audit_case("lemma2-final", spec, {&sample, 1}, o);
}

std::vector<ResidualReport> audit_sec5_normalized(
    const FinslerMetricSpec& spec, const TangentSample& sample,
    const SMQuadratureSpec& quad, AuditOptions opts) {
  opts.quad = quad;
  double smR = sm_average(
      spec,
      [&](const TangentSample& s) { return riemann_curvature(spec, s).Rnorm; },
      quad);
  return run_cases({"sec5-Iprime", "sec5-Cprime", "sec5-Omega"}, spec,
                   {&sample, 1}, opts, smR);
}

}  // namespace finsler
