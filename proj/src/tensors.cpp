#include "finsler/tensors.hpp"

namespace finsler {

TensorBundle compute_bundle(const FinslerMetricSpec& spec,
                            const TangentSample& sample) {
  const int n = spec.dim();
  F2Field f2(spec);
  auto d = vertical_jet(f2, sample, 3);

  TensorBundle b;
  b.F2 = d.value;
  if (!(b.F2 > 0.0)) throw NotPositiveDefinite("compute_bundle: F^2 <= 0");
  b.F = std::sqrt(b.F2);
  b.g = 0.5 * d.hess;
  b.C = Tensor3(n);
  for (size_t i = 0; i < b.C.v.size(); ++i) b.C.v[i] = 0.25 * d.third.v[i];

  Eigen::SelfAdjointEigenSolver<Mat> es(b.g);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveDefinite("compute_bundle: g_y not positive definite");
  b.g_inv = b.g.inverse();

  Vec y(n);
  for (int i = 0; i < n; ++i) y(i) = sample.y[i];
  b.y_low = b.g * y;
  b.ell = b.y_low / b.F;
  b.h = b.g - b.ell * b.ell.transpose();

  b.I = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) b.I(i) += b.g_inv(j, k) * b.C(i, j, k);
  b.I_up = b.g_inv * b.I;
  b.I_normsq = b.I.dot(b.I_up);
  return b;
}

double deicke_indicator(const FinslerMetricSpec& spec,
                        std::span<const TangentSample> samples) {
  if (samples.empty())
    throw SpecError("deicke_indicator: needs at least one sample");
  double m = 0.0;
  for (const auto& s : samples) {
    if (!s.admissible) continue;
    auto b = compute_bundle(spec, s);
    m = std::max(m, std::sqrt(std::max(0.0, b.I_normsq)));
  }
  return m;
}

Tensor3 angular_block(const Mat& h, const Vec& I) {
  const int n = static_cast<int>(I.size());
  Tensor3 t(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        t(i, j, k) = h(i, j) * I(k) + h(j, k) * I(i) + h(k, i) * I(j);
  return t;
}

Tensor3 semi_c_tensor(const Mat& h, const Vec& I, const Vec& /*I_up*/,
                      double I_normsq, double p, double q, int n) {
  Tensor3 t = angular_block(h, I);
  double pa = p / (1.0 + n);
  double qb = q / I_normsq;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        t(i, j, k) = pa * t(i, j, k) + qb * I(i) * I(j) * I(k);
  return t;
}

namespace {

double fit_residual(const TensorBundle& b, int n, double p, double q) {
  Tensor3 fit = semi_c_tensor(b.h, b.I, b.I_up, b.I_normsq, p, q, n);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < fit.v.size(); ++i) {
    double d = b.C.v[i] - fit.v[i];
    num += d * d;
    den += b.C.v[i] * b.C.v[i];
  }
  return std::sqrt(num) / (std::sqrt(den) + 1e-300);
}

}  // namespace

SemiCFit semi_c_fit(const TensorBundle& b, int n) {
  if (n < 3) throw FitIllPosed("semi_c_fit: defined for n >= 3 only");
  if (b.I_normsq <= kEpsI)
    throw RiemannianDegenerate("semi_c_fit: ||I||^2 below the fit gate");
  double kappa = contract3(b.C, b.I_up, b.I_up, b.I_up) /
                 (b.I_normsq * b.I_normsq);
  // kappa = (3p + (1+n)q)/(1+n) with p = 1-q  =>  q from the contraction
  SemiCFit fit;
  fit.q = ((1.0 + n) * kappa - 3.0) / (n - 2.0);
  fit.p = 1.0 - fit.q;
  fit.decomposition_residual = fit_residual(b, n, fit.p, fit.q);
  return fit;
}

SemiCFit semi_c_fit_least_squares(const TensorBundle& b, int n) {
  if (n < 3)
    throw FitIllPosed("semi_c_fit_least_squares: defined for n >= 3 only");
  if (b.I_normsq <= kEpsI)
    throw RiemannianDegenerate(
        "semi_c_fit_least_squares: ||I||^2 below the fit gate");
  // C ~ U + q (V - U) with U the C-reducible part and V the I-cubed part
  Tensor3 U = semi_c_tensor(b.h, b.I, b.I_up, b.I_normsq, 1.0, 0.0, n);
  Tensor3 V = semi_c_tensor(b.h, b.I, b.I_up, b.I_normsq, 0.0, 1.0, n);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < U.v.size(); ++i) {
    double d = V.v[i] - U.v[i];
    num += (b.C.v[i] - U.v[i]) * d;
    den += d * d;
  }
  SemiCFit fit;
  fit.q = den > 0.0 ? num / den : 0.0;
  fit.p = 1.0 - fit.q;
  fit.decomposition_residual = fit_residual(b, n, fit.p, fit.q);
  return fit;
}

}  // namespace finsler
