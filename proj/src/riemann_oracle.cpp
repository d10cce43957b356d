#include "finsler/curvature.hpp"

namespace finsler {

Mat metric_a(const FinslerMetricSpec& spec, std::span<const double> x) {
  const int n = spec.dim();
  std::vector<double> a;
  spec.alpha.eval(x, a);
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a[i * n + j];
  return m;
}

Tensor3 christoffel_fd(const FinslerMetricSpec& spec, std::span<const double> x,
                       double h) {
  const int n = spec.dim();
  // da(l, i, j) = d a_ij / d x^l
  Tensor3 da(n);
  std::vector<double> xp(x.begin(), x.end());
  for (int l = 0; l < n; ++l) {
    xp[l] = x[l] + h;
    Mat ap = metric_a(spec, xp);
    xp[l] = x[l] - h;
    Mat am = metric_a(spec, xp);
    xp[l] = x[l];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        da(l, i, j) = (ap(i, j) - am(i, j)) / (2.0 * h);
  }
  Mat ainv = metric_a(spec, x).inverse();
  Tensor3 gamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += ainv(i, l) * (da(j, l, k) + da(k, l, j) - da(l, j, k));
        gamma(i, j, k) = 0.5 * s;
      }
  return gamma;
}

Mat classical_ricci_fd(const FinslerMetricSpec& spec, std::span<const double> x,
                       double h) {
  const int n = spec.dim();
  // dgam(l, *) = d gamma / d x^l by central differences of the Christoffel
  // routine, which is itself FD -- deliberately brute force
  std::vector<Tensor3> dgam;
  dgam.reserve(n);
  std::vector<double> xp(x.begin(), x.end());
  for (int l = 0; l < n; ++l) {
    xp[l] = x[l] + h;
    Tensor3 gp = christoffel_fd(spec, xp);
    xp[l] = x[l] - h;
    Tensor3 gm = christoffel_fd(spec, xp);
    xp[l] = x[l];
    Tensor3 d(n);
    for (size_t t = 0; t < d.v.size(); ++t)
      d.v[t] = (gp.v[t] - gm.v[t]) / (2.0 * h);
    dgam.push_back(std::move(d));
  }
  Tensor3 gamma = christoffel_fd(spec, x);
  Mat ric(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        s += dgam[i](i, j, k) - dgam[j](i, i, k);
        for (int p = 0; p < n; ++p)
          s += gamma(i, i, p) * gamma(p, j, k) - gamma(i, j, p) * gamma(p, i, k);
      }
      ric(j, k) = s;
    }
  return 0.5 * (ric + ric.transpose());
}

}  // namespace finsler
