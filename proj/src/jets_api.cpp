#include "finsler/jets_api.hpp"

namespace finsler {

namespace {

double fd_partial(const ScalarFieldTM& f, const TangentSample& sample,
                  std::span<const int> mu2n, const FDConfig& cfg) {
  const int n = static_cast<int>(sample.x.size());
  std::vector<double> point(2 * n);
  for (int i = 0; i < n; ++i) point[i] = sample.x[i];
  for (int i = 0; i < n; ++i) point[n + i] = sample.y[i];
  auto wrapped = [&](std::span<const double> p) {
    return f.eval(p.subspan(0, n), p.subspan(n, n));
  };
  int total = 0;
  double scale = 0.0;
  for (int i = 0; i < 2 * n; ++i) total += mu2n[i];
  for (int i = 0; i < 2 * n; ++i) scale += point[i] * point[i];
  double h = cfg.base_step * (1.0 + std::sqrt(scale));
  if (total >= 3) h *= 3.0;  // higher orders divide by h^3; keep roundoff down
  return fd_derivative(wrapped, point, mu2n, h, cfg.richardson_levels).value;
}

}  // namespace

VerticalDerivs vertical_jet(const ScalarFieldTM& f, const TangentSample& sample,
                            int order, const JetConfig& cfg) {
  if (order < 1 || order > 3)
    throw std::invalid_argument("vertical_jet: order must be in {1,2,3}");
  const int n = static_cast<int>(sample.x.size());
  VerticalDerivs out;
  if (order >= 1) out.grad = Vec::Zero(n);
  if (order >= 2) out.hess = Mat::Zero(n, n);
  if (order >= 3) out.third = Tensor3(n);

  if (cfg.mode == JetMode::Taylor && f.has_jet()) {
    auto sp = JetSpace::get(n, order);
    std::vector<Jet> xj, yj;
    for (int i = 0; i < n; ++i) xj.emplace_back(sp, sample.x[i]);
    for (int i = 0; i < n; ++i)
      yj.push_back(Jet::variable(sp, i, sample.y[i]));
    Jet val = f.eval_jet(xj, yj);
    out.value = val.value();
    std::vector<int> mu(n, 0);
    for (int i = 0; i < n; ++i) {
      std::fill(mu.begin(), mu.end(), 0);
      mu[i] = 1;
      out.grad(i) = val.deriv(mu);
    }
    if (order >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          std::fill(mu.begin(), mu.end(), 0);
          mu[i] += 1;
          mu[j] += 1;
          double v = val.deriv(mu);
          out.hess(i, j) = v;
          out.hess(j, i) = v;
        }
    if (order >= 3)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          for (int k = j; k < n; ++k) {
            std::fill(mu.begin(), mu.end(), 0);
            mu[i] += 1;
            mu[j] += 1;
            mu[k] += 1;
            double v = val.deriv(mu);
            out.third(i, j, k) = out.third(i, k, j) = out.third(j, i, k) = v;
            out.third(j, k, i) = out.third(k, i, j) = out.third(k, j, i) = v;
          }
    return out;
  }

  // finite-difference fallback
  out.value = f.eval(sample.x, sample.y);
  std::vector<int> mu(2 * n, 0);
  for (int i = 0; i < n; ++i) {
    std::fill(mu.begin(), mu.end(), 0);
    mu[n + i] = 1;
    out.grad(i) = fd_partial(f, sample, mu, cfg.fd);
  }
  if (order >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        std::fill(mu.begin(), mu.end(), 0);
        mu[n + i] += 1;
        mu[n + j] += 1;
        double v = fd_partial(f, sample, mu, cfg.fd);
        out.hess(i, j) = out.hess(j, i) = v;
      }
  if (order >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) {
          std::fill(mu.begin(), mu.end(), 0);
          mu[n + i] += 1;
          mu[n + j] += 1;
          mu[n + k] += 1;
          double v = fd_partial(f, sample, mu, cfg.fd);
          out.third(i, j, k) = out.third(i, k, j) = out.third(j, i, k) = v;
          out.third(j, k, i) = out.third(k, i, j) = out.third(k, j, i) = v;
        }
  return out;
}

HorizontalDerivs horizontal_jet(const ScalarFieldTM& f,
                                const TangentSample& sample, int order,
                                const JetConfig& cfg) {
  if (order < 1 || order > 2)
    throw std::invalid_argument("horizontal_jet: order must be in {1,2}");
  const int n = static_cast<int>(sample.x.size());
  HorizontalDerivs out;
  out.grad = Vec::Zero(n);
  if (order >= 2) out.hess = Mat::Zero(n, n);

  if (cfg.mode == JetMode::Taylor && f.has_jet()) {
    auto sp = JetSpace::get(n, order);
    std::vector<Jet> xj, yj;
    for (int i = 0; i < n; ++i)
      xj.push_back(Jet::variable(sp, i, sample.x[i]));
    for (int i = 0; i < n; ++i) yj.emplace_back(sp, sample.y[i]);
    Jet val = f.eval_jet(xj, yj);
    out.value = val.value();
    std::vector<int> mu(n, 0);
    for (int i = 0; i < n; ++i) {
      std::fill(mu.begin(), mu.end(), 0);
      mu[i] = 1;
      out.grad(i) = val.deriv(mu);
    }
    if (order >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          std::fill(mu.begin(), mu.end(), 0);
          mu[i] += 1;
          mu[j] += 1;
          double v = val.deriv(mu);
          out.hess(i, j) = out.hess(j, i) = v;
        }
    return out;
  }

  out.value = f.eval(sample.x, sample.y);
  std::vector<int> mu(2 * n, 0);
  for (int i = 0; i < n; ++i) {
    std::fill(mu.begin(), mu.end(), 0);
    mu[i] = 1;
    out.grad(i) = fd_partial(f, sample, mu, cfg.fd);
  }
  if (order >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        std::fill(mu.begin(), mu.end(), 0);
        mu[i] += 1;
        mu[j] += 1;
        double v = fd_partial(f, sample, mu, cfg.fd);
        out.hess(i, j) = out.hess(j, i) = v;
      }
  return out;
}

FDResult fd_oracle(const ScalarFieldTM& f, const TangentSample& sample,
                   std::span<const int> multi_index, const FDConfig& cfg) {
  const int n = static_cast<int>(sample.x.size());
  int total = 0;
  for (int e : multi_index) total += e;
  if (total > 4) throw std::invalid_argument("fd_oracle: |mu| must be <= 4");
  std::vector<double> point(2 * n);
  for (int i = 0; i < n; ++i) point[i] = sample.x[i];
  for (int i = 0; i < n; ++i) point[n + i] = sample.y[i];
  auto wrapped = [&](std::span<const double> p) {
    return f.eval(p.subspan(0, n), p.subspan(n, n));
  };
  double scale = 0.0;
  for (int i = 0; i < 2 * n; ++i) scale += point[i] * point[i];
  double h = cfg.base_step * (1.0 + std::sqrt(scale));
  if (total == 3) h *= 3.0;
  if (total == 4) h *= 5.0;
  return fd_derivative(wrapped, point, multi_index, h, cfg.richardson_levels);
}

}  // namespace finsler
