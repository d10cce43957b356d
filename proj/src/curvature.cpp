#include "finsler/curvature.hpp"

#include <map>

namespace finsler {

namespace {

Jet truncate_to(const Jet& a, const std::shared_ptr<const JetSpace>& sp) {
  Jet r(sp);
  std::vector<int> mu;
  for (int p = 0; p < sp->size(); ++p) {
    const auto& e = sp->exponents(p);
    mu.assign(e.begin(), e.end());
    int q = a.space->position(mu);
    if (q >= 0) r.c[p] = a.c[q];
  }
  return r;
}

using JetMat = std::vector<Jet>;  // n x n row-major

JetMat matmul(const JetMat& A, const JetMat& B, int n) {
  JetMat C(n * n, Jet(A[0].space));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet acc(A[0].space);
      for (int k = 0; k < n; ++k) acc += A[i * n + k] * B[k * n + j];
      C[i * n + j] = std::move(acc);
    }
  return C;
}

/// Truncated inverse of a jet matrix by Newton iteration X <- X(2I - gX);
/// each pass doubles the correct Taylor order.
JetMat jet_inverse(const JetMat& g, int n, int order) {
  Mat g0(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g0(i, j) = g[i * n + j].value();
  Mat a0 = g0.inverse();
  JetMat X(n * n, Jet(g[0].space));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X[i * n + j].c[0] = a0(i, j);
  int passes = 0;
  for (int reach = 1; reach <= order; reach *= 2) ++passes;
  for (int it = 0; it < passes; ++it) {
    JetMat E = matmul(g, X, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        E[i * n + j] = -E[i * n + j];
        if (i == j) E[i * n + j] += 2.0;
      }
    X = matmul(X, E, n);
  }
  return X;
}

struct SprayJets {
  int n = 0;
  double F2 = 0.0;
  std::vector<Jet> G;  // order-2 jets in (2n) vars: x first, then y
};

SprayJets spray_jets(const FinslerMetricSpec& spec, std::span<const double> x,
                     std::span<const double> y) {
  const int n = spec.dim();
  auto sp4 = JetSpace::get(2 * n, 4);
  std::vector<Jet> xj, yj;
  for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(sp4, i, x[i]));
  for (int i = 0; i < n; ++i) yj.push_back(Jet::variable(sp4, n + i, y[i]));
  Jet f2 = eval_F2<Jet>(spec, xj, yj);

  auto sp2 = JetSpace::get(2 * n, 2);
  std::vector<int> nu(2 * n, 0);

  JetMat g(n * n, Jet(sp2));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::fill(nu.begin(), nu.end(), 0);
      nu[n + i] += 1;
      nu[n + j] += 1;
      Jet d = derivative_jet(f2, nu) * 0.5;
      g[i * n + j] = d;
      g[j * n + i] = std::move(d);
    }
  JetMat ginv = jet_inverse(g, n, 2);

  std::vector<Jet> yv(n);
  for (int i = 0; i < n; ++i) yv[i] = Jet::variable(sp2, n + i, y[i]);

  // h_l = [F^2]_{x^k y^l} y^k - [F^2]_{x^l}
  std::vector<Jet> hl(n, Jet(sp2));
  for (int l = 0; l < n; ++l) {
    Jet acc(sp2);
    for (int k = 0; k < n; ++k) {
      std::fill(nu.begin(), nu.end(), 0);
      nu[k] = 1;
      nu[n + l] = 1;
      acc += derivative_jet(f2, nu) * yv[k];
    }
    std::fill(nu.begin(), nu.end(), 0);
    nu[l] = 1;
    acc -= truncate_to(derivative_jet(f2, nu), sp2);
    hl[l] = std::move(acc);
  }

  SprayJets out;
  out.n = n;
  out.F2 = f2.value();
  out.G.assign(n, Jet(sp2));
  for (int i = 0; i < n; ++i) {
    Jet acc(sp2);
    for (int l = 0; l < n; ++l) acc += ginv[i * n + l] * hl[l];
    out.G[i] = acc * 0.25;
  }
  return out;
}

}  // namespace

Vec spray_coefficients(const FinslerMetricSpec& spec,
                       const TangentSample& sample) {
  auto sj = spray_jets(spec, sample.x, sample.y);
  Vec G(sj.n);
  for (int i = 0; i < sj.n; ++i) G(i) = sj.G[i].value();
  return G;
}

SprayCurvature riemann_curvature(const FinslerMetricSpec& spec,
                                 const TangentSample& sample) {
  auto sj = spray_jets(spec, sample.x, sample.y);
  const int n = sj.n;
  std::vector<int> mu(2 * n, 0);
  auto d1 = [&](int i, int v) {
    std::fill(mu.begin(), mu.end(), 0);
    mu[v] = 1;
    return sj.G[i].deriv(mu);
  };
  auto d2 = [&](int i, int v, int w) {
    std::fill(mu.begin(), mu.end(), 0);
    mu[v] += 1;
    mu[w] += 1;
    return sj.G[i].deriv(mu);
  };

  SprayCurvature out;
  out.F2 = sj.F2;
  out.G = Vec(n);
  for (int i = 0; i < n; ++i) out.G(i) = sj.G[i].value();
  out.Rmk = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double r = 2.0 * d1(i, k);
      for (int j = 0; j < n; ++j) {
        r -= sample.y[j] * d2(i, j, n + k);
        r += 2.0 * out.G(j) * d2(i, n + j, n + k);
        r -= d1(i, n + j) * d1(j, n + k);
      }
      out.Rmk(i, k) = r;
    }
  out.Ric = out.Rmk.trace();
  out.Rnorm = out.Ric / out.F2;
  return out;
}

namespace {

double ric_at(const FinslerMetricSpec& spec, const TangentSample& base,
              std::span<const double> y) {
  TangentSample t = base;
  t.y.assign(y.begin(), y.end());
  return riemann_curvature(spec, t).Ric;
}

double rnorm_at(const FinslerMetricSpec& spec, const TangentSample& base,
                std::span<const double> y) {
  TangentSample t = base;
  t.y.assign(y.begin(), y.end());
  return riemann_curvature(spec, t).Rnorm;
}

Mat inverse_g(const FinslerMetricSpec& spec, const TangentSample& sample) {
  F2Field f2(spec);
  auto d = vertical_jet(f2, sample, 2);
  Mat g = 0.5 * d.hess;
  return g.inverse();
}

}  // namespace

Mat ricci_vertical_hessian(const FinslerMetricSpec& spec,
                           const TangentSample& sample, const FDConfig& cfg) {
  const int n = spec.dim();
  auto f = [&](std::span<const double> y) { return ric_at(spec, sample, y); };
  double ynorm = 0.0;
  for (double v : sample.y) ynorm += v * v;
  double h = cfg.step_order2 * (1.0 + std::sqrt(ynorm));
  Mat out(n, n);
  std::vector<int> mu(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::fill(mu.begin(), mu.end(), 0);
      mu[i] += 1;
      mu[j] += 1;
      double v = 0.5 * fd_derivative(f, sample.y, mu, h, 2).value;
      out(i, j) = out(j, i) = v;
    }
  return out;
}

namespace {

double rho_at(const FinslerMetricSpec& spec, const TangentSample& base,
              std::span<const double> y, const FDConfig& cfg) {
  TangentSample t = base;
  t.y.assign(y.begin(), y.end());
  Mat ricij = ricci_vertical_hessian(spec, t, cfg);
  Mat ginv = inverse_g(spec, t);
  return (ginv * ricij).trace();
}

}  // namespace

RicciRho ricci_tensor_and_rho(const FinslerMetricSpec& spec,
                              const TangentSample& sample,
                              const FDConfig& cfg) {
  const int n = spec.dim();
  RicciRho out;
  out.Ric_ij = ricci_vertical_hessian(spec, sample, cfg);
  Mat ginv = inverse_g(spec, sample);
  out.rho = (ginv * out.Ric_ij).trace();

  auto f = [&](std::span<const double> y) { return rho_at(spec, sample, y, cfg); };
  double ynorm = 0.0;
  for (double v : sample.y) ynorm += v * v;
  double h = cfg.step_order2 * (1.0 + std::sqrt(ynorm));
  out.rho_i = Vec(n);
  std::vector<int> mu(n, 0);
  for (int i = 0; i < n; ++i) {
    std::fill(mu.begin(), mu.end(), 0);
    mu[i] = 1;
    out.rho_i(i) = fd_derivative(f, sample.y, mu, h, 1).value;
  }
  return out;
}

CurvatureBundle curvature_bundle(const FinslerMetricSpec& spec,
                                 const TangentSample& sample,
                                 const FDConfig& cfg) {
  const int n = spec.dim();
  CurvatureBundle out;
  auto sc = riemann_curvature(spec, sample);
  out.G = sc.G;
  out.Rmk = sc.Rmk;
  out.Ric = sc.Ric;
  out.F2 = sc.F2;
  out.Rnorm = sc.Rnorm;

  auto rr = ricci_tensor_and_rho(spec, sample, cfg);
  out.Ric_ij = rr.Ric_ij;
  out.rho = rr.rho;
  out.rho_i = rr.rho_i;

  auto f = [&](std::span<const double> y) { return rnorm_at(spec, sample, y); };
  double ynorm = 0.0;
  for (double v : sample.y) ynorm += v * v;
  double scale = 1.0 + std::sqrt(ynorm);
  double h1 = cfg.base_step * scale;
  double h2 = cfg.step_order2 * scale;
  double h3 = cfg.step_order3 * scale;

  out.R_der1 = Vec(n);
  out.R_der2 = Mat(n, n);
  out.R_der3 = Tensor3(n);
  std::vector<int> mu(n, 0);
  for (int i = 0; i < n; ++i) {
    std::fill(mu.begin(), mu.end(), 0);
    mu[i] = 1;
    out.R_der1(i) = fd_derivative(f, sample.y, mu, h1, 2).value;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::fill(mu.begin(), mu.end(), 0);
      mu[i] += 1;
      mu[j] += 1;
      double v = fd_derivative(f, sample.y, mu, h2, 2).value;
      out.R_der2(i, j) = out.R_der2(j, i) = v;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        std::fill(mu.begin(), mu.end(), 0);
        mu[i] += 1;
        mu[j] += 1;
        mu[k] += 1;
        double v = fd_derivative(f, sample.y, mu, h3, 2).value;
        out.R_der3(i, j, k) = out.R_der3(i, k, j) = out.R_der3(j, i, k) = v;
        out.R_der3(j, k, i) = out.R_der3(k, i, j) = out.R_der3(k, j, i) = v;
      }
  return out;
}

DiagnosticReport einstein_diagnostic(const FinslerMetricSpec& spec,
                                     std::span<const TangentSample> samples,
                                     double tol_einstein) {
  const int n = spec.dim();
  constexpr double kEps = 1e-12;
  std::map<std::vector<double>, std::vector<double>> by_x;  // x -> R values
  for (const auto& s : samples) {
    if (!s.admissible) continue;
    by_x[s.x].push_back(riemann_curvature(spec, s).Rnorm);
  }
  DiagnosticReport rep;
  for (const auto& [x, rs] : by_x) {
    if (static_cast<int>(rs.size()) < n + 1)
      throw SpecError("einstein_diagnostic: need >= n+1 directions per point");
    double mean = 0.0;
    for (double r : rs) mean += r;
    mean /= static_cast<double>(rs.size());
    double dev = 0.0;
    for (double r : rs)
      dev = std::max(dev, std::abs(r - mean) / (std::abs(mean) + kEps));
    rep.rows.push_back({x, mean, dev});
    rep.max_rel_deviation = std::max(rep.max_rel_deviation, dev);
  }
  rep.einstein = rep.max_rel_deviation <= tol_einstein;
  return rep;
}

}  // namespace finsler
