#include "finsler/metric.hpp"

#include <algorithm>
#include <random>

#include "finsler/linalg.hpp"

namespace finsler {

void ChartSpec::validate() const {
  if (dim < 2) throw SpecError("chart: dim must be >= 2");
  if (static_cast<int>(box.size()) != dim)
    throw SpecError("chart: box must have one interval per axis");
  if (static_cast<int>(grid.size()) != dim)
    throw SpecError("chart: grid must have one count per axis");
  for (const auto& [lo, hi] : box)
    if (!(hi > lo)) throw SpecError("chart: box interval degenerate");
  for (int g : grid)
    if (g < 1) throw SpecError("chart: grid counts must be >= 1");
}

std::vector<std::vector<double>> ChartSpec::grid_points() const {
  std::vector<std::vector<double>> pts;
  std::vector<int> idx(dim, 0);
  while (true) {
    std::vector<double> p(dim);
    for (int a = 0; a < dim; ++a) {
      auto [lo, hi] = box[a];
      // interior nodes, symmetric about the box center
      p[a] = lo + (idx[a] + 1) * (hi - lo) / (grid[a] + 1);
    }
    pts.push_back(std::move(p));
    int a = 0;
    for (; a < dim; ++a) {
      if (++idx[a] < grid[a]) break;
      idx[a] = 0;
    }
    if (a == dim) break;
  }
  return pts;
}

void PhiProfile::derivs(double s, double& p0, double& p1, double& p2) const {
  switch (kind) {
    case Kind::Riemannian:
      p0 = 1.0;
      p1 = p2 = 0.0;
      return;
    case Kind::Randers:
      p0 = 1.0 + s;
      p1 = 1.0;
      p2 = 0.0;
      return;
    case Kind::Kropina:
      p0 = 1.0 / s;
      p1 = -1.0 / (s * s);
      p2 = 2.0 / (s * s * s);
      return;
    case Kind::Matsumoto: {
      double u = 1.0 - s;
      p0 = 1.0 / u;
      p1 = 1.0 / (u * u);
      p2 = 2.0 / (u * u * u);
      return;
    }
    case Kind::Polynomial: {
      p0 = p1 = p2 = 0.0;
      for (size_t k = 0; k < coeffs.size(); ++k) {
        double kk = static_cast<double>(k);
        p0 += coeffs[k] * std::pow(s, kk);
        if (k >= 1) p1 += coeffs[k] * kk * std::pow(s, kk - 1);
        if (k >= 2) p2 += coeffs[k] * kk * (kk - 1) * std::pow(s, kk - 2);
      }
      return;
    }
  }
  throw std::logic_error("phi: bad kind");
}

bool PhiProfile::in_domain(double s) const {
  switch (kind) {
    case Kind::Kropina:
      return std::abs(s) > 1e-12;
    case Kind::Matsumoto:
      return s < 1.0 - 1e-12;
    default:
      return true;
  }
}

void FinslerMetricSpec::validate() const {
  chart.validate();
  const int n = chart.dim;
  if (!(phi.b0 > 0.0)) throw SpecError("phi: b0 must be positive");
  if (!(phi.s_min < phi.s_max)) throw SpecError("phi: empty s_range");
  for (const auto& x : chart.grid_points()) {
    std::vector<double> a;
    alpha.eval(std::span<const double>(x), a);
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = a[i * n + j];
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw SpecError("alpha: a_ij not positive definite at a grid point");
    if (!beta.is_zero()) {
      std::vector<double> b;
      beta.eval(std::span<const double>(x), b);
      Vec bv(n);
      for (int i = 0; i < n; ++i) bv(i) = b[i];
      double bnorm = std::sqrt(bv.dot(A.ldlt().solve(bv)));
      if (!(bnorm < phi.b0))
        throw SpecError(
            "beta: ||b||_alpha must stay below the phi profile's b0 bound");
    }
  }
}

void alpha_beta_s(const FinslerMetricSpec& spec, std::span<const double> x,
                  std::span<const double> y, double& alpha, double& s) {
  const int n = spec.dim();
  std::vector<double> a, b;
  spec.alpha.eval(x, a);
  spec.beta.eval(x, b);
  double a2 = 0.0, be = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a2 += a[i * n + j] * y[i] * y[j];
    be += b[i] * y[i];
  }
  alpha = std::sqrt(std::max(a2, 0.0));
  s = alpha > 0.0 ? be / alpha : 0.0;
}

double evaluate_F(const FinslerMetricSpec& spec, const TangentSample& sample) {
  double ynorm = 0.0;
  for (double v : sample.y) ynorm += v * v;
  if (ynorm == 0.0) throw InadmissibleSample("evaluate_F: y = 0");
  double alpha, s;
  alpha_beta_s(spec, sample.x, sample.y, alpha, s);
  if (!(alpha > 0.0)) throw InadmissibleSample("evaluate_F: alpha = 0");
  if (!spec.phi.in_domain(s))
    throw InadmissibleSample("evaluate_F: s at a profile pole");
  double p0, p1, p2;
  spec.phi.derivs(s, p0, p1, p2);
  if (!(p0 > 0.0)) throw NonPositiveValue("evaluate_F: phi(s) <= 0");
  return alpha * p0;
}

namespace {

Mat fundamental_tensor_at(const FinslerMetricSpec& spec,
                          std::span<const double> x,
                          std::span<const double> y) {
  const int n = spec.dim();
  auto sp = JetSpace::get(n, 2);
  std::vector<Jet> xj, yj;
  for (int i = 0; i < n; ++i) xj.emplace_back(sp, x[i]);
  for (int i = 0; i < n; ++i) yj.push_back(Jet::variable(sp, i, y[i]));
  Jet f2 = eval_F2<Jet>(spec, xj, yj);
  Mat g(n, n);
  std::vector<int> mu(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::fill(mu.begin(), mu.end(), 0);
      mu[i] += 1;
      mu[j] += 1;
      double v = 0.5 * f2.deriv(mu);
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

}  // namespace

AdmissibilityVerdict admissibility_check(const FinslerMetricSpec& spec,
                                         const TangentSample& sample) {
  AdmissibilityVerdict v;
  double ynorm = 0.0;
  for (double w : sample.y) ynorm += w * w;
  if (ynorm == 0.0) return v;
  double alpha, s;
  alpha_beta_s(spec, sample.x, sample.y, alpha, s);
  v.alpha_positive = alpha > 0.0;
  v.s_in_range = s >= spec.phi.s_min && s <= spec.phi.s_max &&
                 spec.phi.in_domain(s);
  if (!v.alpha_positive || !v.s_in_range) return v;

  // ||b||_alpha at x, for the positivity functional argument b^2
  const int n = spec.dim();
  std::vector<double> a, b;
  spec.alpha.eval(std::span<const double>(sample.x), a);
  spec.beta.eval(std::span<const double>(sample.x), b);
  Mat A(n, n);
  Vec bv(n);
  for (int i = 0; i < n; ++i) {
    bv(i) = b[i];
    for (int j = 0; j < n; ++j) A(i, j) = a[i * n + j];
  }
  double b2 = bv.dot(A.ldlt().solve(bv));
  double p0, p1, p2;
  spec.phi.derivs(s, p0, p1, p2);
  v.positivity_functional =
      p0 > 0.0 && (p0 - s * p1 + (b2 - s * s) * p2) > 0.0;
  if (!v.positivity_functional) return v;

  try {
    Mat g = fundamental_tensor_at(spec, sample.x, sample.y);
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    v.g_positive_definite = es.eigenvalues().minCoeff() > 0.0;
  } catch (const SingularEvaluation&) {
    v.g_positive_definite = false;
  }
  return v;
}

TangentSample make_sample(const FinslerMetricSpec& spec, std::vector<double> x,
                          std::vector<double> y) {
  TangentSample s;
  s.x = std::move(x);
  s.y = std::move(y);
  double alpha;
  alpha_beta_s(spec, s.x, s.y, alpha, s.s);
  s.admissible = admissibility_check(spec, s).admissible();
  return s;
}

std::vector<std::vector<double>> unit_directions(int n, int count,
                                                 uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  auto push = [&](std::vector<double> d) {
    double norm = 0.0;
    for (double v : d) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : d) v /= norm;
    dirs.push_back(std::move(d));
  };
  // fixed symmetric pattern: +-e_i, then (e_i +- e_j)/sqrt(2)
  for (int i = 0; i < n && static_cast<int>(dirs.size()) < count; ++i)
    for (double sgn : {1.0, -1.0}) {
      if (static_cast<int>(dirs.size()) >= count) break;
      std::vector<double> d(n, 0.0);
      d[i] = sgn;
      push(std::move(d));
    }
  for (int i = 0; i < n && static_cast<int>(dirs.size()) < count; ++i)
    for (int j = i + 1; j < n && static_cast<int>(dirs.size()) < count; ++j)
      for (double sgn : {1.0, -1.0}) {
        if (static_cast<int>(dirs.size()) >= count) break;
        std::vector<double> d(n, 0.0);
        d[i] = 1.0;
        d[j] = sgn;
        push(std::move(d));
      }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(dirs.size()) < count) {
    std::vector<double> d(n);
    double norm = 0.0;
    for (double& v : d) {
      v = gauss(rng);
      norm += v * v;
    }
    if (norm < 1e-12) continue;
    push(std::move(d));
  }
  return dirs;
}

std::vector<TangentSample> sample_lattice(const FinslerMetricSpec& spec,
                                          int ydirs_per_point, uint64_t seed) {
  const int n = spec.dim();
  if (ydirs_per_point < n + 1)
    throw SpecError("sample_lattice: ydirs_per_point must be >= n+1");
  auto dirs = unit_directions(n, ydirs_per_point, seed);
  std::vector<TangentSample> out;
  for (const auto& x : spec.chart.grid_points()) {
    size_t before = out.size();
    for (const auto& d : dirs) {
      TangentSample s = make_sample(spec, x, d);
      if (s.admissible) out.push_back(std::move(s));
    }
    if (out.size() == before)
      throw EmptyFiber("sample_lattice: base point has no admissible direction");
  }
  return out;
}

FinslerMetricSpec make_fixture(const std::string& name, int n, double r) {
  FinslerMetricSpec spec;
  spec.name = name;
  spec.chart.dim = n;
  spec.chart.box.assign(n, {-1.0, 1.0});
  spec.chart.grid.assign(n, 2);
  if (name == "FIX-EUC") {
    spec.alpha.kind = RiemannianField::Kind::Euclidean;
    spec.beta.kind = OneFormField::Kind::Zero;
    spec.phi.kind = PhiProfile::Kind::Riemannian;
    spec.phi.b0 = 1.0;
    spec.phi.s_min = -1.0;
    spec.phi.s_max = 1.0;
  } else if (name == "FIX-MINK-RANDERS") {
    spec.alpha.kind = RiemannianField::Kind::Euclidean;
    spec.beta.kind = OneFormField::Kind::Constant;
    spec.beta.b_const.assign(n, 0.0);
    spec.beta.b_const[0] = 0.3;
    spec.phi.kind = PhiProfile::Kind::Randers;
    spec.phi.b0 = 1.0;
    spec.phi.s_min = -0.95;
    spec.phi.s_max = 0.95;
  } else if (name == "FIX-RANDERS-VAR") {
    spec.alpha.kind = RiemannianField::Kind::Euclidean;
    spec.beta.kind = OneFormField::Kind::Linear;
    spec.beta.eps = 0.1;
    spec.phi.kind = PhiProfile::Kind::Randers;
    spec.phi.b0 = 1.0;
    spec.phi.s_min = -0.95;
    spec.phi.s_max = 0.95;
  } else if (name == "FIX-SPHERE") {
    spec.chart.box.assign(n, {-0.8, 0.8});
    spec.alpha.kind = RiemannianField::Kind::StereographicSphere;
    spec.alpha.radius = r;
    spec.beta.kind = OneFormField::Kind::Zero;
    spec.phi.kind = PhiProfile::Kind::Riemannian;
    spec.phi.b0 = 1.0;
    spec.phi.s_min = -1.0;
    spec.phi.s_max = 1.0;
  } else if (name == "FIX-KROPINA") {
    spec.alpha.kind = RiemannianField::Kind::Euclidean;
    spec.beta.kind = OneFormField::Kind::Constant;
    spec.beta.b_const.assign(n, 0.0);
    spec.beta.b_const[0] = 0.5;
    spec.phi.kind = PhiProfile::Kind::Kropina;
    spec.phi.b0 = 1.0;
    spec.phi.s_min = 0.2;
    spec.phi.s_max = 0.49;
  } else {
    throw SpecError("unknown fixture: " + name);
  }
  return spec;
}

}  // namespace finsler
