#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

struct InadmissibleSample : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonPositiveValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyFiber : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Multivariate polynomial with total degree <= 4, used for custom fields.
struct Polynomial {
  struct Term {
    double coef;
    std::vector<int> exps;
  };
  std::vector<Term> terms;

  template <class T>
  T eval(std::span<const T> x) const {
    T acc = x[0] * 0.0;
    for (const auto& t : terms) {
      T m = x[0] * 0.0 + t.coef;
      for (size_t v = 0; v < t.exps.size(); ++v)
        for (int e = 0; e < t.exps[v]; ++e) m = m * x[v];
      acc += m;
    }
    return acc;
  }
};

struct ChartSpec {
  int dim = 3;
  std::vector<std::pair<double, double>> box;  // per-axis closed interval
  std::vector<int> grid;                       // per-axis sample counts

  void validate() const;
  std::vector<std::vector<double>> grid_points() const;
};

struct RiemannianField {
  enum class Kind { Euclidean, Conformal, StereographicSphere, CustomPolynomial };
  Kind kind = Kind::Euclidean;
  double radius = 1.0;              // StereographicSphere
  double scale = 1.0;               // uniform factor, for parametric families
  Polynomial conformal_factor;      // Conformal
  std::vector<Polynomial> entries;  // CustomPolynomial, row-major upper triangle

  /// a_ij(x), row-major n x n.
  template <class T>
  void eval(std::span<const T> x, std::vector<T>& a) const {
    const int n = static_cast<int>(x.size());
    a.assign(n * n, x[0] * 0.0);
    switch (kind) {
      case Kind::Euclidean:
        for (int i = 0; i < n; ++i) a[i * n + i] += 1.0;
        break;
      case Kind::Conformal: {
        T lam = conformal_factor.eval(x);
        for (int i = 0; i < n; ++i) a[i * n + i] = lam;
        break;
      }
      case Kind::StereographicSphere: {
        // 4 r^4 / (r^2 + |x|^2)^2
        double r2 = radius * radius;
        T q = x[0] * 0.0 + r2;
        for (int i = 0; i < n; ++i) q = q + x[i] * x[i];
        T lam = 4.0 * r2 * r2 / (q * q);
        for (int i = 0; i < n; ++i) a[i * n + i] = lam;
        break;
      }
      case Kind::CustomPolynomial: {
        int k = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            T v = entries[k++].eval(x);
            a[i * n + j] = v;
            a[j * n + i] = v;
          }
        break;
      }
    }
    if (scale != 1.0)
      for (auto& v : a) v = v * scale;
  }
};

struct OneFormField {
  enum class Kind { Zero, Constant, Linear, CustomPolynomial };
  Kind kind = Kind::Zero;
  std::vector<double> b_const;      // Constant
  double eps = 0.1;                 // Linear: b_i(x) = eps * x_i
  double scale = 1.0;               // uniform factor, for parametric families
  std::vector<Polynomial> entries;  // CustomPolynomial

  template <class T>
  void eval(std::span<const T> x, std::vector<T>& b) const {
    const int n = static_cast<int>(x.size());
    b.assign(n, x[0] * 0.0);
    switch (kind) {
      case Kind::Zero:
        break;
      case Kind::Constant:
        for (int i = 0; i < n; ++i) b[i] += b_const[i];
        break;
      case Kind::Linear:
        for (int i = 0; i < n; ++i) b[i] = x[i] * eps;
        break;
      case Kind::CustomPolynomial:
        for (int i = 0; i < n; ++i) b[i] = entries[i].eval(x);
        break;
    }
    if (scale != 1.0)
      for (auto& v : b) v = v * scale;
  }

  bool is_zero() const { return kind == Kind::Zero; }
};

struct PhiProfile {
  enum class Kind { Riemannian, Randers, Kropina, Matsumoto, Polynomial };
  Kind kind = Kind::Riemannian;
  double b0 = 1.0;
  double s_min = -1.0, s_max = 1.0;     // admissible sampling window
  std::vector<double> coeffs;           // Polynomial: phi(s) = sum c_k s^k

  template <class T>
  T eval(const T& s) const {
    switch (kind) {
      case Kind::Riemannian:
        return s * 0.0 + 1.0;
      case Kind::Randers:
        return s + 1.0;
      case Kind::Kropina:
        return 1.0 / s;
      case Kind::Matsumoto:
        return 1.0 / (1.0 - s);
      case Kind::Polynomial: {
        T acc = s * 0.0;
        for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
          acc = acc * s + coeffs[k];
        return acc;
      }
    }
    throw std::logic_error("phi: bad kind");
  }

  /// phi, phi', phi'' at s (closed forms per profile kind).
  void derivs(double s, double& p0, double& p1, double& p2) const;

  /// True when s is inside the profile's domain of definition (poles
  /// excluded), independent of the sampling window.
  bool in_domain(double s) const;
};

struct FinslerMetricSpec {
  ChartSpec chart;
  RiemannianField alpha;
  OneFormField beta;
  PhiProfile phi;
  std::string name;  // fixture tag when applicable

  int dim() const { return chart.dim; }
  void validate() const;
};

struct TangentSample {
  std::vector<double> x;
  std::vector<double> y;
  double s = 0.0;
  bool admissible = false;
};

struct AdmissibilityVerdict {
  bool s_in_range = false;
  bool alpha_positive = false;
  bool g_positive_definite = false;
  bool positivity_functional = false;
  bool admissible() const {
    return s_in_range && alpha_positive && g_positive_definite &&
           positivity_functional;
  }
};

/// F^2(x, y), templated so the same code path serves plain evaluation and
/// jet differentiation. Throws SingularEvaluation at profile poles.
template <class T>
T eval_F2(const FinslerMetricSpec& spec, std::span<const T> x,
          std::span<const T> y) {
  const int n = spec.dim();
  std::vector<T> a;
  spec.alpha.eval(x, a);
  T alpha2 = x[0] * 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) alpha2 += a[i * n + j] * y[i] * y[j];
  if (spec.phi.kind == PhiProfile::Kind::Riemannian) return alpha2;
  std::vector<T> b;
  spec.beta.eval(x, b);
  T beta = x[0] * 0.0;
  for (int i = 0; i < n; ++i) beta += b[i] * y[i];
  using std::sqrt;
  switch (spec.phi.kind) {
    case PhiProfile::Kind::Randers: {
      T al = sqrt(alpha2);
      T f = al + beta;
      return f * f;
    }
    case PhiProfile::Kind::Kropina:
      return alpha2 * alpha2 / (beta * beta);
    case PhiProfile::Kind::Matsumoto: {
      T al = sqrt(alpha2);
      T f = alpha2 / (al - beta);
      return f * f;
    }
    default: {
      T al = sqrt(alpha2);
      T s = beta / al;
      T f = al * spec.phi.eval(s);
      return f * f;
    }
  }
}

/// alpha(x,y) and s = beta/alpha at doubles.
void alpha_beta_s(const FinslerMetricSpec& spec, std::span<const double> x,
                  std::span<const double> y, double& alpha, double& s);

/// F = alpha * phi(s). Requires y != 0, alpha > 0 and s inside the profile
/// domain; throws NonPositiveValue when phi(s) <= 0.
double evaluate_F(const FinslerMetricSpec& spec, const TangentSample& sample);

AdmissibilityVerdict admissibility_check(const FinslerMetricSpec& spec,
                                         const TangentSample& sample);

TangentSample make_sample(const FinslerMetricSpec& spec,
                          std::vector<double> x, std::vector<double> y);

/// Deterministic direction set: axis and diagonal pattern first, then
/// seeded Gaussian fill, all unit vectors.
std::vector<std::vector<double>> unit_directions(int n, int count,
                                                 uint64_t seed);

/// Grid base points x admissible directions. Throws EmptyFiber when a base
/// point retains no admissible direction.
std::vector<TangentSample> sample_lattice(const FinslerMetricSpec& spec,
                                          int ydirs_per_point,
                                          uint64_t seed = 12345);

/// Built-in fixtures: FIX-EUC, FIX-MINK-RANDERS, FIX-RANDERS-VAR,
/// FIX-SPHERE, FIX-KROPINA.
FinslerMetricSpec make_fixture(const std::string& name, int n, double r = 1.0);

}  // namespace finsler
