#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace finsler {

struct SingularEvaluation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shared tables for truncated multivariate Taylor arithmetic at a fixed
/// number of variables and truncation order. Instances are cached; Jet
/// values reference their space through a shared_ptr.
class JetSpace {
 public:
  static std::shared_ptr<const JetSpace> get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exps_.size()); }

  /// Position of a multi-index, or -1 if its degree exceeds the order.
  int position(std::span<const int> mu) const;
  const std::vector<uint8_t>& exponents(int pos) const { return exps_[pos]; }
  int degree(int pos) const { return degree_[pos]; }

  struct Prod {
    uint16_t a, b, c;
  };
  const std::vector<Prod>& products() const { return prod_; }

  /// (mu+nu)!/mu! style factor used when extracting true derivatives from
  /// Taylor coefficients.
  static double factorial(std::span<const uint8_t> mu);

  JetSpace(int nvars, int order);  // use get(); public for make_shared

 private:
  int nvars_;
  int order_;
  std::vector<std::vector<uint8_t>> exps_;
  std::vector<int> degree_;
  std::unordered_map<uint64_t, int> pos_;
  std::vector<Prod> prod_;

  static uint64_t pack(std::span<const uint8_t> mu);
};

/// Truncated Taylor value. Coefficients are Taylor coefficients
/// (derivative / mu!), indexed by the space's multi-index table.
struct Jet {
  std::shared_ptr<const JetSpace> space;
  std::vector<double> c;

  Jet() = default;
  explicit Jet(std::shared_ptr<const JetSpace> sp, double value = 0.0)
      : space(std::move(sp)), c(space->size(), 0.0) {
    c[0] = value;
  }

  static Jet variable(std::shared_ptr<const JetSpace> sp, int var,
                      double value) {
    Jet j(std::move(sp), value);
    std::vector<int> mu(j.space->nvars(), 0);
    mu[var] = 1;
    int p = j.space->position(mu);
    if (p >= 0) j.c[p] = 1.0;
    return j;
  }

  double value() const { return c[0]; }

  /// True partial derivative for the given multi-index.
  double deriv(std::span<const int> mu) const {
    int p = space->position(mu);
    if (p < 0) throw std::out_of_range("jet: derivative beyond order");
    return c[p] * JetSpace::factorial(space->exponents(p));
  }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s) {
    c[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c[0] -= s;
    return *this;
  }
  Jet& operator*=(double s);
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, Jet a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator-(Jet a);
Jet operator/(const Jet& a, const Jet& b);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& b);

/// f(a) for analytic f given by its derivatives at a.value().
/// derivs[k] = f^(k)(a0), k = 0..order.
Jet analytic(const Jet& a, std::span<const double> derivs);

Jet sqrt(const Jet& a);
Jet reciprocal(const Jet& a);
Jet log(const Jet& a);
Jet exp(const Jet& a);
Jet pow(const Jet& a, double p);

/// Jet of the partial derivative d^nu f, truncated to order - |nu|.
/// The result lives in a (same nvars, order - |nu|) space.
Jet derivative_jet(const Jet& a, std::span<const int> nu);

}  // namespace finsler
