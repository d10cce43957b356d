#include "finsler/jet.hpp"

#include <algorithm>
#include <mutex>

namespace finsler {

namespace {

void enumerate(int nvars, int order, std::vector<uint8_t>& cur, int var,
               int remaining, std::vector<std::vector<uint8_t>>& out) {
  if (var == nvars) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[var] = static_cast<uint8_t>(e);
    enumerate(nvars, order, cur, var + 1, remaining - e, out);
  }
  cur[var] = 0;
}

}  // namespace

uint64_t JetSpace::pack(std::span<const uint8_t> mu) {
  uint64_t key = 0;
  for (uint8_t e : mu) key = (key << 4) | e;
  return key;
}

JetSpace::JetSpace(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars < 1 || nvars > 16 || order < 0 || order > 15)
    throw std::invalid_argument("JetSpace: unsupported nvars/order");
  std::vector<uint8_t> cur(nvars, 0);
  enumerate(nvars, order, cur, 0, order, exps_);
  // graded order, constant term first
  std::stable_sort(exps_.begin(), exps_.end(),
                   [](const auto& a, const auto& b) {
                     int da = 0, db = 0;
                     for (auto e : a) da += e;
                     for (auto e : b) db += e;
                     return da < db;
                   });
  degree_.resize(exps_.size());
  for (size_t i = 0; i < exps_.size(); ++i) {
    int d = 0;
    for (auto e : exps_[i]) d += e;
    degree_[i] = d;
    pos_[pack(exps_[i])] = static_cast<int>(i);
  }
  // multiplication table over pairs whose degree sum stays within order
  std::vector<uint8_t> sum(nvars);
  for (size_t i = 0; i < exps_.size(); ++i) {
    for (size_t j = 0; j < exps_.size(); ++j) {
      if (degree_[i] + degree_[j] > order_) continue;
      for (int v = 0; v < nvars; ++v)
        sum[v] = static_cast<uint8_t>(exps_[i][v] + exps_[j][v]);
      int k = pos_.at(pack(sum));
      prod_.push_back({static_cast<uint16_t>(i), static_cast<uint16_t>(j),
                       static_cast<uint16_t>(k)});
    }
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int order) {
  static std::mutex mu;
  static std::unordered_map<int, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  int key = nvars * 64 + order;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto sp = std::make_shared<const JetSpace>(nvars, order);
  cache[key] = sp;
  return sp;
}

int JetSpace::position(std::span<const int> mu) const {
  if (static_cast<int>(mu.size()) != nvars_)
    throw std::invalid_argument("JetSpace::position: wrong arity");
  int d = 0;
  std::vector<uint8_t> m(nvars_);
  for (int v = 0; v < nvars_; ++v) {
    d += mu[v];
    m[v] = static_cast<uint8_t>(mu[v]);
  }
  if (d > order_) return -1;
  return pos_.at(pack(m));
}

double JetSpace::factorial(std::span<const uint8_t> mu) {
  double f = 1.0;
  for (uint8_t e : mu)
    for (int k = 2; k <= e; ++k) f *= k;
  return f;
}

Jet& Jet::operator+=(const Jet& o) {
  for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& x : c) x *= s;
  return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.space);
  for (const auto& p : a.space->products())
    r.c[p.c] += a.c[p.a] * b.c[p.b];
  return r;
}

Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }

Jet operator-(double s, Jet a) {
  for (double& x : a.c) x = -x;
  a.c[0] += s;
  return a;
}

Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }

Jet operator-(Jet a) {
  for (double& x : a.c) x = -x;
  return a;
}

Jet analytic(const Jet& a, std::span<const double> derivs) {
  const int order = a.space->order();
  Jet h = a;
  h.c[0] = 0.0;  // nilpotent part
  Jet r(a.space, derivs[0]);
  Jet hk(a.space, 1.0);
  double kfac = 1.0;
  for (int k = 1; k <= order && k < static_cast<int>(derivs.size()); ++k) {
    hk = hk * h;
    kfac *= k;
    Jet term = hk;
    term *= derivs[k] / kfac;
    r += term;
  }
  return r;
}

Jet reciprocal(const Jet& a) {
  double a0 = a.value();
  if (std::abs(a0) < 1e-300)
    throw SingularEvaluation("jet: reciprocal of zero");
  std::vector<double> d(a.space->order() + 1);
  double v = 1.0 / a0;
  double kfac = 1.0;
  for (int k = 0; k <= a.space->order(); ++k) {
    d[k] = kfac * v;  // d^k (1/u) = (-1)^k k! / u^{k+1}
    kfac *= -(k + 1);
    v /= a0;
  }
  return analytic(a, d);
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet operator/(Jet a, double s) { return a *= 1.0 / s; }

Jet operator/(double s, const Jet& b) {
  Jet r = reciprocal(b);
  return r *= s;
}

Jet sqrt(const Jet& a) {
  double a0 = a.value();
  if (a0 <= 0.0) throw SingularEvaluation("jet: sqrt of non-positive value");
  std::vector<double> d(a.space->order() + 1);
  d[0] = std::sqrt(a0);
  // d^k u^{1/2} = (1/2)(1/2-1)...(1/2-k+1) u^{1/2-k}
  double prod = 1.0;
  for (int k = 1; k <= a.space->order(); ++k) {
    prod *= (0.5 - (k - 1));
    d[k] = prod * std::pow(a0, 0.5 - k);
  }
  return analytic(a, d);
}

Jet pow(const Jet& a, double p) {
  double a0 = a.value();
  if (a0 <= 0.0) throw SingularEvaluation("jet: pow of non-positive base");
  std::vector<double> d(a.space->order() + 1);
  double prod = 1.0;
  for (int k = 0; k <= a.space->order(); ++k) {
    d[k] = prod * std::pow(a0, p - k);
    prod *= (p - k);
  }
  return analytic(a, d);
}

Jet log(const Jet& a) {
  double a0 = a.value();
  if (a0 <= 0.0) throw SingularEvaluation("jet: log of non-positive value");
  std::vector<double> d(a.space->order() + 1);
  d[0] = std::log(a0);
  double v = 1.0 / a0;
  double kfac = 1.0;
  for (int k = 1; k <= a.space->order(); ++k) {
    d[k] = kfac * v;
    kfac *= -k;
    v /= a0;
  }
  return analytic(a, d);
}

Jet exp(const Jet& a) {
  std::vector<double> d(a.space->order() + 1, std::exp(a.value()));
  return analytic(a, d);
}

Jet derivative_jet(const Jet& a, std::span<const int> nu) {
  const auto& sp = *a.space;
  int dn = 0;
  for (int e : nu) dn += e;
  auto tgt = JetSpace::get(sp.nvars(), sp.order() - dn);
  Jet r(tgt);
  std::vector<int> mu(sp.nvars());
  for (int p = 0; p < tgt->size(); ++p) {
    const auto& me = tgt->exponents(p);
    for (int v = 0; v < sp.nvars(); ++v) mu[v] = me[v] + nu[v];
    int src = sp.position(mu);
    // Taylor coeff of d^nu f at mu is c_{mu+nu} * (mu+nu)! / mu!
    double fac = 1.0;
    for (int v = 0; v < sp.nvars(); ++v) {
      for (int k = me[v] + 1; k <= mu[v]; ++k) fac *= k;
    }
    r.c[p] = a.c[src] * fac;
  }
  return r;
}

}  // namespace finsler
