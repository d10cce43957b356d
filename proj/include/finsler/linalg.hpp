#pragma once

#include <Eigen/Dense>
#include <vector>

namespace finsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense rank-3 tensor, row-major over (i, j, k).
struct Tensor3 {
  int n = 0;
  std::vector<double> v;

  Tensor3() = default;
  explicit Tensor3(int dim) : n(dim), v(dim * dim * dim, 0.0) {}
  double& operator()(int i, int j, int k) { return v[(i * n + j) * n + k]; }
  double operator()(int i, int j, int k) const {
    return v[(i * n + j) * n + k];
  }
  double frobenius() const {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  Tensor3& axpy(double a, const Tensor3& o) {
    for (size_t i = 0; i < v.size(); ++i) v[i] += a * o.v[i];
    return *this;
  }
};

inline double contract3(const Tensor3& t, const Vec& a, const Vec& b,
                        const Vec& c) {
  double s = 0.0;
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j)
      for (int k = 0; k < t.n; ++k) s += t(i, j, k) * a(i) * b(j) * c(k);
  return s;
}

}  // namespace finsler
