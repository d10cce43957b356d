#include "finsler/fd.hpp"

#include <cmath>

namespace finsler {

namespace {

struct Stencil1D {
  std::vector<int> offsets;
  std::vector<double> weights;  // to be divided by h^order
};

Stencil1D stencil_for(int order) {
  switch (order) {
    case 0:
      return {{0}, {1.0}};
    case 1:
      return {{-1, 1}, {-0.5, 0.5}};
    case 2:
      return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
    case 3:
      return {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}};
    case 4:
      return {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}};
    default:
      throw std::invalid_argument("fd: per-variable order must be <= 4");
  }
}

double eval_at_h(const std::function<double(std::span<const double>)>& f,
                 std::span<const double> point, std::span<const int> mu,
                 double h) {
  const int n = static_cast<int>(point.size());
  std::vector<int> active;
  std::vector<Stencil1D> stencils;
  int total = 0;
  for (int v = 0; v < n; ++v) {
    if (mu[v] > 0) {
      active.push_back(v);
      stencils.push_back(stencil_for(mu[v]));
      total += mu[v];
    }
  }
  if (total == 0) return f(point);
  if (total > 4) throw std::invalid_argument("fd: |mu| must be <= 4");

  std::vector<double> p(point.begin(), point.end());
  double acc = 0.0;
  std::vector<size_t> idx(active.size(), 0);
  while (true) {
    double w = 1.0;
    for (size_t a = 0; a < active.size(); ++a) {
      p[active[a]] = point[active[a]] + stencils[a].offsets[idx[a]] * h;
      w *= stencils[a].weights[idx[a]];
    }
    acc += w * f(p);
    size_t a = 0;
    for (; a < active.size(); ++a) {
      if (++idx[a] < stencils[a].offsets.size()) break;
      idx[a] = 0;
    }
    if (a == active.size()) break;
  }
  return acc / std::pow(h, total);
}

}  // namespace

FDResult fd_derivative(const std::function<double(std::span<const double>)>& f,
                       std::span<const double> point, std::span<const int> mu,
                       double h, int richardson_levels) {
  if (!(h > 0.0)) throw StepUnderflow("fd: non-positive step");
  if (richardson_levels < 1) richardson_levels = 1;
  // Richardson triangle for an O(h^2) base scheme
  std::vector<double> row(richardson_levels);
  std::vector<double> prev;
  FDResult res;
  for (int l = 0; l < richardson_levels; ++l) {
    double hl = h / std::pow(2.0, l);
    row[0] = eval_at_h(f, point, mu, hl);
    double pow4 = 4.0;
    for (int k = 1; k <= l; ++k) {
      row[k] = row[k - 1] + (row[k - 1] - prev[k - 1]) / (pow4 - 1.0);
      pow4 *= 4.0;
    }
    if (l > 0) res.error_estimate = std::abs(row[l] - prev[l - 1]);
    prev.assign(row.begin(), row.begin() + l + 1);
  }
  res.value = prev.back();
  if (richardson_levels == 1)
    res.error_estimate = std::abs(res.value - eval_at_h(f, point, mu, 2.0 * h));
  return res;
}

}  // namespace finsler
