#pragma once

#include "finsler/jets_api.hpp"
#include "finsler/linalg.hpp"
#include "finsler/metric.hpp"

namespace finsler {

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RiemannianDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FitIllPosed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The pointwise tensor record at one tangent sample.
struct TensorBundle {
  double F = 0.0;   // F(x, y)
  double F2 = 0.0;  // F^2
  Mat g;            // fundamental tensor, 1/2 [F^2]_{y i y j}
  Mat g_inv;
  Tensor3 C;        // Cartan torsion, 1/4 [F^2]_{y i y j y k}
  Vec I;            // mean Cartan torsion, g^{jk} C_ijk
  Vec y_low;        // y_i = g_ij y^j
  Vec ell;          // y_low / F
  Mat h;            // angular metric, g - ell ell^T
  double I_normsq = 0.0;  // g^{ij} I_i I_j
  Vec I_up;               // I^i

  int dim() const { return static_cast<int>(g.rows()); }
};

struct SemiCFit {
  double p = 1.0;
  double q = 0.0;
  double decomposition_residual = 0.0;
};

/// All section-2 tensors at a sample. Throws NotPositiveDefinite when g_y
/// fails the eigenvalue gate.
TensorBundle compute_bundle(const FinslerMetricSpec& spec,
                            const TangentSample& sample);

/// max over samples of ||I||; zero within tolerance exactly for Riemannian
/// profiles.
double deicke_indicator(const FinslerMetricSpec& spec,
                        std::span<const TangentSample> samples);

inline constexpr double kEpsI = 1e-8;  // Riemannian-degeneracy gate on ||I||^2

/// The symmetrized angular block h_ij I_k + h_jk I_i + h_ki I_j.
Tensor3 angular_block(const Mat& h, const Vec& I);

/// q from the I^3 contraction kappa = C_ijk I^i I^j I^k / ||I||^4 via
/// kappa = (3p + (1+n)q)/(1+n), p = 1 - q.
SemiCFit semi_c_fit(const TensorBundle& b, int n);

/// Least-squares q over the one-parameter family p = 1 - q; independent of
/// the contraction route.
SemiCFit semi_c_fit_least_squares(const TensorBundle& b, int n);

/// Cartan tensor of the semi-C form for given (p, q) over (h, I) data.
Tensor3 semi_c_tensor(const Mat& h, const Vec& I, const Vec& I_up,
                      double I_normsq, double p, double q, int n);

}  // namespace finsler
