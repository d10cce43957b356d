#pragma once

#include "finsler/fd.hpp"
#include "finsler/linalg.hpp"
#include "finsler/metric.hpp"

namespace finsler {

enum class JetMode { Taylor, FiniteDifference };

struct JetConfig {
  int vertical_order = 2;
  int horizontal_order = 1;
  JetMode mode = JetMode::Taylor;
  FDConfig fd;
};

/// A scalar field on TM. Taylor differentiation is available when the
/// field can be evaluated on jets.
struct ScalarFieldTM {
  virtual ~ScalarFieldTM() = default;
  virtual double eval(std::span<const double> x,
                      std::span<const double> y) const = 0;
  virtual Jet eval_jet(std::span<const Jet> x, std::span<const Jet> y) const {
    throw std::runtime_error("scalar field: taylor mode not supported");
  }
  virtual bool has_jet() const { return false; }
};

struct F2Field : ScalarFieldTM {
  const FinslerMetricSpec* spec;
  explicit F2Field(const FinslerMetricSpec& s) : spec(&s) {}
  double eval(std::span<const double> x,
              std::span<const double> y) const override {
    std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
    return eval_F2<double>(*spec, xv, yv);
  }
  Jet eval_jet(std::span<const Jet> x, std::span<const Jet> y) const override {
    return eval_F2<Jet>(*spec, x, y);
  }
  bool has_jet() const override { return true; }
};

struct VerticalDerivs {
  double value = 0.0;
  Vec grad;      // order >= 1
  Mat hess;      // order >= 2
  Tensor3 third;  // order == 3
};

struct HorizontalDerivs {
  double value = 0.0;
  Vec grad;  // order >= 1
  Mat hess;  // order == 2
};

/// Derivative tensors of f in y at a fixed sample, to the given order.
VerticalDerivs vertical_jet(const ScalarFieldTM& f, const TangentSample& sample,
                            int order, const JetConfig& cfg = {});

/// Derivative tensors of f in x at fixed y.
HorizontalDerivs horizontal_jet(const ScalarFieldTM& f,
                                const TangentSample& sample, int order,
                                const JetConfig& cfg = {});

/// Independent finite-difference oracle for a mixed partial; multi_index
/// has 2n entries (x first, then y).
FDResult fd_oracle(const ScalarFieldTM& f, const TangentSample& sample,
                   std::span<const int> multi_index, const FDConfig& cfg = {});

}  // namespace finsler
