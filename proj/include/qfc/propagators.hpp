#ifndef QFC_PROPAGATORS_HPP
#define QFC_PROPAGATORS_HPP

#include "qfc/operators.hpp"

#include <utility>
#include <vector>

namespace qfc {

enum class KernelKind {
  retarded,
  advanced,
  causal,
  feynman,
  euclidean,
  two_point_plus,
  two_point_minus
};

// Operator-valued kernel family t -> K(t) on position data; lazily evaluated.
struct KernelFamily {
  std::function<Matrix(double)> evaluate;
  KernelKind kind;
};

// theta(0) = 1 throughout (the indicator of [0, inf)).
std::pair<WeightedOperator, WeightedOperator> retarded_advanced(const WeightedOperator& eps, double t);
WeightedOperator causal(const WeightedOperator& eps, double t);
// G_F(t) = (2 i eps)^{-1} (e^{i t eps} theta(t) + e^{-i t eps} theta(-t)),
// normalized to (2 i eps)^{-1} at t = 0.
WeightedOperator feynman(const WeightedOperator& eps, double t);
// Lambda^{+-}(t) = (2 eps)^{-1} e^{+- i t eps}
WeightedOperator two_point_static(const WeightedOperator& eps, double t, int sign);

KernelFamily kernel_family(const WeightedOperator& eps, KernelKind kind);

// max over samples of the relative defect of
// G_F = i^{-1} Lambda^+ + G_adv = i^{-1} Lambda^- + G_ret
double verify_feynman_identity(const WeightedOperator& eps, const std::vector<double>& t_samples);

struct PdeResidual {
  double off_origin = 0.0;   // sup norm of (d_t^2 + eps^2) K away from t = 0
  double delta_weight = 0.0; // measured weight of the distributional delta at t = 0
};

// central second difference in t plus eps^2 applied to the sampled kernel,
// compared against the discrete delta at the node containing zero
PdeResidual discrete_pde_residual(const WeightedOperator& eps, const KernelFamily& kernel,
                                  const std::vector<double>& t_grid);

} // namespace qfc

#endif
