#ifndef QFC_CONFORMAL_HPP
#define QFC_CONFORMAL_HPP

#include "qfc/propagators.hpp"
#include "qfc/states.hpp"

namespace qfc {

// Conformal factor c(t,x) > 0 in spacetime dimension 2; the Cauchy-surface
// machinery uses its restriction to t = 0.
struct ConformalFactor {
  std::function<double(double, double)> c;
  static constexpr int dimension = 2;
};

// kernel rule in dimension 2: multiply by c^{-2} on the right argument
KernelFamily transform_spacetime_covariance(const KernelFamily& kernel,
                                            const ConformalFactor& factor, const Grid& grid,
                                            double t_of_right_argument = 0.0);

struct TransformedPair {
  CovariancePair pair;      // w.r.t. the transformed charge form / weight
  WeightVector new_weight;  // surface weight of the rescaled metric
  Matrix u;                 // U = diag(1, c^{-1}) on doubled data
};

TransformedPair transform_cauchy_covariances(const CovariancePair& cov,
                                             const ConformalFactor& factor, const Grid& grid);

// || U^* q~ U - q || with q~ built from the transformed weight; exact zero in
// exact arithmetic
double conformal_diagram_defect(const CovariancePair& cov, const ConformalFactor& factor,
                                const Grid& grid);

} // namespace qfc

#endif
