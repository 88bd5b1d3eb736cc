#ifndef QFC_STATES_HPP
#define QFC_STATES_HPP

#include "qfc/operators.hpp"

#include <vector>

namespace qfc {

// Hermitian charge form ((f|q g)) = (f1|g0)_w + (f0|g1)_w on doubled
// Cauchy data, stored through its weight; the coordinate matrix is the
// block swap.
struct ChargeForm {
  WeightVector weight;
  Matrix matrix() const { return charge_matrix(weight.size()); }
};

// Pair of Hermitian forms (lambda+, lambda-) on doubled Cauchy data with
// lambda+ - lambda- = q and both numerically PSD.
struct CovariancePair {
  Matrix plus;
  Matrix minus;
  ChargeForm charge;
  std::string provenance;

  int n() const { return charge.weight.size(); }
  const RealVector doubled_weight() const { return doubled(charge.weight.values); }
};

struct ProjectionPair {
  Matrix plus;
  Matrix minus;
  WeightVector weight;
};

struct StateReport {
  double hermiticity_defect = 0.0;
  double psd_defect_plus = 0.0;
  double psd_defect_minus = 0.0;
  double ccr_defect = 0.0;
  bool valid = false;
};

CovariancePair vacuum_covariances(const WeightedOperator& eps);
ProjectionPair vacuum_projections(const WeightedOperator& eps);
CovariancePair thermal_covariances(const WeightedOperator& eps, double beta);

StateReport validate_state(const CovariancePair& cov, double tol = 1e-9);

// || q M^{-1} q - M || / ||M|| for M = lambda+ + lambda-; zero iff pure.
double purity_defect(const CovariancePair& cov);

// Gauge-invariant n-point function: 0 when list lengths differ, otherwise
// the permanent of the pairing matrix read from lambda-.
Complex npoint_function(const CovariancePair& cov, const std::vector<Vector>& starred,
                        const std::vector<Vector>& unstarred);

// Static spacetime with lapse N, zero shift: reduced operator N h0 N, its
// ground and KMS covariance pairs pulled back through Z = diag(N, 1), and
// the conserved energy form as a PSD certificate.
struct StaticReduction {
  WeightedOperator reduced_operator;   // N h0 N, self-adjoint w.r.t. the N sqrt(h) weight
  CovariancePair ground;               // w.r.t. the sqrt(h) weight
  Matrix energy_form;                  // form matrix w.r.t. the sqrt(h) weight
  WeightVector weight;                 // sqrt(h) weight on the undoubled space
  std::function<CovariancePair(double)> kms;
};

StaticReduction static_reduction(const MetricProfile& profile, const Grid& grid);

} // namespace qfc

#endif
