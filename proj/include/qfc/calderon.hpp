#ifndef QFC_CALDERON_HPP
#define QFC_CALDERON_HPP

#include "qfc/states.hpp"

namespace qfc {

enum class CalderonBoundary { free_space, dirichlet, periodic };

// Calderon projector pair for the Wick-rotated operator K = -d_s^2 + eps^2.
// Single boundary component (2n x 2n) for free/Dirichlet, two components
// (4n x 4n) for the beta-periodic realization.  Trace convention: value and
// outward-normal derivative of the s > 0 side at every component.
struct CalderonPair {
  Matrix plus;
  Matrix minus;
  CalderonBoundary boundary;
  double parameter = 0.0;  // T for dirichlet, beta for periodic
  WeightVector weight;
  int components = 1;
};

// G_E(s) = (2 eps)^{-1} (e^{-s eps} theta(s) + e^{s eps} theta(-s))
WeightedOperator euclidean_green(const WeightedOperator& eps, double s);

// complex evaluation of the closed form; on the imaginary axis the branch is
// chosen by the sign of Im z, which realizes i^{-1} G_E(i t) = G_F(t)
WeightedOperator euclidean_green_complex(const WeightedOperator& eps, Complex z);

CalderonPair calderon_free(const WeightedOperator& eps);
CalderonPair calderon_dirichlet(const WeightedOperator& eps, double T);
CalderonPair calderon_periodic(const WeightedOperator& eps, double beta);

CovariancePair induced_state(const CalderonPair& pair);

// first-component block of the doubled beta-periodic state; equals the
// thermal pair of eps at the same beta
CovariancePair restrict_periodic_state(const CalderonPair& pair);

// secondary consistency route for the free case: assemble K on an s-lattice,
// invert, and apply the trace definition of the projector; O(ds) accurate
CalderonPair calderon_free_from_resolvent(const WeightedOperator& eps, double s_extent,
                                          int s_points);

} // namespace qfc

#endif
