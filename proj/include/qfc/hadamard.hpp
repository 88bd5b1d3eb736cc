#ifndef QFC_HADAMARD_HPP
#define QFC_HADAMARD_HPP

#include "qfc/evolution.hpp"

namespace qfc {

// Time-dependent operator data feeding the Riccati solver.  A Scenario
// provides one; tests can supply hand-built families (for example a single
// mode with known closed form).
struct OperatorFamily {
  std::vector<double> t_grid;
  std::vector<Matrix> a;        // spatial operator at each grid time
  std::vector<Matrix> r;        // damping operator (diagonal for metric profiles)
  std::vector<RealVector> w;    // weight at each grid time
};

OperatorFamily operator_family(const Scenario& scenario, const std::vector<double>& t_grid);

struct RiccatiSolution {
  std::vector<double> t_grid;
  std::vector<Matrix> b;               // best iterate, sampled on t_grid
  std::vector<RealVector> w;
  std::vector<double> residual_history;
  double final_residual = 0.0;
  double positivity_margin = 0.0;      // smallest eigenvalue of (b + b^{*w}) eps^{-1} at mid-grid

  int index_of(double t) const;
};

// Fixed-point iteration for i d/dt b - b^2 + a + i r b = 0 with b = eps + d.
// Each sweep solves eps d + d eps = i d/dt(eps + d) + i r (eps + d) - d^2 in
// the eps eigenbasis, which is the stable matrix-level splitting of the
// symbolic iteration; the fixed point is the same.  Stops at k_max or when
// the residual stagnates (ratio > 0.9); keeps the best iterate.
RiccatiSolution riccati_iterate(const OperatorFamily& family, int k_max, double tol);
RiccatiSolution riccati_iterate(const Scenario& scenario, const std::vector<double>& t_grid,
                                int k_max, double tol);

// sup over sampled smooth test evolutions of |P phi - (d_t + i b + r)(d_t - i b) phi|
double factorization_residual(const RiccatiSolution& sol, const OperatorFamily& family);

struct Splitting {
  Matrix T;
  Matrix T_inverse;
  ProjectionPair projections;
  double base_time = 0.0;
  Matrix b_plus;
  Matrix b_minus;
};

Splitting microlocal_splitting(const RiccatiSolution& sol, double base_time);

// lambda^{+-} = +- q c^{+-}
CovariancePair hadamard_covariances(const Splitting& split);

struct CauchyData {
  Vector value;
  Vector momentum;  // i^{-1} d_t phi
};

// parametrix for the Cauchy problem: U~(t) f = U^+(t) u^+ f + U^-(t) u^- f
CauchyData cauchy_parametrix(const RiccatiSolution& sol, const CauchyData& f, double t);

// G_F(t,s) from the splitting and the exact evolution (theta(0) resolved to
// the + branch so the static case reproduces the closed-form kernel)
Matrix feynman_from_splitting(const Scenario& scenario, const Splitting& split, double t, double s);

// mode-by-mode difference between a doubled-space operator and a reference,
// compressed onto Fourier modes |k| in [k_lo, k_hi]; returns per-k norms
RealVector mode_compression(const Matrix& difference, const RealVector& weight, const Grid& grid,
                            int k_lo, int k_hi);

// fitted decay exponent p of the c^{+-}-vs-frequency-splitting difference
// over the given mode band (the finite-resolution Hadamard proxy)
double mode_decay_exponent(const Splitting& split, const WeightedOperator& eps, const Grid& grid,
                           int k_lo, int k_hi);

} // namespace qfc

#endif
