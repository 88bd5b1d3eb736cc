#ifndef QFC_OPERATORS_HPP
#define QFC_OPERATORS_HPP

#include "qfc/grid.hpp"
#include "qfc/linalg.hpp"

#include <functional>
#include <string>

namespace qfc {

// A linear map on mode space whose adjoint is taken w.r.t. the stored
// weighted inner product:  A^{*w} = W^{-1} A^H W.
struct WeightedOperator {
  Matrix mat;
  WeightVector weight;
  std::string label;

  int dim() const { return static_cast<int>(mat.rows()); }
};

struct SpectralDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // columns, orthonormal in the weighted inner product
};

// a(t) = -|h|^{-1/2} d/dx |h|^{1/2} h^{-1} d/dx + V, assembled in the
// symmetric factored form W^{-1} D^T C D + V with the exact Fourier
// derivative D, so self-adjointness w.r.t. the weight holds at machine
// precision and positivity is inherited from V >= m^2.
WeightedOperator build_spatial_operator(const MetricProfile& profile, const Grid& grid, double t);

// Deterministic eigendecomposition: ascending eigenvalues, first
// significant component of each eigenvector rotated real positive.
SpectralDecomposition spectral_decomposition(const WeightedOperator& A);

WeightedOperator func_calculus(const WeightedOperator& A, const std::function<double(double)>& f,
                               const std::string& label = "");
WeightedOperator func_calculus_complex(const WeightedOperator& A,
                                       const std::function<Complex(double)>& f,
                                       const std::string& label = "");

WeightedOperator weighted_adjoint(const WeightedOperator& A);

double self_adjointness_defect(const WeightedOperator& A);
double min_eigenvalue(const WeightedOperator& A);

} // namespace qfc

#endif
