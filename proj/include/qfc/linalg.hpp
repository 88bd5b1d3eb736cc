#ifndef QFC_LINALG_HPP
#define QFC_LINALG_HPP

#include "qfc/grid.hpp"

#include <Eigen/Dense>

namespace qfc {

using Matrix = Eigen::MatrixXcd;

// Operators and sesquilinear forms on mode space are stored as coordinate
// matrices L; the pairing is always (f | L g)_w with the weighted inner
// product.  Norms, adjoints and positivity below refer to that pairing.

// ||W^{1/2} L W^{-1/2}||_2
double weighted_norm(const Matrix& L, const RealVector& w);

// W^{-1} L^H W
Matrix weighted_adjoint_matrix(const Matrix& L, const RealVector& w);

// ||L - L^{*w}|| / ||L||, zero for an exactly Hermitian form
double hermiticity_defect(const Matrix& L, const RealVector& w);

// most negative eigenvalue of the Hermitian part of W^{1/2} L W^{-1/2},
// normalized by the norm; zero when the form is PSD
double psd_defect(const Matrix& L, const RealVector& w);

// weight of the doubled Cauchy-data space (w, w)
RealVector doubled(const RealVector& w);

// block-swap charge matrix [[0, I], [I, 0]] on doubled space
Matrix charge_matrix(int n);

// change the weight a form matrix refers to, keeping the form itself fixed:
// f* W_old L g  ==  f* W_new L' g
Matrix rebase_form(const Matrix& L, const RealVector& w_old, const RealVector& w_new);

// Periodic Fourier (spectral) differentiation matrix on n equispaced nodes
// over a circle of the given circumference; exact on resolved trig modes.
Eigen::MatrixXd spectral_derivative(int n, double circumference);

// least-squares slope of log(y) against log(x); x, y positive
double loglog_slope(const RealVector& x, const RealVector& y);

} // namespace qfc

#endif
