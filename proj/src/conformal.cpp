#include "qfc/conformal.hpp"

#include <cmath>

namespace qfc {

namespace {

RealVector factor_on_grid(const ConformalFactor& factor, const Grid& grid, double t) {
  RealVector c(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    c[j] = factor.c(t, grid.coordinates[j]);
    if (c[j] <= 0.0) throw std::invalid_argument("conformal factor must be positive");
  }
  return c;
}

} // namespace

KernelFamily transform_spacetime_covariance(const KernelFamily& kernel,
                                            const ConformalFactor& factor, const Grid& grid,
                                            double t_of_right_argument) {
  RealVector c = factor_on_grid(factor, grid, t_of_right_argument);
  Vector scale = c.array().pow(-2.0).cast<Complex>();
  auto base = kernel.evaluate;
  KernelFamily out;
  out.kind = kernel.kind;
  out.evaluate = [base, scale](double t) -> Matrix { return base(t) * scale.asDiagonal(); };
  return out;
}

TransformedPair transform_cauchy_covariances(const CovariancePair& cov,
                                             const ConformalFactor& factor, const Grid& grid) {
  const int n = cov.n();
  RealVector c = factor_on_grid(factor, grid, cov.charge.weight.time);

  TransformedPair out;
  out.new_weight.time = cov.charge.weight.time;
  out.new_weight.values = cov.charge.weight.values.cwiseProduct(c);  // sqrt(c^2 h) = c sqrt(h)

  out.u = Matrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    out.u(j, j) = 1.0;
    out.u(n + j, n + j) = 1.0 / c[j];
  }
  Matrix u_inv = Matrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    u_inv(j, j) = 1.0;
    u_inv(n + j, n + j) = c[j];
  }

  // form pullback through U^{-1} re-expressed w.r.t. the new weight:
  // lambda~(f,g) = lambda(U^{-1} f, U^{-1} g)
  RealVector wd_old = cov.doubled_weight();
  RealVector wd_new = doubled(out.new_weight.values);
  Matrix pre = wd_new.cast<Complex>().cwiseInverse().asDiagonal() *
               (u_inv.adjoint() * wd_old.cast<Complex>().asDiagonal());
  out.pair.plus = pre * cov.plus * u_inv;
  out.pair.minus = pre * cov.minus * u_inv;
  out.pair.charge = ChargeForm{out.new_weight};
  out.pair.provenance = cov.provenance + " (conformal)";
  return out;
}

double conformal_diagram_defect(const CovariancePair& cov, const ConformalFactor& factor,
                                const Grid& grid) {
  const int n = cov.n();
  TransformedPair tp = transform_cauchy_covariances(cov, factor, grid);
  RealVector wd_old = cov.doubled_weight();
  RealVector wd_new = doubled(tp.new_weight.values);
  Matrix q = charge_matrix(n);
  // U^* q~ U as a form on the original data
  Matrix pulled = wd_old.cast<Complex>().cwiseInverse().asDiagonal() *
                  (tp.u.adjoint() * wd_new.cast<Complex>().asDiagonal()) * q * tp.u;
  return weighted_norm(pulled - q, wd_old);
}

} // namespace qfc
