#include "qfc/calderon.hpp"

#include <cmath>

namespace qfc {

namespace {

const Complex I_UNIT{0.0, 1.0};

Matrix block2(const Matrix& a00, const Matrix& a01, const Matrix& a10, const Matrix& a11) {
  const int n = static_cast<int>(a00.rows());
  Matrix out(2 * n, 2 * n);
  out.block(0, 0, n, n) = a00;
  out.block(0, n, n, n) = a01;
  out.block(n, 0, n, n) = a10;
  out.block(n, n, n, n) = a11;
  return out;
}

} // namespace

WeightedOperator euclidean_green(const WeightedOperator& eps, double s) {
  return func_calculus(eps, [s](double x) { return std::exp(-std::abs(s) * x) / (2.0 * x); }, "G_E");
}

WeightedOperator euclidean_green_complex(const WeightedOperator& eps, Complex z) {
  double branch;
  if (z.real() > 0.0) branch = -1.0;
  else if (z.real() < 0.0) branch = 1.0;
  else if (z.imag() > 0.0) branch = 1.0;
  else if (z.imag() < 0.0) branch = -1.0;
  else branch = -1.0;  // z = 0: both branches agree
  return func_calculus_complex(eps, [z, branch](double x) {
    return std::exp(branch * z * x) / (2.0 * x);
  }, "G_E(z)");
}

CalderonPair calderon_free(const WeightedOperator& eps) {
  ProjectionPair p = vacuum_projections(eps);
  CalderonPair out;
  out.plus = p.plus;
  out.minus = p.minus;
  out.boundary = CalderonBoundary::free_space;
  out.weight = eps.weight;
  out.components = 1;
  return out;
}

CalderonPair calderon_dirichlet(const WeightedOperator& eps, double T) {
  if (T <= 0.0) throw std::invalid_argument("calderon_dirichlet: T must be positive");
  double lo = min_eigenvalue(eps);
  if (lo <= 0.0)
    throw std::runtime_error("calderon_dirichlet: coth singular at eigenvalue " +
                             std::to_string(lo));
  const int n = eps.dim();
  Matrix I = Matrix::Identity(n, n);
  Matrix th_over = func_calculus(eps, [T](double x) {
    double th = std::tanh(T * x);
    if (th == 0.0) throw std::runtime_error("calderon_dirichlet: coth singular at eigenvalue " +
                                            std::to_string(x));
    return th / x;
  }).mat;
  Matrix coth_times = func_calculus(eps, [T](double x) { return x / std::tanh(T * x); }).mat;

  CalderonPair out;
  out.plus = 0.5 * block2(I, th_over, coth_times, I);
  out.minus = 0.5 * block2(I, -th_over, -coth_times, I);
  out.boundary = CalderonBoundary::dirichlet;
  out.parameter = T;
  out.weight = eps.weight;
  out.components = 1;
  return out;
}

CalderonPair calderon_periodic(const WeightedOperator& eps, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("calderon_periodic: beta must be positive");
  const int n = eps.dim();

  // n x n generators of the closed form
  Matrix coth_over = func_calculus(eps, [beta](double x) {
    return 1.0 / (x * std::tanh(0.5 * beta * x));
  }).mat;
  Matrix coth_times = func_calculus(eps, [beta](double x) {
    return x / std::tanh(0.5 * beta * x);
  }).mat;
  Matrix csch_over = func_calculus(eps, [beta](double x) {
    return 1.0 / (x * std::sinh(0.5 * beta * x));
  }).mat;
  Matrix csch_times = func_calculus(eps, [beta](double x) {
    return x / std::sinh(0.5 * beta * x);
  }).mat;

  // data-major layout on the doubled boundary: (values of both components,
  // then derivatives of both components); the component swap couples the
  // two copies of Sigma
  Matrix I2n = Matrix::Identity(2 * n, 2 * n);
  Matrix UR = Matrix::Zero(2 * n, 2 * n), LL = Matrix::Zero(2 * n, 2 * n);
  UR.block(0, 0, n, n) = coth_over;
  UR.block(n, n, n, n) = coth_over;
  UR.block(0, n, n, n) = csch_over;
  UR.block(n, 0, n, n) = csch_over;
  LL.block(0, 0, n, n) = coth_times;
  LL.block(n, n, n, n) = coth_times;
  LL.block(0, n, n, n) = -csch_times;
  LL.block(n, 0, n, n) = -csch_times;

  CalderonPair out;
  out.plus = Matrix::Zero(4 * n, 4 * n);
  out.plus.block(0, 0, 2 * n, 2 * n) = 0.5 * I2n;
  out.plus.block(2 * n, 2 * n, 2 * n, 2 * n) = 0.5 * I2n;
  out.plus.block(0, 2 * n, 2 * n, 2 * n) = 0.5 * UR;
  out.plus.block(2 * n, 0, 2 * n, 2 * n) = 0.5 * LL;
  out.minus = Matrix::Zero(4 * n, 4 * n);
  out.minus.block(0, 0, 2 * n, 2 * n) = 0.5 * I2n;
  out.minus.block(2 * n, 2 * n, 2 * n, 2 * n) = 0.5 * I2n;
  out.minus.block(0, 2 * n, 2 * n, 2 * n) = -0.5 * UR;
  out.minus.block(2 * n, 0, 2 * n, 2 * n) = -0.5 * LL;

  out.boundary = CalderonBoundary::periodic;
  out.parameter = beta;
  out.weight = eps.weight;
  out.components = 2;
  return out;
}

CovariancePair induced_state(const CalderonPair& pair) {
  const int n_eff = static_cast<int>(pair.plus.rows()) / 2;
  Matrix q = charge_matrix(n_eff);

  WeightVector w_eff;
  w_eff.time = pair.weight.time;
  if (pair.components == 1) {
    w_eff = pair.weight;
  } else {
    w_eff.values.resize(n_eff);
    w_eff.values << pair.weight.values, pair.weight.values;
  }

  CovariancePair cov;
  cov.plus = q * pair.plus;
  cov.minus = -q * pair.minus;
  cov.charge = ChargeForm{w_eff};
  switch (pair.boundary) {
    case CalderonBoundary::free_space: cov.provenance = "calderon-free"; break;
    case CalderonBoundary::dirichlet: cov.provenance = "calderon-dirichlet"; break;
    case CalderonBoundary::periodic: cov.provenance = "calderon-periodic"; break;
  }
  return cov;
}

CovariancePair restrict_periodic_state(const CalderonPair& pair) {
  if (pair.boundary != CalderonBoundary::periodic)
    throw std::invalid_argument("restrict_periodic_state: pair is not beta-periodic");
  CovariancePair doubled_state = induced_state(pair);
  const int n = pair.weight.size();

  auto restrict_block = [n](const Matrix& L) {
    Matrix out(2 * n, 2 * n);
    out.block(0, 0, n, n) = L.block(0, 0, n, n);
    out.block(0, n, n, n) = L.block(0, 2 * n, n, n);
    out.block(n, 0, n, n) = L.block(2 * n, 0, n, n);
    out.block(n, n, n, n) = L.block(2 * n, 2 * n, n, n);
    return out;
  };

  CovariancePair cov;
  cov.plus = restrict_block(doubled_state.plus);
  cov.minus = restrict_block(doubled_state.minus);
  cov.charge = ChargeForm{pair.weight};
  cov.provenance = "calderon-periodic-restricted(beta=" + std::to_string(pair.parameter) + ")";

  StateReport rep = validate_state(cov);
  if (!rep.valid) {
    // diagnose the opposite sign convention before giving up
    CovariancePair flipped;
    flipped.plus = restrict_block(-doubled_state.minus);
    flipped.minus = restrict_block(-doubled_state.plus);
    flipped.charge = cov.charge;
    StateReport alt = validate_state(flipped);
    throw std::runtime_error(
        "restrict_periodic_state: block/sign identification failed (ccr " +
        std::to_string(rep.ccr_defect) + ", psd " + std::to_string(rep.psd_defect_plus) + "/" +
        std::to_string(rep.psd_defect_minus) + "); swapped convention is " +
        (alt.valid ? "valid -- flip the component identification" : "also invalid"));
  }
  return cov;
}

CalderonPair calderon_free_from_resolvent(const WeightedOperator& eps, double s_extent,
                                          int s_points) {
  if (s_points < 8 || s_points % 2 != 0)
    throw std::invalid_argument("calderon_free_from_resolvent: need an even s_points >= 8");
  const int n = eps.dim();
  SpectralDecomposition sd = spectral_decomposition(eps);

  const double ds = 2.0 * s_extent / s_points;
  // staggered lattice: s_j = -s_extent + (j + 1/2) ds, no node at s = 0
  const int jm = s_points / 2 - 1;  // node at -ds/2
  const int jp = s_points / 2;      // node at +ds/2

  Eigen::Matrix2cd cmode[2];
  Matrix blocks[2][2][2];  // [pm][row][col] accumulated over modes
  for (int pm = 0; pm < 2; ++pm)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) blocks[pm][r][c] = Matrix::Zero(n, n);

  Matrix Vw = eps.weight.values.cast<Complex>().asDiagonal() * sd.eigenvectors;
  for (int k = 0; k < n; ++k) {
    double e = sd.eigenvalues[k];
    // K = -d2/ds2 + e^2, Dirichlet truncation at +-s_extent
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(s_points, s_points);
    for (int j = 0; j < s_points; ++j) {
      K(j, j) = 2.0 / (ds * ds) + e * e;
      if (j > 0) K(j, j - 1) = -1.0 / (ds * ds);
      if (j + 1 < s_points) K(j, j + 1) = -1.0 / (ds * ds);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);

    for (int col = 0; col < 2; ++col) {
      // f = e_col; gamma^* S f with S = [[0,-1],[1,0]]:  -delta f1 + delta' f0
      double f0 = col == 0 ? 1.0 : 0.0;
      double f1 = col == 1 ? 1.0 : 0.0;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s_points);
      rhs[jm] += -f1 * 0.5 / ds;
      rhs[jp] += -f1 * 0.5 / ds;
      rhs[jm] += f0 / (ds * ds);
      rhs[jp] += -f0 / (ds * ds);
      Eigen::VectorXd v = lu.solve(rhs);
      // traces from the s > 0 side
      double val = 1.5 * v[jp] - 0.5 * v[jp + 1];
      double der = -(v[jp + 1] - v[jp]) / ds;
      // C+ = -gamma+ K^{-1} gamma^* S ; C- = +gamma- ...
      cmode[0](0, col) = -val;
      cmode[0](1, col) = -der;
      // traces from the s < 0 side, outward normal of Omega+ still -d/ds
      double valm = 1.5 * v[jm] - 0.5 * v[jm - 1];
      double derm = -(v[jm] - v[jm - 1]) / ds;
      cmode[1](0, col) = valm;
      cmode[1](1, col) = derm;
    }
    for (int pm = 0; pm < 2; ++pm)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          blocks[pm][r][c] += cmode[pm](r, c) * (sd.eigenvectors.col(k) * Vw.col(k).adjoint());
  }

  CalderonPair out;
  out.plus = block2(blocks[0][0][0], blocks[0][0][1], blocks[0][1][0], blocks[0][1][1]);
  out.minus = block2(blocks[1][0][0], blocks[1][0][1], blocks[1][1][0], blocks[1][1][1]);
  out.boundary = CalderonBoundary::free_space;
  out.weight = eps.weight;
  out.components = 1;
  return out;
}

} // namespace qfc
