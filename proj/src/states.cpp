#include "qfc/states.hpp"

#include <cmath>

namespace qfc {

namespace {

Matrix block2(const Matrix& a00, const Matrix& a01, const Matrix& a10, const Matrix& a11) {
  const int n = static_cast<int>(a00.rows());
  Matrix out(2 * n, 2 * n);
  out.block(0, 0, n, n) = a00;
  out.block(0, n, n, n) = a01;
  out.block(n, 0, n, n) = a10;
  out.block(n, n, n, n) = a11;
  return out;
}

void require_positive(const WeightedOperator& eps, const char* who) {
  if (min_eigenvalue(eps) <= 0.0)
    throw std::invalid_argument(std::string(who) + ": eps not positive");
}

} // namespace

CovariancePair vacuum_covariances(const WeightedOperator& eps) {
  require_positive(eps, "vacuum_covariances");
  const int n = eps.dim();
  Matrix I = Matrix::Identity(n, n);
  Matrix epsi = func_calculus(eps, [](double x) { return 1.0 / x; }).mat;
  CovariancePair cov;
  cov.plus = 0.5 * block2(eps.mat, I, I, epsi);
  cov.minus = 0.5 * block2(eps.mat, -I, -I, epsi);
  cov.charge = ChargeForm{eps.weight};
  cov.provenance = "vacuum";
  return cov;
}

ProjectionPair vacuum_projections(const WeightedOperator& eps) {
  require_positive(eps, "vacuum_projections");
  const int n = eps.dim();
  Matrix I = Matrix::Identity(n, n);
  Matrix epsi = func_calculus(eps, [](double x) { return 1.0 / x; }).mat;
  ProjectionPair p;
  p.plus = 0.5 * block2(I, epsi, eps.mat, I);
  p.minus = 0.5 * block2(I, -epsi, -eps.mat, I);
  p.weight = eps.weight;
  return p;
}

CovariancePair thermal_covariances(const WeightedOperator& eps, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("thermal_covariances: beta must be positive");
  require_positive(eps, "thermal_covariances");
  const int n = eps.dim();
  Matrix I = Matrix::Identity(n, n);
  // coth placement on the diagonal: the transcription of the thermal pair
  // that keeps lambda+- >= 0 and matches the beta-periodic restriction.
  Matrix d0 = func_calculus(eps, [beta](double x) { return x / std::tanh(0.5 * beta * x); }).mat;
  Matrix d1 = func_calculus(eps, [beta](double x) { return 1.0 / (x * std::tanh(0.5 * beta * x)); }).mat;
  CovariancePair cov;
  cov.plus = 0.5 * block2(d0, I, I, d1);
  cov.minus = 0.5 * block2(d0, -I, -I, d1);
  cov.charge = ChargeForm{eps.weight};
  cov.provenance = "thermal(beta=" + std::to_string(beta) + ")";
  return cov;
}

StateReport validate_state(const CovariancePair& cov, double tol) {
  StateReport rep;
  RealVector wd = cov.doubled_weight();
  rep.hermiticity_defect =
      std::max(hermiticity_defect(cov.plus, wd), hermiticity_defect(cov.minus, wd));
  rep.psd_defect_plus = psd_defect(cov.plus, wd);
  rep.psd_defect_minus = psd_defect(cov.minus, wd);
  Matrix q = cov.charge.matrix();
  rep.ccr_defect = weighted_norm(cov.plus - cov.minus - q, wd) / weighted_norm(q, wd);
  rep.valid = rep.hermiticity_defect <= tol && rep.psd_defect_plus <= tol &&
              rep.psd_defect_minus <= tol && rep.ccr_defect <= tol;
  return rep;
}

double purity_defect(const CovariancePair& cov) {
  RealVector wd = cov.doubled_weight();
  Matrix M = cov.plus + cov.minus;
  Eigen::FullPivLU<Matrix> lu(M);
  if (!lu.isInvertible()) throw std::runtime_error("purity_defect: lambda+ + lambda- is singular");
  Matrix q = cov.charge.matrix();
  Matrix qMq = q * lu.inverse() * q;
  return weighted_norm(qMq - M, wd) / weighted_norm(M, wd);
}

Complex npoint_function(const CovariancePair& cov, const std::vector<Vector>& starred,
                        const std::vector<Vector>& unstarred) {
  if (starred.size() != unstarred.size()) return Complex(0.0, 0.0);
  const int n = static_cast<int>(starred.size());
  if (n == 0) return Complex(1.0, 0.0);

  RealVector wd = cov.doubled_weight();
  const int dim = 2 * cov.n();
  WeightVector wdv{wd, cov.charge.weight.time};
  Matrix P(n, n);
  for (int i = 0; i < n; ++i) {
    if (starred[i].size() != dim) throw std::invalid_argument("npoint_function: dimension mismatch");
    for (int j = 0; j < n; ++j) {
      if (unstarred[j].size() != dim) throw std::invalid_argument("npoint_function: dimension mismatch");
      // omega(psi^*(y) psi(y')) = (y' | lambda^- y)_w
      P(i, j) = inner_product(unstarred[j], cov.minus * starred[i], wdv);
    }
  }

  // permanent by Ryser's formula
  Complex total = 0.0;
  const unsigned full = 1u << n;
  for (unsigned mask = 1; mask < full; ++mask) {
    Complex prod = 1.0;
    int bits = __builtin_popcount(mask);
    for (int i = 0; i < n; ++i) {
      Complex row = 0.0;
      for (int j = 0; j < n; ++j)
        if (mask & (1u << j)) row += P(i, j);
      prod *= row;
    }
    double sign = ((n - bits) % 2 == 0) ? 1.0 : -1.0;
    total += sign * prod;
  }
  return total;
}

StaticReduction static_reduction(const MetricProfile& profile, const Grid& grid) {
  if (!profile.time_independent)
    throw std::invalid_argument("static_reduction: profile must be time-independent");
  const int n = grid.n_points;
  const double t0 = 0.0;

  RealVector N(n), w(n), wt(n), c(n), v(n);
  for (int j = 0; j < n; ++j) {
    double x = grid.coordinates[j];
    double Nj = profile.lapse(x);
    if (Nj <= 0.0) throw std::invalid_argument("static_reduction: lapse must be positive");
    double hj = profile.h(t0, x);
    if (hj <= 0.0) throw std::runtime_error("static_reduction: metric degenerate");
    N[j] = Nj;
    w[j] = std::sqrt(hj) * grid.spacing;
    wt[j] = Nj * w[j];                       // lapse-weighted measure N sqrt(h) dx
    c[j] = Nj * grid.spacing / std::sqrt(hj);  // N sqrt(h) h^{-1} dx at the node
    v[j] = profile.potential(t0, x);
  }

  Eigen::MatrixXd D = spectral_derivative(n, grid.circumference);
  Eigen::MatrixXd stiff = D.transpose() * c.asDiagonal() * D;
  Matrix h0 = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h0(i, j) = stiff(i, j) / wt[i];
  h0 += v.cast<Complex>().asDiagonal();

  WeightVector wt_vec{wt, t0};
  Matrix h0t = N.cast<Complex>().asDiagonal() * h0 * N.cast<Complex>().asDiagonal();
  WeightedOperator reduced{h0t, wt_vec, "N h0 N"};

  WeightedOperator eps_t = func_calculus(reduced, [](double x) {
    if (x <= 0.0) throw std::runtime_error("static_reduction: reduced operator not positive");
    return std::sqrt(x);
  }, "eps~");

  WeightVector w_vec{w, t0};

  // pull a tilde-side pair back through Z = diag(N, 1):
  // L_P = diag(1, N) L~ diag(N^{-1}, 1) blockwise
  auto pull_back = [n, N, w_vec](const CovariancePair& tilde, const std::string& prov) {
    Matrix B = Matrix::Zero(2 * n, 2 * n);
    Matrix Zi = Matrix::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
      B(j, j) = 1.0;
      B(n + j, n + j) = N[j];
      Zi(j, j) = 1.0 / N[j];
      Zi(n + j, n + j) = 1.0;
    }
    CovariancePair out;
    out.plus = B * tilde.plus * Zi;
    out.minus = B * tilde.minus * Zi;
    out.charge = ChargeForm{w_vec};
    out.provenance = prov;
    return out;
  };

  StaticReduction red;
  red.reduced_operator = reduced;
  red.weight = w_vec;
  red.ground = pull_back(vacuum_covariances(eps_t), "static-ground");

  // conserved energy form E = q b, PSD certificate
  Matrix LE = Matrix::Zero(2 * n, 2 * n);
  LE.block(0, 0, n, n) = N.cast<Complex>().asDiagonal() * h0;
  LE.block(n, n, n, n) = N.cast<Complex>().asDiagonal();
  red.energy_form = LE;

  red.kms = [eps_t, pull_back](double beta) {
    return pull_back(thermal_covariances(eps_t, beta),
                     "static-kms(beta=" + std::to_string(beta) + ")");
  };
  return red;
}

} // namespace qfc
