#include "qfc/linalg.hpp"

#include <cmath>

namespace qfc {

namespace {

Matrix to_plain_coords(const Matrix& L, const RealVector& w) {
  // W^{1/2} L W^{-1/2}
  RealVector s = w.array().sqrt();
  Matrix out = L;
  for (int i = 0; i < L.rows(); ++i)
    for (int j = 0; j < L.cols(); ++j) out(i, j) = L(i, j) * s[i] / s[j];
  return out;
}

} // namespace

double weighted_norm(const Matrix& L, const RealVector& w) {
  if (L.rows() != w.size() || L.cols() != w.size())
    throw std::invalid_argument("weighted_norm: dimension mismatch");
  return to_plain_coords(L, w).operatorNorm();
}

Matrix weighted_adjoint_matrix(const Matrix& L, const RealVector& w) {
  Matrix out = L.adjoint();
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) *= w[j] / w[i];
  return out;
}

double hermiticity_defect(const Matrix& L, const RealVector& w) {
  double denom = weighted_norm(L, w);
  if (denom == 0.0) return 0.0;
  return weighted_norm(L - weighted_adjoint_matrix(L, w), w) / denom;
}

double psd_defect(const Matrix& L, const RealVector& w) {
  Matrix H = to_plain_coords(L, w);
  H = 0.5 * (H + H.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double norm = std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
  if (norm == 0.0) return 0.0;
  return lo < 0.0 ? -lo / norm : 0.0;
}

RealVector doubled(const RealVector& w) {
  RealVector d(2 * w.size());
  d << w, w;
  return d;
}

Matrix charge_matrix(int n) {
  Matrix q = Matrix::Zero(2 * n, 2 * n);
  q.block(0, n, n, n) = Matrix::Identity(n, n);
  q.block(n, 0, n, n) = Matrix::Identity(n, n);
  return q;
}

Matrix rebase_form(const Matrix& L, const RealVector& w_old, const RealVector& w_new) {
  Matrix out = L;
  for (int i = 0; i < L.rows(); ++i) out.row(i) *= w_old[i] / w_new[i];
  return out;
}

Eigen::MatrixXd spectral_derivative(int n, double circumference) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  const double h = 2.0 * M_PI / n;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      int d = j - k;
      double sgn = (d % 2 == 0) ? 1.0 : -1.0;
      if (n % 2 == 0)
        D(j, k) = 0.5 * sgn / std::tan(0.5 * d * h);
      else
        D(j, k) = 0.5 * sgn / std::sin(0.5 * d * h);
    }
  }
  return D * (2.0 * M_PI / circumference);
}

double loglog_slope(const RealVector& x, const RealVector& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need two or more samples");
  const int m = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) throw std::invalid_argument("loglog_slope: samples must be positive");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace qfc
