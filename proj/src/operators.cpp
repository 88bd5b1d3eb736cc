#include "qfc/operators.hpp"

#include <cmath>

namespace qfc {

WeightedOperator build_spatial_operator(const MetricProfile& profile, const Grid& grid, double t) {
  const int n = grid.n_points;
  WeightVector w = weight_at(profile, grid, t);

  Eigen::MatrixXd D = spectral_derivative(n, grid.circumference);
  RealVector c(n), v(n);
  for (int j = 0; j < n; ++j) {
    double x = grid.coordinates[j];
    double h = profile.h(t, x);
    if (h <= 0.0) throw std::runtime_error("build_spatial_operator: metric degenerate");
    c[j] = grid.spacing / std::sqrt(h);  // sqrt(h) h^{-1} dx at the node
    v[j] = profile.potential(t, x);
  }

  Eigen::MatrixXd stiff = D.transpose() * c.asDiagonal() * D;
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = stiff(i, j) / w.values[i];
  a += v.cast<Complex>().asDiagonal();

  WeightedOperator A{a, w, "a(" + std::to_string(t) + ")"};
  double lo = min_eigenvalue(A);
  if (lo <= 0.0)
    throw std::runtime_error("build_spatial_operator: operator not positive; refine grid or raise m");
  return A;
}

SpectralDecomposition spectral_decomposition(const WeightedOperator& A) {
  const int n = A.dim();
  RealVector s = A.weight.values.array().sqrt();
  Matrix H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = A.mat(i, j) * s[i] / s[j];
  H = 0.5 * (H + H.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_decomposition: eigensolver failed");

  SpectralDecomposition out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  // back to weighted coordinates and fix phases
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) out.eigenvectors(i, k) /= s[i];
    double top = 0.0;
    for (int i = 0; i < n; ++i) top = std::max(top, std::abs(out.eigenvectors(i, k)));
    for (int i = 0; i < n; ++i) {
      if (std::abs(out.eigenvectors(i, k)) > 1e-8 * top) {
        Complex phase = out.eigenvectors(i, k) / std::abs(out.eigenvectors(i, k));
        out.eigenvectors.col(k) /= phase;
        break;
      }
    }
  }
  return out;
}

namespace {

WeightedOperator apply_spectral(const WeightedOperator& A,
                                const std::function<Complex(double)>& f,
                                const std::string& label) {
  SpectralDecomposition sd = spectral_decomposition(A);
  const int n = A.dim();
  Vector fx(n);
  for (int k = 0; k < n; ++k) {
    Complex val = f(sd.eigenvalues[k]);
    if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
      throw std::runtime_error("func_calculus: function singular at eigenvalue " +
                               std::to_string(sd.eigenvalues[k]));
    fx[k] = val;
  }
  // f(A) = V f(Lambda) V^{*w};  V^{*w} = W^{-1} V^H W column-wise
  Matrix Vw = A.weight.values.cast<Complex>().asDiagonal() * sd.eigenvectors;
  Matrix out = sd.eigenvectors * fx.asDiagonal() * Vw.adjoint();
  return WeightedOperator{out, A.weight, label.empty() ? "f(" + A.label + ")" : label};
}

} // namespace

WeightedOperator func_calculus(const WeightedOperator& A, const std::function<double(double)>& f,
                               const std::string& label) {
  return apply_spectral(A, [&f](double x) { return Complex(f(x), 0.0); }, label);
}

WeightedOperator func_calculus_complex(const WeightedOperator& A,
                                       const std::function<Complex(double)>& f,
                                       const std::string& label) {
  return apply_spectral(A, f, label);
}

WeightedOperator weighted_adjoint(const WeightedOperator& A) {
  return WeightedOperator{weighted_adjoint_matrix(A.mat, A.weight.values), A.weight, A.label + "*"};
}

double self_adjointness_defect(const WeightedOperator& A) {
  return hermiticity_defect(A.mat, A.weight.values);
}

double min_eigenvalue(const WeightedOperator& A) {
  return spectral_decomposition(A).eigenvalues.minCoeff();
}

} // namespace qfc
