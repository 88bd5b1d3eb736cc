#include "qfc/hadamard.hpp"

#include <cmath>

namespace qfc {

namespace {

const Complex I_UNIT{0.0, 1.0};

// eigen data of a weighted-self-adjoint positive matrix
struct EigData {
  RealVector sqrt_ev;   // sqrt of eigenvalues of a, i.e. spectrum of eps
  Matrix V;             // plain-unitary eigenvectors of W^{1/2} a W^{-1/2}
  RealVector s;         // sqrt of weights
};

EigData eig_of(const Matrix& a, const RealVector& w) {
  EigData e;
  e.s = w.array().sqrt();
  const int n = static_cast<int>(a.rows());
  Matrix H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = a(i, j) * e.s[i] / e.s[j];
  H = 0.5 * (H + H.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("riccati: eigensolver failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("riccati: spatial operator not positive on the grid");
  e.sqrt_ev = es.eigenvalues().array().sqrt();
  e.V = es.eigenvectors();
  return e;
}

Matrix eps_from(const EigData& e) {
  const int n = static_cast<int>(e.s.size());
  Matrix M = e.V * e.sqrt_ev.cast<Complex>().asDiagonal() * e.V.adjoint();
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = M(i, j) * e.s[j] / e.s[i];
  return out;
}

// solve eps X + X eps = RHS in the eps eigenbasis
Matrix sylvester_solve(const EigData& e, const Matrix& rhs) {
  const int n = static_cast<int>(e.s.size());
  Matrix R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = rhs(i, j) * e.s[i] / e.s[j];
  Matrix Rt = e.V.adjoint() * R * e.V;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Rt(i, j) /= (e.sqrt_ev[i] + e.sqrt_ev[j]);
  Matrix X = e.V * Rt * e.V.adjoint();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) *= e.s[j] / e.s[i];
  return X;
}

// second-order time derivative on a non-uniform-safe uniform grid
std::vector<Matrix> ddt(const std::vector<Matrix>& M, double dt) {
  const int m = static_cast<int>(M.size());
  std::vector<Matrix> out(m);
  out[0] = (-3.0 * M[0] + 4.0 * M[1] - M[2]) / (2.0 * dt);
  for (int i = 1; i + 1 < m; ++i) out[i] = (M[i + 1] - M[i - 1]) / (2.0 * dt);
  out[m - 1] = (3.0 * M[m - 1] - 4.0 * M[m - 2] + M[m - 3]) / (2.0 * dt);
  return out;
}

} // namespace

OperatorFamily operator_family(const Scenario& scenario, const std::vector<double>& t_grid) {
  OperatorFamily fam;
  fam.t_grid = t_grid;
  const int n = scenario.grid.n_points;
  Eigen::MatrixXd D = spectral_derivative(n, scenario.grid.circumference);
  for (double t : t_grid) {
    RealVector w(n), c(n), v(n), r(n);
    for (int j = 0; j < n; ++j) {
      double x = scenario.grid.coordinates[j];
      double h = scenario.profile.h(t, x);
      if (h <= 0.0) throw std::runtime_error("operator_family: metric degenerate");
      w[j] = std::sqrt(h) * scenario.grid.spacing;
      c[j] = scenario.grid.spacing / std::sqrt(h);
      v[j] = scenario.profile.potential(t, x);
      r[j] = scenario.profile.dh_dt(t, x) / (2.0 * h);
    }
    Eigen::MatrixXd stiff = D.transpose() * c.asDiagonal() * D;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = Complex(stiff(i, j) / w[i], 0.0);
    a += v.cast<Complex>().asDiagonal();
    fam.a.push_back(a);
    fam.r.push_back(r.cast<Complex>().asDiagonal());
    fam.w.push_back(w);
  }
  return fam;
}

int RiccatiSolution::index_of(double t) const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(t_grid.size()); ++i)
    if (std::abs(t_grid[i] - t) < std::abs(t_grid[best] - t)) best = i;
  return best;
}

RiccatiSolution riccati_iterate(const OperatorFamily& family, int k_max, double tol) {
  const int m = static_cast<int>(family.t_grid.size());
  if (m < 5) throw std::invalid_argument("riccati_iterate: t_grid too short");
  const double dt = family.t_grid[1] - family.t_grid[0];
  const int n = static_cast<int>(family.a[0].rows());

  std::vector<EigData> eig(m);
  std::vector<Matrix> eps(m);
  for (int i = 0; i < m; ++i) {
    eig[i] = eig_of(family.a[i], family.w[i]);
    eps[i] = eps_from(eig[i]);
  }
  std::vector<Matrix> deps = ddt(eps, dt);

  RiccatiSolution sol;
  sol.t_grid = family.t_grid;
  sol.w = family.w;

  std::vector<Matrix> d(m, Matrix::Zero(n, n));
  std::vector<Matrix> best_b(m);
  double best_res = std::numeric_limits<double>::infinity();

  auto residual_of = [&](const std::vector<Matrix>& b, int margin) {
    std::vector<Matrix> db = ddt(b, dt);
    double worst = 0.0;
    for (int i = margin; i < m - margin; ++i) {
      Matrix res = I_UNIT * db[i] - b[i] * b[i] + family.a[i] + I_UNIT * family.r[i] * b[i];
      worst = std::max(worst, weighted_norm(res, family.w[i]));
    }
    return worst;
  };

  for (int k = 0; k < k_max; ++k) {
    std::vector<Matrix> dd = ddt(d, dt);
    std::vector<Matrix> next(m);
    for (int i = 0; i < m; ++i) {
      Matrix rhs = I_UNIT * (deps[i] + dd[i]) + I_UNIT * family.r[i] * (eps[i] + d[i]) - d[i] * d[i];
      next[i] = sylvester_solve(eig[i], rhs);
    }
    d.swap(next);

    std::vector<Matrix> b(m);
    for (int i = 0; i < m; ++i) b[i] = eps[i] + d[i];
    int margin = std::min(2 * (k + 2), m / 4);
    double res = residual_of(b, std::max(margin, 2));
    sol.residual_history.push_back(res);
    if (res < best_res) {
      best_res = res;
      best_b = b;
    }
    if (res <= tol) break;
    size_t hist = sol.residual_history.size();
    if (hist >= 2 && sol.residual_history[hist - 1] > 0.9 * sol.residual_history[hist - 2]) break;
  }

  sol.b = best_b;
  sol.final_residual = best_res;

  // positivity margin of (b + b^{*w}) relative to eps at mid-grid
  int mid = m / 2;
  Matrix s_op = sol.b[mid] + weighted_adjoint_matrix(sol.b[mid], family.w[mid]);
  EigData& e = eig[mid];
  Matrix epsi_half = e.V * e.sqrt_ev.cwiseInverse().cwiseSqrt().cast<Complex>().asDiagonal() *
                     e.V.adjoint();
  Matrix s_plain(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s_plain(i, j) = s_op(i, j) * e.s[i] / e.s[j];
  Matrix comp = epsi_half * s_plain * epsi_half;  // eps^{-1/2} s eps^{-1/2} in plain coords
  comp = 0.5 * (comp + comp.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(comp, Eigen::EigenvaluesOnly);
  sol.positivity_margin = es.eigenvalues().minCoeff();
  if (sol.positivity_margin <= 0.0)
    throw std::runtime_error("riccati_iterate: splitting degenerate; shrink perturbation or refine");
  return sol;
}

RiccatiSolution riccati_iterate(const Scenario& scenario, const std::vector<double>& t_grid,
                                int k_max, double tol) {
  return riccati_iterate(operator_family(scenario, t_grid), k_max, tol);
}

double factorization_residual(const RiccatiSolution& sol, const OperatorFamily& family) {
  const int m = static_cast<int>(sol.t_grid.size());
  const int n = static_cast<int>(sol.b[0].rows());
  const double dt = sol.t_grid[1] - sol.t_grid[0];

  // smooth test evolutions: a few modes with slow envelopes
  std::vector<std::function<Complex(double, int)>> tests;
  for (int mode = 0; mode < std::min(3, n); ++mode) {
    tests.push_back([mode, n](double t, int j) {
      double x = 2.0 * M_PI * j / n;
      return std::exp(I_UNIT * (mode + 1.0) * x) * std::cos(0.7 * t + 0.2 * mode);
    });
  }

  double worst = 0.0;
  for (auto& test : tests) {
    std::vector<Vector> phi(m);
    for (int i = 0; i < m; ++i) {
      Vector v(n);
      for (int j = 0; j < n; ++j) v[j] = test(sol.t_grid[i], j);
      phi[i] = v;
    }
    for (int sign = 0; sign < 2; ++sign) {
      // chi = (d_t - i b^{+-}) phi, then P phi vs (d_t + i b^{+-} + r) chi
      std::vector<Vector> chi(m), pphi(m);
      for (int i = 1; i + 1 < m; ++i) {
        Vector dphi = (phi[i + 1] - phi[i - 1]) / (2.0 * dt);
        Matrix b = sol.b[i];
        if (sign == 1) b = -weighted_adjoint_matrix(b, sol.w[i]);
        chi[i] = dphi - I_UNIT * (b * phi[i]);
      }
      for (int i = 2; i + 2 < m; ++i) {
        Vector dchi = (chi[i + 1] - chi[i - 1]) / (2.0 * dt);
        Matrix b = sol.b[i];
        if (sign == 1) b = -weighted_adjoint_matrix(b, sol.w[i]);
        Vector fact = dchi + I_UNIT * (b * chi[i]) + family.r[i] * chi[i];
        Vector d2 = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (dt * dt);
        Vector direct = d2 + family.r[i] * ((phi[i + 1] - phi[i - 1]) / (2.0 * dt)) +
                        family.a[i] * phi[i];
        WeightVector wv{sol.w[i], sol.t_grid[i]};
        double num = std::sqrt(std::abs(inner_product(fact - direct, fact - direct, wv)));
        double den = std::sqrt(std::abs(inner_product(phi[i], phi[i], wv)));
        worst = std::max(worst, num / den);
      }
    }
  }
  return worst;
}

Splitting microlocal_splitting(const RiccatiSolution& sol, double base_time) {
  const int i0 = sol.index_of(base_time);
  const int n = static_cast<int>(sol.b[i0].rows());
  const RealVector& w = sol.w[i0];

  Matrix bp = sol.b[i0];
  Matrix bm = -weighted_adjoint_matrix(bp, w);
  Matrix s_op = bp - bm;  // = b + b^{*w}, positive by Riccati invariant

  WeightVector wv{w, sol.t_grid[i0]};
  WeightedOperator s_wo{s_op, wv, "b+ - b-"};
  if (min_eigenvalue(s_wo) <= 0.0)
    throw std::runtime_error("microlocal_splitting: b+ - b- not positive at base time");
  Matrix s_mhalf = func_calculus(s_wo, [](double x) { return 1.0 / std::sqrt(x); }).mat;

  Splitting split;
  split.base_time = sol.t_grid[i0];
  split.b_plus = bp;
  split.b_minus = bm;

  split.T = Matrix::Zero(2 * n, 2 * n);
  split.T.block(0, 0, n, n) = s_mhalf;
  split.T.block(0, n, n, n) = -s_mhalf;
  split.T.block(n, 0, n, n) = bp * s_mhalf;
  split.T.block(n, n, n, n) = -bm * s_mhalf;

  split.T_inverse = Matrix::Zero(2 * n, 2 * n);
  split.T_inverse.block(0, 0, n, n) = -s_mhalf * bm;
  split.T_inverse.block(0, n, n, n) = s_mhalf;
  split.T_inverse.block(n, 0, n, n) = -s_mhalf * bp;
  split.T_inverse.block(n, n, n, n) = s_mhalf;

  Matrix pi_plus = Matrix::Zero(2 * n, 2 * n);
  pi_plus.block(0, 0, n, n) = Matrix::Identity(n, n);
  split.projections.plus = split.T * pi_plus * split.T_inverse;
  split.projections.minus = Matrix::Identity(2 * n, 2 * n) - split.projections.plus;
  split.projections.weight = wv;
  return split;
}

CovariancePair hadamard_covariances(const Splitting& split) {
  const int n = split.projections.weight.size();
  Matrix q = charge_matrix(n);
  CovariancePair cov;
  cov.plus = q * split.projections.plus;
  cov.minus = -q * split.projections.minus;
  cov.charge = ChargeForm{split.projections.weight};
  cov.provenance = "hadamard-splitting";
  return cov;
}

namespace {

// time-ordered exponential of i b^{+-}(t) from grid samples, RK4 with linear
// interpolation of b between nodes
Vector ordered_exp_apply(const RiccatiSolution& sol, bool plus, const Vector& v0, double t) {
  const double dt_grid = sol.t_grid[1] - sol.t_grid[0];
  auto b_at = [&](double tau) -> Matrix {
    double pos = (tau - sol.t_grid.front()) / dt_grid;
    int i = std::clamp(static_cast<int>(std::floor(pos)), 0,
                       static_cast<int>(sol.t_grid.size()) - 2);
    double frac = std::clamp(pos - i, 0.0, 1.0);
    Matrix b = (1.0 - frac) * sol.b[i] + frac * sol.b[i + 1];
    if (!plus) {
      RealVector w = (1.0 - frac) * sol.w[i] + frac * sol.w[i + 1];
      b = -weighted_adjoint_matrix(b, w);
    }
    return b;
  };
  int i0 = sol.index_of(0.0);
  double start = sol.t_grid[i0];
  int n_steps = std::max(1, static_cast<int>(std::ceil(std::abs(t - start) / dt_grid)) * 2);
  double h = (t - start) / n_steps;
  Vector v = v0;
  double tc = start;
  for (int k = 0; k < n_steps; ++k) {
    Vector k1 = I_UNIT * (b_at(tc) * v);
    Vector k2 = I_UNIT * (b_at(tc + h / 2) * (v + h / 2 * k1));
    Vector k3 = I_UNIT * (b_at(tc + h / 2) * (v + h / 2 * k2));
    Vector k4 = I_UNIT * (b_at(tc + h) * (v + h * k3));
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tc += h;
  }
  return v;
}

} // namespace

CauchyData cauchy_parametrix(const RiccatiSolution& sol, const CauchyData& f, double t) {
  int i0 = sol.index_of(0.0);
  const RealVector& w0 = sol.w[i0];
  Matrix bp = sol.b[i0];
  Matrix bm = -weighted_adjoint_matrix(bp, w0);
  Matrix s_inv = (bp - bm).fullPivLu().inverse();

  // u^{+-} f = (b+ - b-)^{-1}(0) (-+ b^{-+}(0) f0 +- f1)
  Vector up = s_inv * (-(bm * f.value) + f.momentum);
  Vector um = s_inv * ((bp * f.value) - f.momentum);

  Vector phi_p = ordered_exp_apply(sol, true, up, t);
  Vector phi_m = ordered_exp_apply(sol, false, um, t);

  int it = sol.index_of(t);
  Matrix bpt = sol.b[it];
  Matrix bmt = -weighted_adjoint_matrix(bpt, sol.w[it]);

  CauchyData out;
  out.value = phi_p + phi_m;
  out.momentum = bpt * phi_p + bmt * phi_m;
  return out;
}

Matrix feynman_from_splitting(const Scenario& scenario, const Splitting& split, double t, double s) {
  const int n = scenario.grid.n_points;
  Matrix cpm = t >= s ? split.projections.plus : split.projections.minus;
  double sign = t >= s ? 1.0 : -1.0;

  EvolutionOperator Ut = evolve(scenario, 0.0, t);   // U(t, 0)
  EvolutionOperator Us = evolve(scenario, s, 0.0);   // U(0, s)
  Matrix prop = Ut.matrix * cpm * Us.matrix;
  // i^{-1} pi_0 U_H^{+-}(t,s) pi_1^*, with the +- branch chosen by theta(t-s)
  return sign / I_UNIT * prop.block(0, n, n, n);
}

RealVector mode_compression(const Matrix& difference, const RealVector& weight, const Grid& grid,
                            int k_lo, int k_hi) {
  const int n = grid.n_points;
  RealVector out(k_hi - k_lo + 1);
  WeightVector wd{doubled(weight), 0.0};
  for (int k = k_lo; k <= k_hi; ++k) {
    Vector mode(n);
    for (int j = 0; j < n; ++j) mode[j] = std::exp(I_UNIT * static_cast<double>(k) * grid.coordinates[j]);
    Complex nrm2 = 0.0;
    for (int j = 0; j < n; ++j) nrm2 += std::norm(mode[j]) * weight[j];
    mode /= std::sqrt(nrm2.real());

    Vector e0 = Vector::Zero(2 * n), e1 = Vector::Zero(2 * n);
    e0.head(n) = mode;
    e1.tail(n) = mode;
    Eigen::Matrix2cd comp;
    comp(0, 0) = inner_product(e0, difference * e0, wd);
    comp(0, 1) = inner_product(e0, difference * e1, wd);
    comp(1, 0) = inner_product(e1, difference * e0, wd);
    comp(1, 1) = inner_product(e1, difference * e1, wd);
    out[k - k_lo] = comp.operatorNorm();
  }
  return out;
}

double mode_decay_exponent(const Splitting& split, const WeightedOperator& eps, const Grid& grid,
                           int k_lo, int k_hi) {
  ProjectionPair vac = vacuum_projections(eps);
  Matrix diff = split.projections.plus - vac.plus;
  RealVector vals = mode_compression(diff, eps.weight.values, grid, k_lo, k_hi);
  RealVector ks(vals.size());
  for (int i = 0; i < ks.size(); ++i) ks[i] = k_lo + i;
  return -loglog_slope(ks, vals.cwiseMax(1e-300));
}

} // namespace qfc
