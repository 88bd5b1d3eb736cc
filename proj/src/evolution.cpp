#include "qfc/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qfc {

namespace {

const Complex I_UNIT{0.0, 1.0};

// assembles a(t) without the per-call eigenvalue check; D is reused
class SpatialAssembler {
public:
  SpatialAssembler(const MetricProfile& profile, const Grid& grid)
      : profile_(profile), grid_(grid), D_(spectral_derivative(grid.n_points, grid.circumference)) {}

  Matrix at(double t) const {
    const int n = grid_.n_points;
    RealVector w(n), c(n), v(n);
    for (int j = 0; j < n; ++j) {
      double x = grid_.coordinates[j];
      double h = profile_.h(t, x);
      if (h <= 0.0) throw std::runtime_error("evolve: metric degenerate");
      w[j] = std::sqrt(h) * grid_.spacing;
      c[j] = grid_.spacing / std::sqrt(h);
      v[j] = profile_.potential(t, x);
    }
    Eigen::MatrixXd stiff = D_.transpose() * c.asDiagonal() * D_;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = Complex(stiff(i, j) / w[i], 0.0);
    a += v.cast<Complex>().asDiagonal();
    return a;
  }

private:
  const MetricProfile& profile_;
  const Grid& grid_;
  Eigen::MatrixXd D_;
};

Matrix spatial_matrix(const Scenario& sc, double t) {
  return build_spatial_operator(sc.profile, sc.grid, t).mat;
}

RealVector r_vector(const Scenario& sc, double t) {
  const int n = sc.grid.n_points;
  RealVector r(n);
  for (int j = 0; j < n; ++j) {
    double x = sc.grid.coordinates[j];
    double h = sc.profile.h(t, x);
    if (h <= 0.0) throw std::runtime_error("assemble_generator: metric degenerate");
    r[j] = sc.profile.dh_dt(t, x) / (2.0 * h);
  }
  return r;
}

} // namespace

int Scenario::default_steps_per_unit() const {
  double ts[3] = {t_min, 0.0, t_max};
  double eps_max = 1.0;
  for (double t : ts) {
    WeightedOperator a = build_spatial_operator(profile, grid, t);
    eps_max = std::max(eps_max, std::sqrt(spectral_decomposition(a).eigenvalues.maxCoeff()));
  }
  int rule = static_cast<int>(std::ceil(8.0 * eps_max / (2.0 * M_PI)));
  int target = static_cast<int>(std::ceil(28.0 * eps_max));
  return std::max(rule, target);
}

Matrix assemble_generator(const Scenario& scenario, double t) {
  if (t < scenario.t_min - 1e-12 || t > scenario.t_max + 1e-12)
    throw std::invalid_argument("assemble_generator: t outside scenario window");
  const int n = scenario.grid.n_points;
  Matrix H = Matrix::Zero(2 * n, 2 * n);
  H.block(0, n, n, n) = Matrix::Identity(n, n);
  H.block(n, 0, n, n) = spatial_matrix(scenario, t);
  H.block(n, n, n, n) = (I_UNIT * r_vector(scenario, t).cast<Complex>().array()).matrix().asDiagonal();
  return H;
}

EvolutionOperator evolve(const Scenario& scenario, double s, double t) {
  const int n = scenario.grid.n_points;
  int spu = scenario.steps_per_unit > 0 ? scenario.steps_per_unit : scenario.default_steps_per_unit();
  {
    WeightedOperator a = build_spatial_operator(scenario.profile, scenario.grid, s);
    double eps_max = std::sqrt(spectral_decomposition(a).eigenvalues.maxCoeff());
    if (spu < 8.0 * eps_max / (2.0 * M_PI))
      throw std::invalid_argument("evolve: steps_per_unit below the resolution rule");
  }

  EvolutionOperator U;
  U.t_from = s;
  U.t_to = t;
  U.weight_from = weight_at(scenario.profile, scenario.grid, s);
  U.weight_to = weight_at(scenario.profile, scenario.grid, t);
  U.matrix = Matrix::Identity(2 * n, 2 * n);
  if (s == t) return U;

  const int n_steps = std::max(1, static_cast<int>(std::ceil(std::abs(t - s) * spu)));
  const double dt = (t - s) / n_steps;

  // RK4 on dU/dt = i H(t) U with the block structure of H used directly
  auto apply_H = [n](const Matrix& a, const Vector& ir, const Matrix& X) {
    Matrix out(2 * n, X.cols());
    out.topRows(n) = X.bottomRows(n);
    out.bottomRows(n) = a * X.topRows(n) + ir.asDiagonal() * X.bottomRows(n);
    return (I_UNIT * out).eval();
  };

  SpatialAssembler assembler(scenario.profile, scenario.grid);
  double tc = s;
  Matrix a0 = assembler.at(tc);
  Vector ir0 = I_UNIT * r_vector(scenario, tc).cast<Complex>();
  for (int step = 0; step < n_steps; ++step) {
    double tm = tc + 0.5 * dt, te = tc + dt;
    Matrix am = assembler.at(tm);
    Vector irm = I_UNIT * r_vector(scenario, tm).cast<Complex>();
    Matrix ae = assembler.at(te);
    Vector ire = I_UNIT * r_vector(scenario, te).cast<Complex>();

    Matrix k1 = apply_H(a0, ir0, U.matrix);
    Matrix k2 = apply_H(am, irm, U.matrix + 0.5 * dt * k1);
    Matrix k3 = apply_H(am, irm, U.matrix + 0.5 * dt * k2);
    Matrix k4 = apply_H(ae, ire, U.matrix + dt * k3);
    U.matrix += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    tc = te;
    a0.swap(ae);
    ir0.swap(ire);
  }
  return U;
}

double symplecticity_defect(const EvolutionOperator& U) {
  const int n2 = static_cast<int>(U.matrix.rows());
  Matrix q = charge_matrix(n2 / 2);
  RealVector wf = doubled(U.weight_from.values);
  RealVector wt = doubled(U.weight_to.values);
  // U^{*} pairs the t_to form against the t_from form
  Matrix lhs = U.matrix.adjoint() * wt.cast<Complex>().asDiagonal() * q * U.matrix;
  lhs = wf.cast<Complex>().cwiseInverse().asDiagonal() * lhs;
  return weighted_norm(lhs - q, wf) / weighted_norm(q, wf);
}

CovariancePair transport_covariances(const CovariancePair& cov, const EvolutionOperator& U) {
  if (cov.n() * 2 != U.matrix.rows())
    throw std::invalid_argument("transport_covariances: dimension mismatch");
  if ((cov.charge.weight.values - U.weight_to.values).cwiseAbs().maxCoeff() >
      1e-12 * U.weight_to.values.maxCoeff())
    throw std::invalid_argument("transport_covariances: weight mismatch at the endpoint");

  RealVector wt = doubled(U.weight_to.values);
  RealVector wf = doubled(U.weight_from.values);
  Matrix pre = wf.cast<Complex>().cwiseInverse().asDiagonal() *
               (U.matrix.adjoint() * wt.cast<Complex>().asDiagonal());
  CovariancePair out;
  out.plus = pre * cov.plus * U.matrix;
  out.minus = pre * cov.minus * U.matrix;
  out.charge = ChargeForm{U.weight_from};
  out.provenance = cov.provenance + " @t=" + std::to_string(U.t_from);
  return out;
}

CovariancePair asymptotic_vacuum_at(const Scenario& scenario, double t, ScatterSide side) {
  if (!scenario.asymptotics) throw std::invalid_argument("scenario has no asymptotics");
  const MetricProfile& ap =
      side == ScatterSide::out ? scenario.asymptotics->out : scenario.asymptotics->in;
  WeightedOperator eps = func_calculus(build_spatial_operator(ap, scenario.grid, 0.0),
                                       [](double x) { return std::sqrt(x); }, "eps_asym");
  // transplant onto the time-t data space through the unitary
  // S = (w_asym / w(t))^{1/2}: the pair is then an exact state w.r.t. the
  // Sigma_t pairing at every finite t, with the same t -> infinity limit
  WeightVector w_here = weight_at(scenario.profile, scenario.grid, t);
  RealVector S = (eps.weight.values.cwiseQuotient(w_here.values)).cwiseSqrt();
  WeightedOperator eps_here{S.cast<Complex>().asDiagonal() * eps.mat *
                                S.cwiseInverse().cast<Complex>().asDiagonal(),
                            w_here, "eps_asym@t"};
  return vacuum_covariances(eps_here);
}

namespace {

std::vector<double> doubling_ladder(double horizon) {
  std::vector<double> ladder;
  double T = horizon;
  while (T > 1.0 + 1e-9) {
    ladder.push_back(T);
    T /= 2.0;
  }
  ladder.push_back(T);
  std::reverse(ladder.begin(), ladder.end());
  if (ladder.size() < 3)
    throw std::invalid_argument("scattering ladder: horizon too small for a rate fit");
  return ladder;
}

void fit_ladder(std::vector<LadderEntry>& ladder, double& rate) {
  RealVector xs(ladder.size()), ys(ladder.size());
  for (size_t i = 0; i < ladder.size(); ++i) {
    xs[static_cast<int>(i)] = ladder[i].horizon;
    ys[static_cast<int>(i)] = std::max(ladder[i].defect, 1e-300);
  }
  rate = loglog_slope(xs, ys);
  for (auto& e : ladder) e.fitted_rate = rate;
}

} // namespace

ScatteringResult out_in_vacuum(const Scenario& scenario, double horizon, ScatterSide side) {
  if (!scenario.asymptotics) throw std::invalid_argument("out_in_vacuum: scenario has no asymptotics");
  double sgn = side == ScatterSide::out ? 1.0 : -1.0;
  if (side == ScatterSide::out && horizon > scenario.t_max + 1e-9)
    throw std::invalid_argument("out_in_vacuum: horizon beyond t_max");
  if (side == ScatterSide::in && -horizon < scenario.t_min - 1e-9)
    throw std::invalid_argument("out_in_vacuum: horizon beyond t_min");

  std::vector<double> Ts = doubling_ladder(horizon);
  ScatteringResult result;
  CovariancePair prev;
  bool have_prev = false;
  double prev_defect = std::numeric_limits<double>::infinity();
  for (double T : Ts) {
    EvolutionOperator U = evolve(scenario, 0.0, sgn * T);
    CovariancePair vacT = asymptotic_vacuum_at(scenario, sgn * T, side);
    CovariancePair at0 = transport_covariances(vacT, U);
    at0.provenance = (side == ScatterSide::out ? "out-vacuum" : "in-vacuum");
    if (have_prev) {
      double d = weighted_norm(at0.plus - prev.plus, doubled(at0.charge.weight.values));
      if (d > 4.0 * prev_defect && d > 1e-8)
        throw std::runtime_error("out_in_vacuum: divergence detected along the T-ladder");
      result.ladder.push_back({T, d, 0.0});
      prev_defect = d;
    }
    prev = at0;
    have_prev = true;
    result.limit = at0;
  }
  fit_ladder(result.ladder, result.fitted_rate);
  return result;
}

Matrix static_evolution(const WeightedOperator& eps, double dt) {
  const int n = eps.dim();
  Matrix c = func_calculus(eps, [dt](double x) { return std::cos(x * dt); }).mat;
  Matrix si = func_calculus(eps, [dt](double x) { return std::sin(x * dt) / x; }).mat;
  Matrix se = func_calculus(eps, [dt](double x) { return std::sin(x * dt) * x; }).mat;
  Matrix U(2 * n, 2 * n);
  U.block(0, 0, n, n) = c;
  U.block(0, n, n, n) = I_UNIT * si;
  U.block(n, 0, n, n) = I_UNIT * se;
  U.block(n, n, n, n) = c;
  return U;
}

WaveOperatorResult wave_operator(const Scenario& scenario, double horizon, ScatterSide side) {
  if (!scenario.asymptotics) throw std::invalid_argument("wave_operator: scenario has no asymptotics");
  if (scenario.asymptotics->decay_exponent <= 1.0)
    throw std::invalid_argument(
        "wave_operator: short-range condition requires decay exponent delta > 1");
  double sgn = side == ScatterSide::out ? 1.0 : -1.0;

  const MetricProfile& ap =
      side == ScatterSide::out ? scenario.asymptotics->out : scenario.asymptotics->in;
  WeightedOperator eps = func_calculus(build_spatial_operator(ap, scenario.grid, 0.0),
                                       [](double x) { return std::sqrt(x); }, "eps_asym");

  WaveOperatorResult result;
  std::vector<double> Ts = doubling_ladder(horizon);
  Matrix prev;
  bool have_prev = false;
  RealVector wd = doubled(eps.weight.values);
  for (double T : Ts) {
    EvolutionOperator U = evolve(scenario, 0.0, sgn * T);         // U(sgn T, 0)
    Matrix Ufree = static_evolution(eps, -sgn * T);               // U_free(0, sgn T)
    // identification of the Sigma_T data space with the asymptotic one,
    // matching asymptotic_vacuum_at
    WeightVector wT = weight_at(scenario.profile, scenario.grid, sgn * T);
    RealVector Sd = doubled((wT.values.cwiseQuotient(eps.weight.values)).cwiseSqrt());
    Matrix W = Ufree * (Sd.cast<Complex>().asDiagonal() * U.matrix);
    if (have_prev) result.ladder.push_back({T, weighted_norm(W - prev, wd), 0.0});
    prev = W;
    have_prev = true;
    result.matrix = W;
  }
  fit_ladder(result.ladder, result.fitted_rate);

  // cross-check against the direct limit: W^* lambda_vac W = lambda_out/in(0)
  ScatteringResult direct = out_in_vacuum(scenario, horizon, side);
  CovariancePair vac = vacuum_covariances(eps);
  WeightVector w0 = weight_at(scenario.profile, scenario.grid, 0.0);
  RealVector wd0 = doubled(w0.values);
  Matrix pulled = wd0.cast<Complex>().cwiseInverse().asDiagonal() *
                  (result.matrix.adjoint() * wd.cast<Complex>().asDiagonal()) * vac.plus *
                  result.matrix;
  result.cross_check = weighted_norm(pulled - direct.limit.plus, wd0);
  return result;
}

} // namespace qfc
