#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfc/conformal.hpp"
#include "qfc/hadamard.hpp"

#include <cmath>

using namespace qfc;

namespace {

WeightedOperator grid_eps(const Grid& g, double m2 = 1.0) {
  MetricProfile prof = make_profile("flat", {}, m2);
  WeightedOperator a = build_spatial_operator(prof, g, 0.0);
  return func_calculus(a, [](double x) { return std::sqrt(x); }, "eps");
}

std::vector<double> uniform_grid(double lo, double hi, int m) {
  std::vector<double> t(m);
  for (int i = 0; i < m; ++i) t[i] = lo + (hi - lo) * i / (m - 1);
  return t;
}

} // namespace

TEST_CASE("identity factor leaves kernels and pairs unchanged") {
  Grid g = build_grid(9, 2.0 * M_PI);
  WeightedOperator eps = grid_eps(g);
  ConformalFactor one{[](double, double) { return 1.0; }};

  KernelFamily lam = kernel_family(eps, KernelKind::two_point_plus);
  KernelFamily tl = transform_spacetime_covariance(lam, one, g);
  CHECK((tl.evaluate(0.7) - lam.evaluate(0.7)).cwiseAbs().maxCoeff() < 1e-15);

  CovariancePair vac = vacuum_covariances(eps);
  TransformedPair tp = transform_cauchy_covariances(vac, one, g);
  CHECK(weighted_norm(tp.pair.plus - vac.plus, vac.doubled_weight()) < 1e-14);
}

TEST_CASE("constant factor c = 2 rescales spacetime kernels by 1/4") {
  Grid g = build_grid(9, 2.0 * M_PI);
  WeightedOperator eps = grid_eps(g);
  ConformalFactor two{[](double, double) { return 2.0; }};

  for (auto kind : {KernelKind::two_point_plus, KernelKind::two_point_minus, KernelKind::causal}) {
    KernelFamily fam = kernel_family(eps, kind);
    KernelFamily tf = transform_spacetime_covariance(fam, two, g);
    CHECK((tf.evaluate(0.4) - fam.evaluate(0.4) / 4.0).cwiseAbs().maxCoeff() < 1e-14);
  }

  // the transformed pair still satisfies Lambda+ - Lambda- = i G~ on samples
  KernelFamily tp = transform_spacetime_covariance(kernel_family(eps, KernelKind::two_point_plus), two, g);
  KernelFamily tm = transform_spacetime_covariance(kernel_family(eps, KernelKind::two_point_minus), two, g);
  KernelFamily tg = transform_spacetime_covariance(kernel_family(eps, KernelKind::causal), two, g);
  for (double t : {-1.1, 0.3, 2.0}) {
    Matrix lhs = tp.evaluate(t) - tm.evaluate(t);
    Matrix rhs = Complex(0, 1) * tg.evaluate(t);
    CHECK(weighted_norm(lhs - rhs, eps.weight.values) < 1e-13);
  }
}

TEST_CASE("transformed vacuum equals the ground state of the rescaled problem") {
  Grid g = build_grid(12, 2.0 * M_PI);
  WeightedOperator eps = grid_eps(g);
  CovariancePair vac = vacuum_covariances(eps);

  ConformalFactor two{[](double, double) { return 2.0; }};
  TransformedPair tp = transform_cauchy_covariances(vac, two, g);

  // rescaled static problem: h = 4, lapse N = 2, potential c^{-2} V
  MetricProfile scaled = make_profile("flat", {}, 0.25);
  scaled.h = [](double, double) { return 4.0; };
  scaled.lapse = [](double) { return 2.0; };
  StaticReduction red = static_reduction(scaled, g);
  CHECK(weighted_norm(tp.pair.plus - red.ground.plus, doubled(tp.new_weight.values)) < 1e-12);
  CHECK(weighted_norm(tp.pair.minus - red.ground.minus, doubled(tp.new_weight.values)) < 1e-12);
}

TEST_CASE("nonconstant factor keeps validity and purity") {
  Grid g = build_grid(16, 2.0 * M_PI);
  WeightedOperator eps = grid_eps(g);
  ConformalFactor c{[](double, double x) { return 1.0 + 0.5 * std::cos(x); }};

  CovariancePair vac = vacuum_covariances(eps);
  TransformedPair tp = transform_cauchy_covariances(vac, c, g);
  StateReport rep = validate_state(tp.pair);
  CHECK(rep.valid);
  CHECK(rep.ccr_defect < 1e-12);
  CHECK(purity_defect(tp.pair) <= 1e-10);

  // a mixed state stays mixed with a comparable defect (the qM^{-1}q - M
  // relation transforms covariantly; its norm moves within the condition
  // number of the congruence)
  CovariancePair th = thermal_covariances(eps, 1.0);
  TransformedPair tth = transform_cauchy_covariances(th, c, g);
  CHECK(purity_defect(tth.pair) == doctest::Approx(purity_defect(th)).epsilon(0.05));
}

TEST_CASE("commuting diagram: U* q~ U = q to machine precision") {
  Grid g = build_grid(12, 2.0 * M_PI);
  WeightedOperator eps = grid_eps(g);
  CovariancePair vac = vacuum_covariances(eps);
  for (double amp : {0.0, 0.3, 0.7}) {
    ConformalFactor c{[amp](double, double x) { return 1.0 + amp * std::sin(x); }};
    CHECK(conformal_diagram_defect(vac, c, g) <= 1e-12);
  }
}

TEST_CASE("mode-decay proxy survives a smooth conformal factor") {
  Scenario sc;
  sc.profile = make_profile("gaussian-bump", {{"A", 0.35}, {"tau", 1.5}, {"k", 4.0}}, 1.0);
  sc.grid = build_grid(64, 2.0 * M_PI);
  sc.t_min = -6.0;
  sc.t_max = 6.0;
  RiccatiSolution sol = riccati_iterate(sc, uniform_grid(-5.0, 5.0, 401), 12, 1e-12);
  Splitting split = microlocal_splitting(sol, 0.8);

  WeightedOperator a = build_spatial_operator(sc.profile, sc.grid, 0.8);
  WeightedOperator eps = func_calculus(a, [](double x) { return std::sqrt(x); });
  ProjectionPair vac = vacuum_projections(eps);
  Matrix diff = split.projections.plus - vac.plus;
  RealVector ks(16);
  for (int i = 0; i < 16; ++i) ks[i] = 9 + i;
  double p0 = -loglog_slope(ks, mode_compression(diff, eps.weight.values, sc.grid, 9, 24)
                                    .cwiseMax(1e-300));

  // transform both projections by U = diag(1, c^{-1}) and re-measure in the
  // transformed geometry's weight
  ConformalFactor c{[](double, double x) { return 1.0 + 0.25 * std::cos(2.0 * x); }};
  const int n = 64;
  RealVector cg(n);
  for (int j = 0; j < n; ++j) cg[j] = c.c(0.0, sc.grid.coordinates[j]);
  Matrix U = Matrix::Zero(2 * n, 2 * n), Ui = Matrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    U(j, j) = 1.0;
    U(n + j, n + j) = 1.0 / cg[j];
    Ui(j, j) = 1.0;
    Ui(n + j, n + j) = cg[j];
  }
  Matrix tdiff = U * diff * Ui;
  RealVector w_new = eps.weight.values.cwiseProduct(cg);
  double p1 = -loglog_slope(ks, mode_compression(tdiff, w_new, sc.grid, 9, 24).cwiseMax(1e-300));
  CHECK(std::abs(p1 - p0) < 0.5);
}
