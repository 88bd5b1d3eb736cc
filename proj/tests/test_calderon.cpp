#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfc/calderon.hpp"
#include "qfc/propagators.hpp"

#include <cmath>

using namespace qfc;

namespace {

WeightedOperator diag_eps(std::initializer_list<double> eigs) {
  int n = static_cast<int>(eigs.size());
  Matrix m = Matrix::Zero(n, n);
  int i = 0;
  for (double e : eigs) m(i, i) = e, ++i;
  return WeightedOperator{m, WeightVector{RealVector::Constant(n, 1.0), 0.0}, "eps"};
}

WeightedOperator grid_eps(int n) {
  Grid g = build_grid(n, 2.0 * M_PI);
  MetricProfile prof = make_profile("gaussian-bump", {{"A", 0.3}, {"tau", 1.0}, {"k", 2.0}}, 1.0);
  WeightedOperator a = build_spatial_operator(prof, g, 0.2);
  return func_calculus(a, [](double x) { return std::sqrt(x); }, "eps");
}

// independent oracle for one eps eigenvalue e: beta-periodic Calderon
// projector as the projection onto traces of solutions on (0, beta/2) along
// traces of solutions on (beta/2, beta).  Trace entries carry the
// outward-normal derivative of the s > 0 component at both boundary circles.
Eigen::Matrix4d periodic_mode_oracle(double e, double beta) {
  double mu = std::exp(-beta * e / 2.0);
  Eigen::Matrix4d B;
  // order: (value at 0, derivative at 0, value at beta/2, derivative at beta/2);
  // the derivative entries carry the outward normal of (0, beta/2):
  // -d/ds at s = 0 and +d/ds at s = beta/2
  B.col(0) << 1.0, e, mu, -mu * e;                      // exp(-s e) on (0, b/2)
  B.col(1) << 1.0, -e, 1.0 / mu, e / mu;                // exp(+s e)
  B.col(2) << mu * mu, mu * mu * e, mu, -mu * e;        // exp(-s e) on (b/2, b)
  B.col(3) << 1.0 / (mu * mu), -e / (mu * mu), 1.0 / mu, e / mu;
  Eigen::Vector4d sel;
  sel << 1.0, 1.0, 0.0, 0.0;
  return B * sel.asDiagonal() * B.inverse();
}

// Dirichlet oracle for one mode: projection onto the trace of the box
// solution vanishing at s = T, along the trace of the box solution on
// (-T, 0) vanishing at s = -T.
Eigen::Matrix2d dirichlet_mode_oracle(double e, double T) {
  Eigen::Matrix2d B;
  B.col(0) << std::sinh(T * e), e * std::cosh(T * e);
  B.col(1) << std::sinh(T * e), -e * std::cosh(T * e);
  Eigen::Vector2d sel;
  sel << 1.0, 0.0;
  return B * sel.asDiagonal() * B.inverse();
}

} // namespace

TEST_CASE("euclidean green function: closed values and decay") {
  WeightedOperator e1 = diag_eps({1.0});
  CHECK(euclidean_green(e1, 0.0).mat(0, 0).real() == doctest::Approx(0.5));
  CHECK(euclidean_green(e1, 1.0).mat(0, 0).real() == doctest::Approx(std::exp(-1.0) / 2.0));

  WeightedOperator eps = grid_eps(9);
  double emin = spectral_decomposition(eps).eigenvalues.minCoeff();
  for (double s : {0.5, 1.0, 2.5}) {
    double nrm = weighted_norm(euclidean_green(eps, s).mat, eps.weight.values);
    CHECK(nrm <= std::exp(-s * emin) / (2.0 * emin) * (1.0 + 1e-12));
  }
}

TEST_CASE("wick rotation: i^-1 G_E(it) = G_F(t) at sampled times") {
  WeightedOperator eps = grid_eps(8);
  const RealVector& w = eps.weight.values;
  CHECK(std::abs(euclidean_green_complex(diag_eps({1.0}), Complex(0, 0)).mat(0, 0) -
                 Complex(0.5, 0.0)) < 1e-15);
  for (int i = 0; i < 20; ++i) {
    double t = -2.0 + 4.0 * i / 19.0;
    Matrix ge = euclidean_green_complex(eps, Complex(0.0, t)).mat;
    Matrix gf = feynman(eps, t).mat;
    CHECK(weighted_norm(ge / Complex(0, 1) - gf, w) <= 1e-12 * weighted_norm(gf, w));
  }
}

TEST_CASE("free Calderon projectors coincide with the vacuum projections") {
  WeightedOperator eps = grid_eps(9);
  CalderonPair c = calderon_free(eps);
  ProjectionPair vac = vacuum_projections(eps);
  CHECK((c.plus - vac.plus).cwiseAbs().maxCoeff() == 0.0);

  RealVector wd = doubled(eps.weight.values);
  CHECK(weighted_norm(c.plus * c.plus - c.plus, wd) < 1e-11);
  CovariancePair state = induced_state(c);
  CHECK(validate_state(state).valid);
  CHECK(purity_defect(state) <= 1e-12);
}

TEST_CASE("dirichlet projectors: spot value, idempotency, oracle") {
  // eps = 1, T = artanh(1/2): C+ = 1/2 [[1, 1/2],[2, 1]]
  WeightedOperator e1 = diag_eps({1.0});
  double T = std::atanh(0.5);
  CalderonPair c = calderon_dirichlet(e1, T);
  Matrix expect(2, 2);
  expect << 0.5, 0.25, 1.0, 0.5;
  CHECK((c.plus - expect).cwiseAbs().maxCoeff() < 1e-14);

  WeightedOperator eps = grid_eps(8);
  CalderonPair cg = calderon_dirichlet(eps, 0.9);
  RealVector wd = doubled(eps.weight.values);
  CHECK(weighted_norm(cg.plus * cg.plus - cg.plus, wd) < 1e-11);
  CHECK(weighted_norm(cg.plus + cg.minus - Matrix::Identity(16, 16), wd) < 1e-12);

  // mode-by-mode oracle on a diagonal eps
  WeightedOperator ed = diag_eps({0.7, 1.3, 2.2});
  CalderonPair cd = calderon_dirichlet(ed, 1.1);
  for (int k = 0; k < 3; ++k) {
    Eigen::Matrix2d oracle = dirichlet_mode_oracle(ed.mat(k, k).real(), 1.1);
    CHECK(std::abs(cd.plus(k, k).real() - oracle(0, 0)) < 1e-12);
    CHECK(std::abs(cd.plus(k, 3 + k).real() - oracle(0, 1)) < 1e-12);
    CHECK(std::abs(cd.plus(3 + k, k).real() - oracle(1, 0)) < 1e-12);
    CHECK(std::abs(cd.plus(3 + k, 3 + k).real() - oracle(1, 1)) < 1e-12);
  }

  // induced state is pure
  CovariancePair state = induced_state(cg);
  CHECK(validate_state(state).valid);
  CHECK(purity_defect(state) <= 1e-10);
}

TEST_CASE("dirichlet convergence to the free projector at rate 2 eps_min") {
  WeightedOperator e1 = diag_eps({1.0});
  CalderonPair inf = calderon_free(e1);
  RealVector wd = doubled(e1.weight.values);
  RealVector Ts(7), ds(7);
  for (int i = 0; i < 7; ++i) {
    double T = 1.0 + 0.5 * i;
    Ts[i] = T;
    ds[i] = weighted_norm(calderon_dirichlet(e1, T).plus - inf.plus, wd);
    // single-mode oracle: |tanh(T) - 1| = 2 e^{-2T} / (1 + e^{-2T})
    double tail = 2.0 * std::exp(-2.0 * T) / (1.0 + std::exp(-2.0 * T));
    CHECK(ds[i] >= 0.49 * tail);
    CHECK(ds[i] <= 1.5 * tail);
  }
  // fitted exponent of log d vs T within 10% of 2 eps_min = 2
  double num = 0, den = 0, mx = 0, my = 0;
  for (int i = 0; i < 7; ++i) mx += Ts[i] / 7.0, my += std::log(ds[i]) / 7.0;
  for (int i = 0; i < 7; ++i) {
    num += (Ts[i] - mx) * (std::log(ds[i]) - my);
    den += (Ts[i] - mx) * (Ts[i] - mx);
  }
  CHECK(-num / den == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("beta-periodic projectors match the subspace oracle mode by mode") {
  WeightedOperator ed = diag_eps({0.8, 1.3});
  double beta = 1.7;
  CalderonPair c = calderon_periodic(ed, beta);
  const int n = 2;
  // data-major layout: value(comp0)[n], value(comp1)[n], deriv(comp0)[n], deriv(comp1)[n]
  auto entry = [&](const Matrix& M, int comp_r, int data_r, int comp_c, int data_c, int k) {
    return M(data_r * 2 * n + comp_r * n + k, data_c * 2 * n + comp_c * n + k).real();
  };
  for (int k = 0; k < n; ++k) {
    Eigen::Matrix4d oracle = periodic_mode_oracle(ed.mat(k, k).real(), beta);
    for (int cr = 0; cr < 2; ++cr)
      for (int dr = 0; dr < 2; ++dr)
        for (int cc = 0; cc < 2; ++cc)
          for (int dc = 0; dc < 2; ++dc)
            CHECK(std::abs(entry(c.plus, cr, dr, cc, dc, k) -
                           oracle(2 * cr + dr, 2 * cc + dc)) < 1e-12);
  }
}

TEST_CASE("beta-periodic pair: partition, idempotency, doubled purity") {
  WeightedOperator eps = diag_eps({1.0, 2.0});
  CalderonPair c = calderon_periodic(eps, 1.0);
  RealVector wd(8);
  wd << doubled(eps.weight.values), doubled(eps.weight.values);
  CHECK(weighted_norm(c.plus + c.minus - Matrix::Identity(8, 8), wd) < 1e-13);
  CHECK(weighted_norm(c.plus * c.plus - c.plus, wd) < 1e-10);

  CovariancePair state = induced_state(c);
  CHECK(validate_state(state).valid);
  CHECK(purity_defect(state) <= 1e-10);  // the doubled state is pure

  // beta -> infinity: off-component blocks vanish, diagonal tends to free
  CalderonPair cold = calderon_periodic(diag_eps({1.0}), 1000.0);
  CHECK(std::abs(cold.plus(0, 3)) < 1e-12);
  CHECK(std::abs(cold.plus(2, 1)) < 1e-12);
  CalderonPair freep = calderon_free(diag_eps({1.0}));
  CHECK(std::abs(cold.plus(0, 2) - freep.plus(0, 1)) < 1e-6);
}

TEST_CASE("restriction of the beta-periodic state is the thermal state") {
  WeightedOperator eps = grid_eps(8);
  for (double beta : {std::log(3.0), 1.0, 2.5}) {
    CalderonPair c = calderon_periodic(eps, beta);
    CovariancePair restricted = restrict_periodic_state(c);
    CovariancePair thermal = thermal_covariances(eps, beta);
    RealVector wd = doubled(eps.weight.values);
    CHECK(weighted_norm(restricted.plus - thermal.plus, wd) <= 1e-9);
    CHECK(weighted_norm(restricted.minus - thermal.minus, wd) <= 1e-9);
    CHECK(validate_state(restricted).valid);
    CHECK(purity_defect(restricted) > 1e-3);  // mixed at finite beta
  }

  // beta -> infinity: restriction approaches the vacuum
  WeightedOperator e1 = diag_eps({1.0});
  CovariancePair cold = restrict_periodic_state(calderon_periodic(e1, 60.0));
  CovariancePair vac = vacuum_covariances(e1);
  CHECK((cold.plus - vac.plus).cwiseAbs().maxCoeff() < 1e-12);

  // spot value at beta = ln 3: diagonal entries follow coth(ln3 / 2) = 2,
  // i.e. the tanh(ln3 / 2) = 1/2 pattern in the inverse
  CovariancePair spot = restrict_periodic_state(calderon_periodic(e1, std::log(3.0)));
  CHECK(spot.plus(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(0.5 / spot.plus(0, 0).real() == doctest::Approx(std::tanh(0.5 * std::log(3.0))));
}

TEST_CASE("resolvent route to the free projector converges at first order") {
  WeightedOperator eps = diag_eps({1.0, 1.7});
  CalderonPair closed = calderon_free(eps);
  RealVector wd = doubled(eps.weight.values);
  double prev = -1.0;
  for (int np : {400, 800}) {
    CalderonPair num = calderon_free_from_resolvent(eps, 14.0, np);
    double err = weighted_norm(num.plus - closed.plus, wd);
    CHECK(err < 0.15);
    if (prev > 0.0) CHECK(err < 0.65 * prev);  // ~ O(ds)
    prev = err;
  }
}
