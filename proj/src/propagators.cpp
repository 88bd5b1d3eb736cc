#include "qfc/propagators.hpp"

#include <cmath>

namespace qfc {

namespace {

double theta(double t) { return t >= 0.0 ? 1.0 : 0.0; }

const Complex I_UNIT{0.0, 1.0};

} // namespace

std::pair<WeightedOperator, WeightedOperator> retarded_advanced(const WeightedOperator& eps,
                                                                double t) {
  WeightedOperator sinc = func_calculus(eps, [t](double x) { return std::sin(x * t) / x; });
  WeightedOperator ret = sinc, adv = sinc;
  ret.mat *= theta(t);
  ret.label = "G_ret";
  adv.mat *= -theta(-t);
  adv.label = "G_adv";
  return {ret, adv};
}

WeightedOperator causal(const WeightedOperator& eps, double t) {
  WeightedOperator g = func_calculus(eps, [t](double x) { return std::sin(x * t) / x; }, "G");
  return g;
}

WeightedOperator feynman(const WeightedOperator& eps, double t) {
  return func_calculus_complex(eps, [t](double x) {
    return std::exp(I_UNIT * x * std::abs(t)) / (2.0 * I_UNIT * x);
  }, "G_F");
}

WeightedOperator two_point_static(const WeightedOperator& eps, double t, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("two_point_static: sign must be +-1");
  return func_calculus_complex(eps, [t, sign](double x) {
    return std::exp(I_UNIT * static_cast<double>(sign) * x * t) / (2.0 * x);
  }, sign > 0 ? "Lambda+" : "Lambda-");
}

KernelFamily kernel_family(const WeightedOperator& eps, KernelKind kind) {
  KernelFamily fam;
  fam.kind = kind;
  switch (kind) {
    case KernelKind::retarded:
      fam.evaluate = [eps](double t) { return retarded_advanced(eps, t).first.mat; };
      break;
    case KernelKind::advanced:
      fam.evaluate = [eps](double t) { return retarded_advanced(eps, t).second.mat; };
      break;
    case KernelKind::causal:
      fam.evaluate = [eps](double t) { return causal(eps, t).mat; };
      break;
    case KernelKind::feynman:
      fam.evaluate = [eps](double t) { return feynman(eps, t).mat; };
      break;
    case KernelKind::two_point_plus:
      fam.evaluate = [eps](double t) { return two_point_static(eps, t, +1).mat; };
      break;
    case KernelKind::two_point_minus:
      fam.evaluate = [eps](double t) { return two_point_static(eps, t, -1).mat; };
      break;
    case KernelKind::euclidean:
      fam.evaluate = [eps](double s) {
        return func_calculus(eps, [s](double x) { return std::exp(-std::abs(s) * x) / (2.0 * x); }).mat;
      };
      break;
  }
  return fam;
}

double verify_feynman_identity(const WeightedOperator& eps, const std::vector<double>& t_samples) {
  double worst = 0.0;
  const RealVector& w = eps.weight.values;
  for (double t : t_samples) {
    Matrix gf = feynman(eps, t).mat;
    auto [ret, adv] = retarded_advanced(eps, t);
    Matrix lp = two_point_static(eps, t, +1).mat;
    Matrix lm = two_point_static(eps, t, -1).mat;
    double scale = weighted_norm(gf, w);
    double d1 = weighted_norm(gf - (lp / I_UNIT + adv.mat), w);
    double d2 = weighted_norm(gf - (lm / I_UNIT + ret.mat), w);
    worst = std::max(worst, std::max(d1, d2) / scale);
  }
  return worst;
}

PdeResidual discrete_pde_residual(const WeightedOperator& eps, const KernelFamily& kernel,
                                  const std::vector<double>& t_grid) {
  const int m = static_cast<int>(t_grid.size());
  if (m < 5) throw std::invalid_argument("discrete_pde_residual: t_grid too short");
  const double dt = t_grid[1] - t_grid[0];
  for (int i = 1; i + 1 < m; ++i)
    if (std::abs((t_grid[i + 1] - t_grid[i]) - dt) > 1e-12 * std::abs(dt))
      throw std::invalid_argument("discrete_pde_residual: t_grid must be uniform");
  if (t_grid.front() > 0.0 || t_grid.back() < 0.0)
    throw std::invalid_argument("discrete_pde_residual: t_grid must bracket 0");

  double eps_max = spectral_decomposition(eps).eigenvalues.maxCoeff();
  if (dt * eps_max > 2.0 * M_PI / 8.0)
    throw std::invalid_argument(
        "discrete_pde_residual: t_grid too coarse for the maximal eigenfrequency");

  int i0 = 0;
  for (int i = 0; i < m; ++i)
    if (std::abs(t_grid[i]) < std::abs(t_grid[i0])) i0 = i;

  Matrix eps2 = func_calculus(eps, [](double x) { return x * x; }).mat;
  std::vector<Matrix> K(m);
  for (int i = 0; i < m; ++i) K[i] = kernel.evaluate(t_grid[i]);

  const RealVector& w = eps.weight.values;
  PdeResidual out;
  bool homogeneous = kernel.kind == KernelKind::causal;
  for (int i = 1; i + 1 < m; ++i) {
    Matrix res = (K[i + 1] - 2.0 * K[i] + K[i - 1]) / (dt * dt) + eps2 * K[i];
    if (i == i0 && !homogeneous) {
      // delta weight: dt * residual at the origin node should be the identity
      Matrix scaled = dt * res;
      out.delta_weight = scaled.diagonal().real().mean();
    } else if (std::abs(i - i0) > 2) {
      out.off_origin = std::max(out.off_origin, weighted_norm(res, w));
    }
  }
  if (homogeneous) out.delta_weight = 0.0;
  return out;
}

} // namespace qfc
