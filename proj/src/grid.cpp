#include "qfc/grid.hpp"

#include <cmath>

namespace qfc {

Grid build_grid(int n_points, double circumference) {
  if (n_points < 4) throw std::invalid_argument("build_grid: n_points too small (need >= 4)");
  if (circumference <= 0.0) throw std::invalid_argument("build_grid: circumference must be positive");
  Grid g;
  g.n_points = n_points;
  g.circumference = circumference;
  g.spacing = circumference / n_points;
  g.coordinates.resize(n_points);
  for (int j = 0; j < n_points; ++j) g.coordinates[j] = j * g.spacing;
  return g;
}

WeightVector weight_at(const MetricProfile& profile, const Grid& grid, double t) {
  WeightVector w;
  w.time = t;
  w.values.resize(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    double hj = profile.h(t, grid.coordinates[j]);
    if (hj <= 0.0) throw std::runtime_error("weight_at: metric degenerate (h <= 0 at a sample)");
    w.values[j] = std::sqrt(hj) * grid.spacing;
  }
  return w;
}

Complex inner_product(const Vector& u, const Vector& v, const WeightVector& w) {
  if (u.size() != v.size() || u.size() != w.values.size())
    throw std::invalid_argument("inner_product: dimension mismatch");
  Complex acc = 0.0;
  for (int j = 0; j < u.size(); ++j) acc += std::conj(u[j]) * v[j] * w.values[j];
  return acc;
}

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

} // namespace

MetricProfile make_profile(const std::string& name,
                           const std::map<std::string, double>& params,
                           double mass_squared) {
  if (mass_squared <= 0.0)
    throw std::invalid_argument("make_profile: mass floor m^2 must be positive");
  MetricProfile prof;
  prof.name = name;
  prof.mass_squared = mass_squared;
  prof.potential = [mass_squared](double, double) { return mass_squared; };

  double lapse_amp = param_or(params, "lapse_amplitude", 0.0);
  if (lapse_amp <= -1.0 || lapse_amp >= 1.0)
    throw std::invalid_argument("make_profile: |lapse_amplitude| must be < 1");
  prof.lapse = [lapse_amp](double x) { return 1.0 + lapse_amp * std::cos(x); };

  if (name == "flat") {
    prof.h = [](double, double) { return 1.0; };
    prof.dh_dt = [](double, double) { return 0.0; };
    prof.time_independent = true;
  } else if (name == "gaussian-bump") {
    double A = param_or(params, "A", 0.3);
    double tau = param_or(params, "tau", 1.5);
    double k = param_or(params, "k", 4.0);
    if (std::abs(A) >= 1.0) throw std::invalid_argument("make_profile: |A| must be < 1 for gaussian-bump");
    prof.h = [A, tau, k](double t, double x) {
      return 1.0 + A * std::exp(-t * t / (tau * tau)) * std::cos(k * x);
    };
    prof.dh_dt = [A, tau, k](double t, double x) {
      return A * (-2.0 * t / (tau * tau)) * std::exp(-t * t / (tau * tau)) * std::cos(k * x);
    };
  } else if (name == "powerlaw-relax") {
    double A = param_or(params, "A", 0.3);
    double delta = param_or(params, "delta", 2.0);
    double h_out = param_or(params, "h_out", 1.0);
    if (h_out <= 0.0) throw std::invalid_argument("make_profile: h_out must be positive");
    if (A <= -h_out) throw std::invalid_argument("make_profile: h_out + A must stay positive");
    prof.h = [A, delta, h_out](double t, double) {
      return h_out + A * std::pow(1.0 + t * t, -delta / 2.0);
    };
    prof.dh_dt = [A, delta](double t, double) {
      return A * (-delta) * t * std::pow(1.0 + t * t, -delta / 2.0 - 1.0);
    };
  } else {
    throw std::invalid_argument("make_profile: unknown profile name '" + name + "'");
  }
  return prof;
}

} // namespace qfc
