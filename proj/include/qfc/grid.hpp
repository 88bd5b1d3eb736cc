#ifndef QFC_GRID_HPP
#define QFC_GRID_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace qfc {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Periodic spatial lattice on the circle of given circumference.
struct Grid {
  int n_points = 0;
  double circumference = 0.0;
  double spacing = 0.0;
  RealVector coordinates;
};

Grid build_grid(int n_points, double circumference);

// 1-D spatial metric coefficient h(t,x), static lapse N(x) and potential
// V(t,x) with a declared positive floor m^2.  dh_dt is the analytic time
// derivative of h, needed by the first-order evolution generator.
struct MetricProfile {
  std::function<double(double, double)> h;
  std::function<double(double, double)> dh_dt;
  std::function<double(double)> lapse;        // defaults to 1
  std::function<double(double, double)> potential;
  double mass_squared = 0.0;                  // declared floor, > 0
  std::string name;

  bool time_independent = false;
};

// Positive quadrature weights sqrt(h(t,x_j)) * spacing at a fixed time.
struct WeightVector {
  RealVector values;
  double time = 0.0;
  int size() const { return static_cast<int>(values.size()); }
};

WeightVector weight_at(const MetricProfile& profile, const Grid& grid, double t);

Complex inner_product(const Vector& u, const Vector& v, const WeightVector& w);

// Named presets: "flat", "gaussian-bump" (h = 1 + A exp(-t^2/tau^2) cos(k x)),
// "powerlaw-relax" (h = h_out + A (1+t^2)^(-delta/2)).  All presets take a
// constant potential V = m^2 and an optional lapse N = 1 + lapse_amplitude cos(x).
MetricProfile make_profile(const std::string& name,
                           const std::map<std::string, double>& params,
                           double mass_squared);

} // namespace qfc

#endif
