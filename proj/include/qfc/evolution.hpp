#ifndef QFC_EVOLUTION_HPP
#define QFC_EVOLUTION_HPP

#include "qfc/states.hpp"

#include <optional>

namespace qfc {

struct Asymptotics {
  MetricProfile out;
  MetricProfile in;
  double decay_exponent = 0.0;  // delta in the t^{-delta} relaxation
};

struct Scenario {
  MetricProfile profile;
  Grid grid;
  double t_min = -1.0;
  double t_max = 1.0;
  int steps_per_unit = 0;  // 0: pick from the resolution rule below
  std::optional<Asymptotics> asymptotics;

  // >= 8 * (max eigenfrequency) / (2 pi), with headroom for the RK4
  // symplecticity target
  int default_steps_per_unit() const;
};

// U(t_to, t_from) on doubled Cauchy data; symplectic between the weighted
// forms at the two endpoint times.
struct EvolutionOperator {
  Matrix matrix;
  double t_from = 0.0;
  double t_to = 0.0;
  WeightVector weight_from;
  WeightVector weight_to;
};

// H(t) = [[0, 1], [a(t), i r(t)]] with r = d/dt log sqrt(h)
Matrix assemble_generator(const Scenario& scenario, double t);

// time-ordered exponential of i H along [s, t] by fixed-step RK4
EvolutionOperator evolve(const Scenario& scenario, double s, double t);

double symplecticity_defect(const EvolutionOperator& U);

// congruence transport of a pair at time t_to back to t_from
CovariancePair transport_covariances(const CovariancePair& cov, const EvolutionOperator& U);

struct LadderEntry {
  double horizon = 0.0;
  double defect = 0.0;   // distance to the previous rung
  double fitted_rate = 0.0;
};

enum class ScatterSide { out, in };

struct ScatteringResult {
  CovariancePair limit;             // pair at t = 0 for the largest horizon
  std::vector<LadderEntry> ladder;  // Cauchy-convergence log
  double fitted_rate = 0.0;         // log-log slope of the ladder defects
};

// lambda^{+-}(0; T) = U(+-T, 0)^* lambda_vac^{+-} U(+-T, 0) over a doubling
// ladder of horizons ending at `horizon`
ScatteringResult out_in_vacuum(const Scenario& scenario, double horizon, ScatterSide side);

struct WaveOperatorResult {
  Matrix matrix;                    // W(T) = U_free(0, +-T) U(+-T, 0)
  std::vector<LadderEntry> ladder;
  double fitted_rate = 0.0;
  double cross_check = 0.0;         // || W^* lambda_vac W - out_in limit ||
};

WaveOperatorResult wave_operator(const Scenario& scenario, double horizon, ScatterSide side);

// vacuum pair of the asymptotic operator, expressed w.r.t. the weight of the
// interpolating metric at time t (exact form rebase)
CovariancePair asymptotic_vacuum_at(const Scenario& scenario, double t, ScatterSide side);

// closed-form static evolution for the asymptotic profile
Matrix static_evolution(const WeightedOperator& eps, double dt);

} // namespace qfc

#endif
