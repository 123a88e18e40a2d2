#pragma once

#include "narx/plants.hpp"
#include "narx/types.hpp"

#include <vector>

namespace narx::local_ident {

struct ArxFit {
  ArxModel model;
  double residual_rms = 0.0;  // one-step-ahead equation-error RMS on the fit data
  Index rows = 0;
};

/// Least-squares ARX fit on deviation variables (u - u_s, y - y_s).
/// Minimizes one-step-ahead equation error. Throws RankDeficiencyError when
/// the regressors are not sufficiently excited, Error when N is too small.
ArxFit fit_arx(const TimeSeries& data, const OperatingPoint& op, int n_a, int n_b, int delay);

/// Free-run simulation of a local model under an absolute-unit input. The
/// recursion runs in deviation variables with zero initial deviations and the
/// result is converted back to absolute units, so u identically equal to u_s
/// yields y identically equal to y_s.
TimeSeries simulate_arx(const ArxModel& model, const Vector& u, double dt = 1.0,
                        double divergence_bound = kDefaultDivergenceBound);

/// Experiment design for manufacturing local models from a plant.
struct LocalExperiment {
  int n_samples = 448;
  double prbs_amplitude_frac = 0.05;  // of |u_s| ...
  double prbs_amplitude_floor = 0.01; // ... with this absolute floor
  int prbs_switch_period = 10;
  int warmup = 200;
  std::uint32_t seed = 1;
  int n_a = 2;
  int n_b = 2;
  int delay = 0;
  double dt = 1.0;
};

/// For each operating point: excite the true plant with PRBS around u_s,
/// then fit a local ARX model on the resulting data.
std::vector<ArxFit> make_local_models(const plants::Plant& plant,
                                      const std::vector<OperatingPoint>& ops,
                                      const LocalExperiment& exp);

}  // namespace narx::local_ident
