#pragma once

#include "narx/elastic_net.hpp"
#include "narx/local_ident.hpp"
#include "narx/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace narx::fusion {

struct FusionReport {
  Index n_s = 0;  // selected feature count, intercept included
  double lambda = 0.0;
  double gamma = 0.0;
  sparse::CvReport cv;
  std::vector<std::string> selected_features;
  Vector beta_f;
  std::vector<double> per_op_training_mse;  // one-step residual MSE per block
};

struct FusionResult {
  PNarxModel model;
  FusionReport report;
};

/// Fuse local linear models into one global polynomial NARX model:
/// free-run-simulate every local model under per-operating-point PRBS, build
/// and stack lifted features, pick lambda by cross-validation, select the
/// support and re-identify it by ordinary least squares.
///
/// `excitations` overrides the generated PRBS inputs (one per model, absolute
/// units).
FusionResult fuse(const std::vector<ArxModel>& models, const FusionConfig& config,
                  const std::vector<Vector>* excitations = nullptr);

/// Free-run recursion of a p-NARX model. y_init supplies the first samples
/// verbatim (at least max(n_y, n_u) of them); afterwards predictions feed
/// back as lagged outputs while u supplies the input lags.
TimeSeries simulate_pnarx(const PNarxModel& model, const Vector& u, const Vector& y_init,
                          double dt = 1.0, double divergence_bound = kDefaultDivergenceBound);

enum class ValidationMode { FreeRun, OneStep };

/// Mean squared prediction error against a ground-truth series. FreeRun seeds
/// the recursion with the first max-lag true outputs and feeds predictions
/// back; OneStep uses true lagged values throughout. The mean runs over the
/// predicted samples.
double validate(const PNarxModel& model, const TimeSeries& truth,
                ValidationMode mode = ValidationMode::FreeRun);

/// Exact embedding of a local linear model as a p-NARX model in absolute
/// units (linear features plus the implied intercept).
PNarxModel arx_as_pnarx(const ArxModel& model);

enum class Case { Toy, Tank, Hw };

Case case_from_string(const std::string& name);
std::string to_string(Case c);

struct BenchmarkRow {
  double op = 0.0;  // u_s for toy/hw, h_s for tank
  double mse_fusion = 0.0;
  double mse_m1 = 0.0;
  double mse_m2 = 0.0;
  double ratio1 = 0.0;  // mse_m1 / mse_fusion
  double ratio2 = 0.0;
};

struct BenchmarkReport {
  Case which = Case::Toy;
  std::vector<BenchmarkRow> rows;
  FusionReport fusion;
};

/// Case-specific defaults (lags, gamma, folds, sample counts, local orders).
FusionConfig default_config(Case c);

/// Operating-point grid validated by the benchmark (u_s for toy/hw, h_s for tank).
std::vector<double> benchmark_grid(Case c);

/// Anchor operating points at which local models are identified.
std::vector<double> anchor_points(Case c);

/// Steady input for a grid operating point (tank grids are levels h_s).
double benchmark_input(Case c, double grid_op);

/// The step-test input used to validate at a grid operating point.
Vector benchmark_validation_input(Case c, double u_star, int n_validation);

/// Case sampling interval (the tank runs at 5 s, see benchmark()).
double benchmark_dt(Case c);

/// Reproduce the case-study experiment: identify local models at the anchor
/// points, fuse them, then score fusion and both local models on step-test
/// data from the true plant at every grid operating point.
BenchmarkReport benchmark(Case c, std::optional<FusionConfig> config = std::nullopt);

void write_benchmark_csv(const BenchmarkReport& report, const std::string& path);

}  // namespace narx::fusion
